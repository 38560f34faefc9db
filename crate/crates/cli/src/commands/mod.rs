pub mod align;
pub mod baselines;
pub mod evaluate;
pub mod gradcheck;
pub mod joint;
pub mod synth;

use resnet_tw::TimeSeries;

use crate::svg::{Line, Panel};

/// One panel per channel; `series` pairs a legend name with a series and a
/// dashed flag.
pub fn channel_panels(title: &str, series: &[(&str, &TimeSeries<f64>, bool)]) -> Vec<Panel> {
    let channels = series.first().map_or(0, |(_, s, _)| s.channels());
    (0..channels)
        .map(|c| {
            let name = if channels > 1 {
                format!("{title} (channel {c})")
            } else {
                title.to_string()
            };
            series
                .iter()
                .fold(Panel::new(name), |panel, (label, s, dashed)| {
                    let line = Line::on_grid(*label, s.row(c));
                    panel.line(if *dashed { line.dashed() } else { line })
                })
        })
        .collect()
}
