//! Minimal line plots: stacked panels, one polyline per series.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 240.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 120.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 28.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Clone, Debug)]
pub struct Line {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    /// Thin, translucent stroke without a legend entry (e.g. class members).
    pub faint: bool,
}

impl Line {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            dashed: false,
            faint: false,
        }
    }

    /// Values plotted against the uniform grid on `[0, 1]`.
    pub fn on_grid(name: impl Into<String>, values: &[f64]) -> Self {
        let n = values.len().max(2) - 1;
        Self::new(
            name,
            values
                .iter()
                .enumerate()
                .map(|(j, &v)| (j as f64 / n as f64, v))
                .collect(),
        )
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }

    pub fn faint(mut self) -> Self {
        self.faint = true;
        self
    }
}

#[derive(Clone, Debug, Default)]
pub struct Panel {
    pub title: String,
    pub lines: Vec<Line>,
}

impl Panel {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            lines: Vec::new(),
        }
    }

    pub fn line(mut self, line: Line) -> Self {
        self.lines.push(line);
        self
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn bounds(panel: &Panel) -> (f64, f64, f64, f64) {
    let pts = panel
        .lines
        .iter()
        .flat_map(|l| l.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    (x0, x1, y0, y1)
}

/// Renders `panels` stacked vertically into one SVG document.
pub fn render(panels: &[Panel]) -> String {
    let height = PANEL_HEIGHT * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {height}" width="{WIDTH}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{height}" fill="white"/>"#
    );
    for (p, panel) in panels.iter().enumerate() {
        let top = p as f64 * PANEL_HEIGHT;
        let (x0, x1, y0, y1) = bounds(panel);
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| top + MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h;
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN_LEFT}" y="{:.2}" font-size="13">{}</text>"#,
            top + 18.0,
            escape(&panel.title)
        );
        let _ = writeln!(
            out,
            r##"<rect x="{MARGIN_LEFT}" y="{:.2}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##,
            top + MARGIN_TOP
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y1:.3}</text><text x="{:.2}" y="{:.2}" text-anchor="end">{y0:.3}</text>"#,
            MARGIN_LEFT - 4.0,
            top + MARGIN_TOP + 10.0,
            MARGIN_LEFT - 4.0,
            top + MARGIN_TOP + plot_h
        );
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN_LEFT}" y="{:.2}">{x0:.3}</text><text x="{:.2}" y="{:.2}" text-anchor="end">{x1:.3}</text>"#,
            top + PANEL_HEIGHT - 10.0,
            MARGIN_LEFT + plot_w,
            top + PANEL_HEIGHT - 10.0
        );
        let mut legend = 0;
        for (i, line) in panel.lines.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = line
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let style = match (line.dashed, line.faint) {
                (_, true) => r#" stroke-width="0.8" stroke-opacity="0.35""#,
                (true, false) => r#" stroke-width="1.6" stroke-dasharray="6 4""#,
                (false, false) => r#" stroke-width="1.6""#,
            };
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}"{style} points="{}"/>"#,
                pts.join(" ")
            );
            if !line.faint {
                let ly = top + MARGIN_TOP + 12.0 + 14.0 * legend as f64;
                let lx = WIDTH - MARGIN_RIGHT + 8.0;
                let dash = if line.dashed {
                    r#" stroke-dasharray="4 3""#
                } else {
                    ""
                };
                let _ = writeln!(
                    out,
                    r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.6"{dash}/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
                    ly - 4.0,
                    lx + 18.0,
                    ly - 4.0,
                    lx + 22.0,
                    escape(&line.name)
                );
                legend += 1;
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_polyline_per_line() {
        let panel = Panel::new("a < b")
            .line(Line::on_grid("f", &[0.0, 1.0, 0.5]))
            .line(Line::on_grid("g", &[1.0, 0.0, 0.5]).dashed())
            .line(Line::on_grid("m", &[0.2, 0.2, 0.2]).faint());
        let svg = render(&[panel.clone(), panel]);
        assert_eq!(svg.matches("<polyline").count(), 6);
        assert_eq!(svg.matches("stroke-dasharray=\"6 4\"").count(), 2);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains(r#"viewBox="0 0 640 480""#));
    }

    #[test]
    fn flat_and_empty_panels_do_not_divide_by_zero() {
        let svg = render(&[
            Panel::new("flat").line(Line::on_grid("c", &[1.0, 1.0])),
            Panel::new("empty"),
        ]);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
