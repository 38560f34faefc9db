use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Loss terms recorded at the start of one epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub data_term: f64,
    pub reg_term: f64,
    pub total: f64,
    /// Seconds since training started; present only when timing is recorded.
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Terms at the returned parameters.
    pub final_terms: EpochRecord,
    /// Epoch whose starting parameters were returned (`epochs.len()` when
    /// the parameters after the last update won).
    pub best_epoch: usize,
    pub early_stopped: bool,
    pub wall_seconds: Option<f64>,
}

impl TrainReport {
    pub fn initial(&self) -> &EpochRecord {
        &self.epochs[0]
    }

    /// Curve as CSV: `epoch,data_term,reg_term,total,seconds`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,data_term,reg_term,total,seconds\n");
        for r in &self.epochs {
            let secs = r.seconds.map(|s| s.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{}",
                r.epoch, r.data_term, r.reg_term, r.total, secs
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Trailing moving average with window `w` (shorter at the start).
pub fn moving_average(values: &[f64], w: usize) -> Vec<f64> {
    let w = w.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (i, v) in values.iter().enumerate() {
        sum += v;
        if i >= w {
            sum -= values[i - w];
        }
        out.push(sum / (i + 1).min(w) as f64);
    }
    out
}
