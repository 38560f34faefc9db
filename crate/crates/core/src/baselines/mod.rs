//! Classical alignment baselines and the classification harness.

mod classify;
mod dba;
mod dtw;

pub use classify::{
    knn_classify, ncc_classify, ClassifierResult, DistanceMatrix, EvalReport, Metric,
};
pub use dba::{dba_barycenter, DbaResult, DEFAULT_DBA_ITERATIONS};
pub use dtw::{dtw_distance, dtw_distance_banded, dtw_distance_frames, dtw_path};
