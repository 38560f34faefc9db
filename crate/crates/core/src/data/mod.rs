//! Dataset loading, normalisation and synthetic warped data.

mod dataset;
mod labels;
mod multivariate;
mod synth;
mod ucr;

pub use dataset::{Dataset, GroundTruth};
pub use multivariate::{
    load_multivariate, parse_frames_csv, LabelToken, Manifest, SequenceEntry, Split,
    DEFAULT_TARGET_LENGTH,
};
pub use synth::{
    ground_truth_csv, make_synthetic_dataset, smooth_series, synth_warp, synth_warp_with,
    warped_pair, SynthWarpConfig, WarpedPair, DEFAULT_HARMONICS,
};
pub use ucr::{load_ucr, parse_ucr, parse_ucr_row, ucr_dataset};

#[cfg(test)]
mod tests;
