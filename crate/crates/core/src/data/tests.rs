use std::fs;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;
use crate::objectives::{multi_class_loss, Batch};
use crate::series::TimeSeries;

#[test]
fn ucr_row_format() {
    let (label, values) = parse_ucr_row("2\t0.0\t1.0\t0.0", "x", 1).unwrap();
    assert_eq!(label, "2");
    assert_eq!(values, vec![0.0, 1.0, 0.0]);
    let (_, values) = parse_ucr_row("1,0.5,1.5", "x", 1).unwrap();
    assert_eq!(values, vec![0.5, 1.5]);
    let (_, values) = parse_ucr_row("  1.0000000e+00  2.0 3.0", "x", 1).unwrap();
    assert_eq!(values, vec![2.0, 3.0]);
}

#[test]
fn ucr_parse_errors_carry_row_numbers() {
    match parse_ucr("1\t0\t1\t2\n2\t0\t1\n", "train.tsv") {
        Err(Error::Parse { location, .. }) => assert_eq!(location, "train.tsv:2"),
        other => panic!("{other:?}"),
    }
    match parse_ucr("1\t0\t1\n\n1\t0\tabc\n", "t") {
        Err(Error::Parse { location, message }) => {
            assert_eq!(location, "t:3");
            assert!(message.contains("abc"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn ucr_dataset_remaps_and_normalises() {
    let train = parse_ucr("-1\t0\t1\t0\n1\t3\t3\t3\n", "a").unwrap();
    let test = parse_ucr("2\t1\t2\t3\n", "b").unwrap();
    let ds = ucr_dataset("demo", train.clone(), test.clone(), true).unwrap();
    assert_eq!(ds.class_names, vec!["-1", "1", "2"]);
    assert_eq!(ds.train.labels(), vec![Some(0), Some(1)]);
    assert_eq!(ds.test.labels(), vec![Some(2)]);
    assert_eq!(ds.channels(), 1);
    assert_eq!(ds.train.samples()[1].data(), &[0.0, 0.0, 0.0]);
    let z = ds.train.samples()[0].data();
    let mean: f64 = z.iter().sum::<f64>() / 3.0;
    let var: f64 = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0;
    assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);

    let raw = ucr_dataset("demo", train, test, false).unwrap();
    assert_eq!(raw.train.samples()[0].data(), &[0.0, 1.0, 0.0]);
}

#[test]
fn ucr_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let tr = dir.path().join("Demo_TRAIN.tsv");
    let te = dir.path().join("Demo_TEST.tsv");
    fs::write(&tr, "1\t0\t1\t2\t1\n2\t2\t1\t0\t1\n").unwrap();
    fs::write(&te, "1\t0\t1\t2\t2\n").unwrap();
    let ds = load_ucr(&tr, &te, true).unwrap();
    assert_eq!(ds.name, "Demo");
    assert_eq!((ds.train.len(), ds.test.len(), ds.length()), (2, 1, 4));

    let path = dir.path().join("ds.json");
    ds.save(&path).unwrap();
    let back = Dataset::<f64>::load(&path).unwrap();
    assert_eq!(back, ds);
    for (a, b) in back.train.samples().iter().zip(ds.train.samples()) {
        assert!(a
            .data()
            .iter()
            .zip(b.data())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

fn write_manifest(dir: &std::path::Path, target: Option<usize>) -> std::path::PathBuf {
    fs::write(dir.join("a.csv"), "x,y\n0,10\n1,11\n2,12\n").unwrap();
    fs::write(dir.join("b.csv"), "5,1\n6,1\n").unwrap();
    fs::write(dir.join("c.csv"), "1,1\n2,2\n3,3\n4,4\n").unwrap();
    let target = target
        .map(|t| format!(", \"target_length\": {t}"))
        .unwrap_or_default();
    let manifest = format!(
        r#"{{"sequences": [
            {{"file": "a.csv", "label": "walk", "split": "train"}},
            {{"file": "b.csv", "label": "sit", "split": "train"}},
            {{"file": "c.csv", "label": "walk", "split": "test"}}
        ]{target}}}"#
    );
    let path = dir.join("manifest.json");
    fs::write(&path, manifest).unwrap();
    path
}

#[test]
fn multivariate_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let ds = load_multivariate(write_manifest(dir.path(), Some(5))).unwrap();
    assert_eq!(ds.channels(), 2);
    assert_eq!(ds.length(), 5);
    assert_eq!(ds.class_names, vec!["sit", "walk"]);
    let a = &ds.train.samples()[0];
    assert_eq!(a.row(0), &[0.0, 0.5, 1.0, 1.5, 2.0]);
    assert_eq!(a.label(), Some(1));

    let default = load_multivariate(write_manifest(dir.path(), None)).unwrap();
    assert_eq!(default.length(), DEFAULT_TARGET_LENGTH);
    let c = &default.test.samples()[0];
    assert_eq!(c.row(0)[0], 1.0);
    assert_eq!(c.row(0)[49], 4.0);
}

#[test]
fn multivariate_channel_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_manifest(dir.path(), Some(4));
    fs::write(dir.path().join("b.csv"), "5,1,2\n6,1,2\n").unwrap();
    assert!(load_multivariate(path).is_err());
}

#[test]
fn unchanged_length_keeps_values() {
    let dir = tempfile::tempdir().unwrap();
    let ds = load_multivariate(write_manifest(dir.path(), Some(4))).unwrap();
    assert_eq!(ds.test.samples()[0].row(1), &[1.0, 2.0, 3.0, 4.0]);
}

#[test]
fn synth_warp_properties() {
    for seed in 0..200 {
        let g = synth_warp(&SynthWarpConfig::new(10.0, seed), 50).unwrap();
        let v = g.values();
        assert_eq!((v[0], v[49]), (0.0, 1.0));
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
    let tiny = synth_warp(&SynthWarpConfig::new(1e-20, 3), 50).unwrap();
    assert!(tiny.deviation_from_identity() < 1e-9);
    assert!(synth_warp(&SynthWarpConfig::new(0.0, 3), 50).is_err());
    assert!(synth_warp(&SynthWarpConfig::new(1.0, 3), 1).is_err());
}

#[test]
fn synth_warp_variance_orders_deviation() {
    let median = |var: f64| {
        let mut d: Vec<f64> = (0..100)
            .map(|s| {
                synth_warp(&SynthWarpConfig::new(var, s), 50)
                    .unwrap()
                    .deviation_from_identity()
            })
            .collect();
        d.sort_by(f64::total_cmp);
        d[50]
    };
    assert!(median(10.0) > median(1.0));
}

fn prototypes() -> Batch<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    Batch::new(
        (0..3)
            .map(|k| {
                smooth_series(2, 30, 2, 0.0, &mut rng)
                    .unwrap()
                    .with_label(Some(k))
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn synthetic_dataset_counts_and_truth() {
    let ds =
        make_synthetic_dataset(&prototypes(), 10, &SynthWarpConfig::new(1.0, 9), 0.05).unwrap();
    assert_eq!(ds.train.len(), 30);
    assert_eq!(ds.test.len(), 30);
    let gt = ds.ground_truth.as_ref().unwrap();
    assert_eq!(gt.train.len(), 30);
    assert!(multi_class_loss(ds.train.samples()).unwrap() > 0.0);
    let csv = ground_truth_csv(gt);
    assert!(csv.starts_with("split,sample,tau,gamma\ntrain,0,0,0\n"));

    let again =
        make_synthetic_dataset(&prototypes(), 10, &SynthWarpConfig::new(1.0, 9), 0.05).unwrap();
    assert_eq!(again, ds);
}

#[test]
fn noiseless_tiny_warps_copy_prototypes() {
    let protos = prototypes();
    let ds = make_synthetic_dataset(&protos, 2, &SynthWarpConfig::new(1e-30, 1), 0.0).unwrap();
    for (i, s) in ds.train.samples().iter().enumerate() {
        let p = &protos.samples()[i / 2];
        assert!(s.euclidean_distance(p).unwrap() < 1e-9);
    }
}

#[test]
fn warped_pair_composes_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = smooth_series(3, 50, 2, 1.0, &mut rng).unwrap();
    let pair = warped_pair(&s, &SynthWarpConfig::new(10.0, 4)).unwrap();
    assert_eq!(pair.g, s);
    assert_eq!(pair.f, pair.truth.apply(&s).unwrap());
    let unlabeled = Batch::new(vec![TimeSeries::univariate(vec![0.0, 1.0]).unwrap()]).unwrap();
    assert!(make_synthetic_dataset(&unlabeled, 1, &SynthWarpConfig::new(1.0, 0), 0.0).is_err());
}
