//! Harness-level behaviors: file round-trips, emission inventory, and the
//! source-domain ordering of the learning curves.

use flda::classify::TrainConfig;
use flda::data::{load_delimited, DelimitedOptions};
use flda::experiments::{
    emit_results, run_boundary, run_learning_curve, run_missing, run_pair, PairOptions,
};
use flda::synthetic::{generate_pair, Family, SyntheticSpec};
use flda::{Dataset, Labels};

use ndarray::Array2;

fn poisson_spec(n: usize, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        family: Family::Poisson,
        class_params: vec![vec![2.0, 2.0], vec![6.0, 6.0]],
        priors: vec![],
        n_per_domain: n,
        true_theta: vec![0.5, 0.0],
        seed,
    }
}

#[test]
fn pair_on_exported_files_matches_in_memory_run() {
    let spec = poisson_spec(2500, 23);
    let (source, target) = generate_pair(&spec).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let src_path = dir.path().join("source.csv");
    let tgt_path = dir.path().join("target.csv");
    std::fs::write(&src_path, source.to_delimited_string()).unwrap();
    std::fs::write(&tgt_path, target.to_delimited_string()).unwrap();

    let opts = DelimitedOptions { label_column: Some(2), ..Default::default() };
    let source_back = load_delimited(&src_path, &opts).unwrap();
    let target_back = load_delimited(&tgt_path, &opts).unwrap();
    assert_eq!(source.dense_features(), source_back.dense_features());
    assert_eq!(source.labels(), source_back.labels());

    let pair_opts = PairOptions::default();
    let in_memory = run_pair(&source, &target, &pair_opts).unwrap();
    let from_files = run_pair(&source_back, &target_back, &pair_opts).unwrap();
    assert_eq!(in_memory.errors.len(), from_files.errors.len());
    for (a, b) in in_memory.errors.iter().zip(&from_files.errors) {
        assert_eq!(a.classifier, b.classifier);
        assert_eq!(a.error.to_bits(), b.error.to_bits(), "{} differs", a.classifier);
    }
    for (a, b) in in_memory.theta.iter().zip(&from_files.theta) {
        assert_eq!(a.theta.to_bits(), b.theta.to_bits());
    }
}

#[test]
fn boundary_emission_inventory() {
    let spec = SyntheticSpec {
        family: Family::Bernoulli,
        class_params: vec![vec![0.7, 0.7], vec![0.3, 0.3]],
        priors: vec![],
        n_per_domain: 1000,
        true_theta: vec![0.5, 0.0],
        seed: 2,
    };
    let result = run_boundary(&spec, &TrainConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_results(&result, dir.path()).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert!(names.contains(&"result.toml".to_string()));
    assert!(names.contains(&"errors.csv".to_string()));
    // one scatter per domain
    assert!(names.contains(&"scatter_source.csv".to_string()));
    assert!(names.contains(&"scatter_target.csv".to_string()));
    // one decision-line file per classifier
    for c in ["s-ls", "t-ls", "flda-q", "s-lr", "t-lr", "flda-l"] {
        assert!(
            names.contains(&format!("line_{c}.csv")),
            "missing line file for {c}: {names:?}"
        );
    }
}

#[test]
fn source_classifier_wins_on_the_source_domain() {
    let result = run_learning_curve(
        &poisson_spec(5000, 29),
        &[100, 500],
        10,
        &TrainConfig::default(),
    )
    .unwrap();
    let cell = |classifier: &str| {
        result
            .curve
            .iter()
            .find(|c| c.size == 500 && c.classifier == classifier && c.domain == "source")
            .unwrap()
            .mean
    };
    let s_ls = cell("s-ls");
    assert!(
        s_ls < cell("t-ls") && s_ls < cell("flda-q"),
        "s-ls {s_ls} vs t-ls {} and flda-q {}",
        cell("t-ls"),
        cell("flda-q")
    );
}

#[test]
fn missing_split_shape_from_summary_counts() {
    // 704 samples of which 615 carry missing values: source 89, target 615
    let n = 704;
    let with_missing = 615;
    let mut mask = Array2::from_elem((n, 3), false);
    for i in 0..with_missing {
        mask[(i, i % 3)] = true;
    }
    let features = Array2::from_shape_fn((n, 3), |(i, j)| ((i * 3 + j) % 7) as f64);
    let labels = Labels::Binary((0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect());
    let ds = Dataset::from_dense(features, Some(labels))
        .unwrap()
        .with_missing_mask(Some(mask))
        .unwrap();
    let (source, target) = ds.missing_data_split().unwrap();
    assert_eq!(source.n(), 89);
    assert_eq!(target.n(), 615);

    let result = run_missing(&ds, &PairOptions::default()).unwrap();
    assert_eq!(result.theta.len(), 3);
    assert!(!result.errors.is_empty());
}
