//! Generic source-to-target evaluation on user-supplied datasets, including
//! the missing-data-at-test-time flow.

use std::time::Instant;

use crate::classify::{fit_flda_l, fit_lr, fit_ls, TrainConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::transfer::{DropoutTransfer, SourceModel, DEFAULT_EPSILON};

use super::{
    evaluate, fit_quadratic_adapted, names, CellTiming, ConfigSnapshot, ErrorCell,
    ExperimentResult, ThetaCell,
};

#[derive(Debug, Clone)]
pub struct PairOptions {
    pub train: TrainConfig,
    /// Clamp constant for the dropout estimate.
    pub epsilon: f64,
    /// Paths recorded in the config snapshot, when the data came from files.
    pub source_path: Option<String>,
    pub target_path: Option<String>,
    pub seed: u64,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions {
            train: TrainConfig::default(),
            epsilon: DEFAULT_EPSILON,
            source_path: None,
            target_path: None,
            seed: 0,
        }
    }
}

/// Fit the naive source classifiers and both adapted classifiers on a
/// (labeled source, unlabeled-or-labeled target) pair; score on the target
/// when it has labels, and always report the estimated transfer table.
pub fn run_pair(source: &Dataset, target: &Dataset, opts: &PairOptions) -> Result<ExperimentResult> {
    if source.m() != target.m() {
        return Err(Error::Dimension { expected: source.m(), got: target.m() });
    }
    if source.labels().is_none() {
        return Err(Error::Data("pair evaluation needs a labeled source".into()));
    }

    let snapshot = ConfigSnapshot {
        experiment: "pair".into(),
        seed: opts.seed,
        validation_n: target.n(),
        train: opts.train.clone(),
        synthetic: None,
        sizes: None,
        repetitions: None,
        deltas: None,
        source_path: opts.source_path.clone(),
        target_path: opts.target_path.clone(),
    };
    let mut result = ExperimentResult::empty("pair", snapshot);

    let source_model = SourceModel::estimate(source)?;
    let transfer = DropoutTransfer::estimate_with_epsilon(&source_model, target, opts.epsilon)?;
    for (d, &t) in transfer.theta().iter().enumerate() {
        let feature = source
            .feature_names()
            .and_then(|n| n.get(d).cloned())
            .unwrap_or_else(|| d.to_string());
        result.theta.push(ThetaCell { feature, theta: t });
    }

    let start = Instant::now();
    let mut models = vec![
        (names::S_LS, fit_ls(source, &opts.train)?),
        (names::S_LR, fit_lr(source, &opts.train)?),
        (names::FLDA_Q, fit_quadratic_adapted(source, &transfer, &opts.train)?),
        (names::FLDA_L, fit_flda_l(source, &transfer, &opts.train)?),
    ];
    if target.labels().is_some() {
        models.push((names::T_LR, fit_lr(target, &opts.train)?));
    }
    result.timings.push(CellTiming {
        cell: "fit-all".into(),
        seconds: start.elapsed().as_secs_f64(),
    });

    if target.labels().is_some() {
        for (name, model) in &models {
            result.errors.push(ErrorCell {
                classifier: (*name).into(),
                domain: "target".into(),
                error: evaluate(model, target)?,
            });
        }
    }

    Ok(result)
}

/// Missing-data flow: rows with no missing values become the source, the
/// rest (zero-imputed) become the target, then the pair evaluation runs.
pub fn run_missing(data: &Dataset, opts: &PairOptions) -> Result<ExperimentResult> {
    let (source, target) = data.missing_data_split()?;
    let mut result = run_pair(&source, &target, opts)?;
    result.id = "missing".into();
    result.config.experiment = "missing".into();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Features, Labels};
    use ndarray::{array, Array2};

    #[test]
    fn identical_domains_give_zero_theta_and_equal_errors() {
        let ds = Dataset::from_dense(
            array![
                [1.0, 0.0],
                [2.0, 1.0],
                [0.0, 1.0],
                [1.0, 2.0],
                [3.0, 0.0],
                [0.0, 2.0]
            ],
            Some(Labels::Binary(vec![1, 1, -1, -1, 1, -1])),
        )
        .unwrap();
        let result = run_pair(&ds, &ds, &PairOptions::default()).unwrap();
        assert!(result.theta.iter().all(|t| t.theta == 0.0));
        let err_of = |n: &str| {
            result
                .errors
                .iter()
                .find(|c| c.classifier == n)
                .map(|c| c.error)
                .unwrap()
        };
        assert!((err_of(names::FLDA_Q) - err_of(names::S_LS)).abs() <= 1e-12);
        assert!((err_of(names::FLDA_L) - err_of(names::S_LR)).abs() <= 1e-12);
        assert!(result.errors.iter().any(|c| c.classifier == names::T_LR));
    }

    #[test]
    fn unlabeled_target_still_reports_theta() {
        let src = Dataset::from_dense(
            array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.0, 0.0]],
            Some(Labels::Binary(vec![1, -1, 1, -1])),
        )
        .unwrap();
        let tgt = Dataset::from_dense(array![[0.0, 1.0], [0.0, 0.0]], None).unwrap();
        let result = run_pair(&src, &tgt, &PairOptions::default()).unwrap();
        assert!(result.errors.is_empty());
        assert_eq!(result.theta.len(), 2);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let src = Dataset::from_dense(array![[1.0, 0.0]], Some(Labels::Binary(vec![1]))).unwrap();
        let tgt = Dataset::from_dense(array![[1.0]], None).unwrap();
        assert!(run_pair(&src, &tgt, &PairOptions::default()).is_err());
    }

    #[test]
    fn missing_flow_partitions_and_scores() {
        let mut mask = Array2::from_elem((8, 2), false);
        mask[(1, 0)] = true;
        mask[(4, 1)] = true;
        mask[(6, 0)] = true;
        let features = array![
            [1.0, 2.0],
            [0.0, 1.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [2.0, 0.0],
            [0.5, 1.5],
            [0.0, 2.0],
            [1.5, 0.5]
        ];
        let ds = Dataset::new(
            Features::Dense(features),
            Some(Labels::Binary(vec![1, -1, 1, -1, 1, -1, 1, -1])),
            None,
            Some(mask),
        )
        .unwrap();
        let result = run_missing(&ds, &PairOptions::default()).unwrap();
        assert_eq!(result.id, "missing");
        // 3 rows had missing values, 5 were complete
        assert_eq!(result.config.validation_n, 3);
        assert!(!result.errors.is_empty());
    }
}
