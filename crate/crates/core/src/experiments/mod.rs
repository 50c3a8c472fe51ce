//! Experiment harness: boundary comparisons, learning curves, perturbation
//! tables, and generic source-to-target evaluations, with deterministic
//! seeding and machine-readable result emission.

mod boundary;
mod curve;
mod emit;
mod pair;
mod perturb;

pub use boundary::run_boundary;
pub use curve::run_learning_curve;
pub use emit::emit_results;
pub use pair::{run_missing, run_pair, PairOptions};
pub use perturb::{run_perturbation, DEFAULT_DELTAS};

use serde::Serialize;

use crate::classify::{
    error_rate, fit_flda_l, fit_flda_q, fit_flda_q_multiclass, fit_lr, fit_ls, LinearModel,
    TrainConfig,
};
use crate::data::{Dataset, Labels};
use crate::error::{Error, Result};
use crate::synthetic::SyntheticSpec;
use crate::transfer::DropoutTransfer;

/// Validation sets are fixed at this size and generated once per experiment.
pub const VALIDATION_N: usize = 10_000;

pub mod names {
    pub const S_LS: &str = "s-ls";
    pub const T_LS: &str = "t-ls";
    pub const FLDA_Q: &str = "flda-q";
    pub const S_LR: &str = "s-lr";
    pub const T_LR: &str = "t-lr";
    pub const FLDA_L: &str = "flda-l";
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorCell {
    pub classifier: String,
    pub domain: String,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DisagreementCell {
    pub first: String,
    pub second: String,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveCell {
    pub size: usize,
    pub classifier: String,
    pub domain: String,
    pub mean: f64,
    pub sem: f64,
    pub repetitions: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbCell {
    pub loss: String,
    pub column: String,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaCell {
    pub feature: String,
    pub theta: f64,
}

/// Decision-line data for one classifier on a 2-D problem.
#[derive(Debug, Clone, Serialize)]
pub struct ClassifierCoefficients {
    pub classifier: String,
    /// Weight vector with the bias last.
    pub coefficients: Vec<f64>,
    /// Two points spanning the scatter range on the line w1 x + w2 y + b = 0.
    pub endpoints: Vec<[f64; 2]>,
}

/// 2-D scatter of one validation domain (first two features plus label).
#[derive(Debug, Clone)]
pub struct ScatterSet {
    pub domain: String,
    /// Rows of (x, y, label-as-integer).
    pub points: Vec<(f64, f64, i64)>,
}

/// Wall-clock diagnostics; excluded from emitted result files so identical
/// runs stay bit-identical.
#[derive(Debug, Clone)]
pub struct CellTiming {
    pub cell: String,
    pub seconds: f64,
}

/// Everything the harness knows about one experiment run. The config
/// snapshot plus the seed reproduce the run bit-identically within a build.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigSnapshot {
    pub experiment: String,
    pub seed: u64,
    pub validation_n: usize,
    pub train: TrainConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_path: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub id: String,
    pub config: ConfigSnapshot,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<ErrorCell>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub disagreements: Vec<DisagreementCell>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub curve: Vec<CurveCell>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub perturbation: Vec<PerturbCell>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub theta: Vec<ThetaCell>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub boundary: Vec<ClassifierCoefficients>,
    #[serde(skip)]
    pub scatters: Vec<ScatterSet>,
    #[serde(skip)]
    pub timings: Vec<CellTiming>,
}

impl ExperimentResult {
    fn empty(id: &str, config: ConfigSnapshot) -> Self {
        ExperimentResult {
            id: id.to_string(),
            config,
            errors: Vec::new(),
            disagreements: Vec::new(),
            curve: Vec::new(),
            perturbation: Vec::new(),
            theta: Vec::new(),
            boundary: Vec::new(),
            scatters: Vec::new(),
            timings: Vec::new(),
        }
    }

    /// True when the run produced no reportable cells at all.
    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
            && self.disagreements.is_empty()
            && self.curve.is_empty()
            && self.perturbation.is_empty()
            && self.theta.is_empty()
            && self.boundary.is_empty()
            && self.scatters.is_empty()
    }
}

/// Error rate of a model on a labeled dataset.
pub(crate) fn evaluate(model: &LinearModel, data: &Dataset) -> Result<f64> {
    let truth = data
        .labels()
        .ok_or_else(|| Error::Data("cannot score an unlabeled dataset".into()))?;
    error_rate(&model.predict(data)?, truth)
}

/// Adapted quadratic fit, dispatching on the label kind.
pub(crate) fn fit_quadratic_adapted(
    source: &Dataset,
    transfer: &DropoutTransfer,
    config: &TrainConfig,
) -> Result<LinearModel> {
    match source.labels() {
        Some(Labels::Binary(_)) => fit_flda_q(source, transfer, config),
        Some(Labels::Multiclass { .. }) => fit_flda_q_multiclass(source, transfer, config),
        None => Err(Error::Data("source has no labels".into())),
    }
}

/// The six boundary-experiment classifiers in reporting order.
pub(crate) fn fit_all_six(
    source: &Dataset,
    target: &Dataset,
    transfer: &DropoutTransfer,
    config: &TrainConfig,
) -> Result<Vec<(&'static str, LinearModel)>> {
    Ok(vec![
        (names::S_LS, fit_ls(source, config)?),
        (names::T_LS, fit_ls(target, config)?),
        (names::FLDA_Q, fit_quadratic_adapted(source, transfer, config)?),
        (names::S_LR, fit_lr(source, config)?),
        (names::T_LR, fit_lr(target, config)?),
        (names::FLDA_L, fit_flda_l(source, transfer, config)?),
    ])
}

/// Estimate the dropout transfer for a (source, target) pair.
pub(crate) fn estimate_transfer(source: &Dataset, target: &Dataset) -> Result<DropoutTransfer> {
    let sm = crate::transfer::SourceModel::estimate(source)?;
    DropoutTransfer::estimate(&sm, target)
}

/// Decision-line endpoints across the scatter's horizontal range; vertical
/// boundaries are emitted over the vertical range instead.
pub(crate) fn boundary_line(
    classifier: &str,
    weights: &[f64],
    scatter: &ScatterSet,
) -> ClassifierCoefficients {
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y, _) in &scatter.points {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let [w1, w2, b] = [weights[0], weights[1], weights[2]];
    let endpoints = if w2.abs() > 1e-12 * w1.abs().max(1e-300) {
        vec![
            [xmin, -(b + w1 * xmin) / w2],
            [xmax, -(b + w1 * xmax) / w2],
        ]
    } else if w1 != 0.0 {
        vec![[-b / w1, ymin], [-b / w1, ymax]]
    } else {
        Vec::new()
    };
    ClassifierCoefficients {
        classifier: classifier.to_string(),
        coefficients: weights.to_vec(),
        endpoints,
    }
}

/// Scatter of the first two features of a labeled dataset.
pub(crate) fn scatter_of(domain: &str, data: &Dataset) -> Result<ScatterSet> {
    let labels = data
        .labels()
        .ok_or_else(|| Error::Data("scatter needs labels".into()))?;
    let x = data.dense_features();
    let points = (0..data.n())
        .map(|i| {
            let label = match labels {
                Labels::Binary(v) => i64::from(v[i]),
                Labels::Multiclass { ids, .. } => ids[i] as i64,
            };
            (x[(i, 0)], x[(i, 1)], label)
        })
        .collect();
    Ok(ScatterSet { domain: domain.to_string(), points })
}
