//! Feature-level domain adaptation with dropout transfer models.
//!
//! The pipeline: estimate per-feature non-zero frequencies on a labeled
//! source dataset and an unlabeled target dataset, fit a per-feature dropout
//! transfer model between them in closed form, then train linear classifiers
//! that minimize the expected loss under that transfer — a closed-form
//! solution for the quadratic loss and gradient descent on a Taylor-
//! approximated risk for the logistic loss (binary and multiclass).
//!
//! Modules:
//! - [`data`]: dataset storage, file ingestion, splits, subsampling
//! - [`transfer`]: source frequency model, dropout transfer, likelihood,
//!   moments, sampling
//! - [`classify`]: adapted and naive classifiers, prediction, scoring
//! - [`synthetic`]: class-conditional Bernoulli/Poisson generators
//! - [`experiments`]: benchmark harness and result emission

pub mod classify;
pub mod data;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod synthetic;
pub mod transfer;

pub use classify::{
    error_rate, expected_logistic_risk_taylor, expected_quadratic_risk, fit_flda_l,
    fit_flda_l_multiclass, fit_flda_q, fit_flda_q_multiclass, fit_lr, fit_ls,
    grad_logistic_taylor, multiclass_grad, multiclass_risk_taylor, quadratic_risk_gradient,
    LinearModel, LossKind, ModelWeights, TrainConfig, TrainMeta,
};
pub use data::{load_delimited, load_sparse_indexed, Dataset, DelimitedOptions, Labels};
pub use error::{Error, Result};
pub use synthetic::{generate_source, generate_target, Family, SyntheticSpec};
pub use transfer::{
    target_marginal_loglik, DropoutTransfer, SourceModel, TransferMoments, DEFAULT_EPSILON,
};
