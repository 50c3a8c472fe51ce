//! Linear classifiers under quadratic and Taylor-approximated logistic
//! losses, with and without a dropout transfer model.

mod descent;
mod logistic;
mod model;
mod quadratic;
mod softmax;

pub use descent::{minimize, DescentReport, Objective, TrainConfig};
pub use logistic::{
    expected_logistic_risk_taylor, fit_flda_l, fit_lr, grad_logistic_taylor,
    logistic_grad_taylor_general, logistic_risk_taylor_general,
};
pub use model::{disagreement, error_rate, LinearModel, LossKind, ModelWeights, TrainMeta};
pub use quadratic::{
    expected_quadratic_risk, fit_flda_q, fit_flda_q_multiclass, fit_ls,
    quadratic_risk_gradient,
};
pub use softmax::{
    fit_flda_l_multiclass, multiclass_grad, multiclass_grad_general, multiclass_risk_taylor,
    multiclass_risk_taylor_general,
};

use ndarray::Array2;

use crate::data::Dataset;

/// Bias-appended design matrix: the features with a trailing column of ones.
pub(crate) fn design_matrix(data: &Dataset) -> Array2<f64> {
    let x = data.dense_features();
    let (n, m) = (x.nrows(), x.ncols());
    let mut a = Array2::ones((n, m + 1));
    a.slice_mut(ndarray::s![.., ..m]).assign(&x);
    a
}

/// Numerically safe pieces shared by the logistic-loss objectives.
pub(crate) mod math {
    /// log(exp(a) + exp(-a)), the binary log-partition, overflow-safe.
    pub fn log_partition_binary(a: f64) -> f64 {
        a.abs() + (-2.0 * a.abs()).exp().ln_1p()
    }

    pub fn sigmoid(t: f64) -> f64 {
        if t >= 0.0 {
            1.0 / (1.0 + (-t).exp())
        } else {
            let e = t.exp();
            e / (1.0 + e)
        }
    }

    /// sigma(2a) * sigma(-2a), the curvature weight of the Taylor term.
    pub fn sigma_pair(a: f64) -> f64 {
        sigmoid(2.0 * a) * sigmoid(-2.0 * a)
    }
}
