//! Dropout transfer model between a source and a target domain.
//!
//! The source model is a product of independent Bernoullis over dichotomized
//! features (eta = per-feature non-zero frequency). The transfer model drops
//! feature d with probability theta_d and scales survivors by 1/(1-theta_d),
//! which keeps the conditional mean at the source sample. Composing the two
//! gives a Bernoulli marginal over dichotomized target features with success
//! probability (1-theta_d)*eta_d, whose maximizer has the closed form
//! `theta_d = max(0, 1 - zeta_d / eta_d)`.

use ndarray::{Array1, ArrayView1};
use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Upper clamp distance for dropout rates, keeping theta/(1-theta) finite.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Per-feature Bernoulli success probabilities of non-zero source values.
#[derive(Debug, Clone)]
pub struct SourceModel {
    eta: Array1<f64>,
}

impl SourceModel {
    /// Maximum likelihood fit: eta_d is the source non-zero frequency.
    pub fn estimate(source: &Dataset) -> Result<Self> {
        let freq = source.nonzero_frequencies().map_err(|_| {
            Error::Data("cannot estimate a source model from an empty dataset".into())
        })?;
        Ok(SourceModel { eta: freq.freq })
    }

    pub fn from_eta(eta: Array1<f64>) -> Result<Self> {
        if let Some(&bad) = eta.iter().find(|&&e| !(0.0..=1.0).contains(&e)) {
            return Err(Error::Data(format!("eta value {bad} outside [0, 1]")));
        }
        Ok(SourceModel { eta })
    }

    pub fn eta(&self) -> ArrayView1<'_, f64> {
        self.eta.view()
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }
}

/// Per-feature dropout rates with the clamp constant they were built with.
#[derive(Debug, Clone)]
pub struct DropoutTransfer {
    theta: Array1<f64>,
    epsilon: f64,
}

/// Conditional mean and diagonal variance of the transfer distribution
/// given one source sample.
#[derive(Debug, Clone)]
pub struct TransferMoments {
    /// Equals the conditioning sample (the transfer is unbiased).
    pub mean: Array1<f64>,
    /// `var_diag[d] = theta_d/(1-theta_d) * x_d^2`.
    pub var_diag: Array1<f64>,
}

impl DropoutTransfer {
    /// Closed-form maximum likelihood estimate against a target sample.
    ///
    /// Features absent from the source (eta_d = 0) get theta_d = 0: the
    /// likelihood is constant in theta_d there. Features absent from the
    /// target but present in the source clamp to 1 - epsilon.
    pub fn estimate(source_model: &SourceModel, target: &Dataset) -> Result<Self> {
        Self::estimate_with_epsilon(source_model, target, DEFAULT_EPSILON)
    }

    pub fn estimate_with_epsilon(
        source_model: &SourceModel,
        target: &Dataset,
        epsilon: f64,
    ) -> Result<Self> {
        if target.m() != source_model.dim() {
            return Err(Error::Dimension { expected: source_model.dim(), got: target.m() });
        }
        let zeta = target
            .nonzero_frequencies()
            .map_err(|_| Error::Data("cannot estimate dropout from an empty target".into()))?
            .freq;
        let theta = source_model
            .eta()
            .iter()
            .zip(zeta.iter())
            .map(|(&eta, &z)| {
                if eta == 0.0 {
                    0.0
                } else {
                    (1.0 - z / eta).max(0.0).min(1.0 - epsilon)
                }
            })
            .collect();
        Ok(DropoutTransfer { theta, epsilon })
    }

    /// Build directly from rates in [0, 1); rates above 1-epsilon clamp.
    pub fn from_theta(theta: Array1<f64>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon {epsilon} outside (0, 1)")));
        }
        if let Some(&bad) = theta.iter().find(|&&t| !(0.0..=1.0).contains(&t)) {
            return Err(Error::Data(format!("dropout rate {bad} outside [0, 1]")));
        }
        let theta = theta.mapv(|t| t.min(1.0 - epsilon));
        Ok(DropoutTransfer { theta, epsilon })
    }

    /// A transfer with all rates zero (identity transfer).
    pub fn zero(dim: usize) -> Self {
        DropoutTransfer { theta: Array1::zeros(dim), epsilon: DEFAULT_EPSILON }
    }

    pub fn theta(&self) -> ArrayView1<'_, f64> {
        self.theta.view()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// Per-feature variance factors theta/(1-theta), finite by the clamp.
    pub fn variance_factors(&self) -> Array1<f64> {
        self.theta.mapv(|t| t / (1.0 - t))
    }

    /// Copy with `delta` added to the rate of one feature. Errors if the
    /// perturbed rate leaves [0, 1-epsilon].
    pub fn perturbed(&self, feature: usize, delta: f64) -> Result<Self> {
        if feature >= self.dim() {
            return Err(Error::Config(format!("feature {feature} out of range")));
        }
        let v = self.theta[feature] + delta;
        if !(0.0..=1.0 - self.epsilon).contains(&v) {
            return Err(Error::Config(format!(
                "perturbed rate {v} outside [0, {}]",
                1.0 - self.epsilon
            )));
        }
        let mut theta = self.theta.clone();
        theta[feature] = v;
        Ok(DropoutTransfer { theta, epsilon: self.epsilon })
    }

    /// Conditional moments given one source sample.
    pub fn moments(&self, x: ArrayView1<'_, f64>) -> Result<TransferMoments> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: x.len() });
        }
        let factors = self.variance_factors();
        let var_diag = ndarray::Zip::from(&factors)
            .and(&x)
            .map_collect(|&v, &xd| v * xd * xd);
        Ok(TransferMoments { mean: x.to_owned(), var_diag })
    }

    /// Draw one target sample: each feature drops to 0 with probability
    /// theta_d, otherwise keeps x_d / (1 - theta_d).
    pub fn sample<R: Rng + ?Sized>(&self, x: ArrayView1<'_, f64>, rng: &mut R) -> Array1<f64> {
        ndarray::Zip::from(&self.theta)
            .and(&x)
            .map_collect(|&t, &xd| {
                if rng.random::<f64>() < t {
                    0.0
                } else {
                    xd / (1.0 - t)
                }
            })
    }

    /// Marginal probability that target feature d is non-zero: (1-theta_d)*eta_d.
    pub fn marginal_nonzero_prob(&self, source_model: &SourceModel, d: usize) -> f64 {
        (1.0 - self.theta[d]) * source_model.eta()[d]
    }

    /// Complement of [`Self::marginal_nonzero_prob`], computed as 1 - p so the
    /// two sum to 1 exactly.
    pub fn marginal_zero_prob(&self, source_model: &SourceModel, d: usize) -> f64 {
        1.0 - self.marginal_nonzero_prob(source_model, d)
    }

    /// Plain-text table: one `feature<TAB>theta` line per feature.
    pub fn to_table_string(&self, names: Option<&[String]>) -> String {
        let mut out = String::from("# feature\ttheta\n");
        for (d, &t) in self.theta.iter().enumerate() {
            let name = names
                .and_then(|n| n.get(d).cloned())
                .unwrap_or_else(|| d.to_string());
            out.push_str(&format!("{name}\t{t}\n"));
        }
        out
    }
}

/// Log-likelihood of the target data under the compound marginal:
/// per feature, non-zero values have probability (1-theta_d)*eta_d.
///
/// A non-zero target value at a feature with (1-theta_d)*eta_d = 0 has
/// probability zero under the model and is reported as an error.
pub fn target_marginal_loglik(
    transfer: &DropoutTransfer,
    source_model: &SourceModel,
    target: &Dataset,
) -> Result<f64> {
    if source_model.dim() != transfer.dim() {
        return Err(Error::Dimension { expected: transfer.dim(), got: source_model.dim() });
    }
    if target.m() != transfer.dim() {
        return Err(Error::Dimension { expected: transfer.dim(), got: target.m() });
    }
    let n = target.n();
    if n == 0 {
        return Err(Error::Data("empty target dataset".into()));
    }
    let counts = target.nonzero_counts();
    let mut loglik = 0.0;
    for (d, &c) in counts.iter().enumerate() {
        let p = transfer.marginal_nonzero_prob(source_model, d);
        let q = transfer.marginal_zero_prob(source_model, d);
        if c > 0 && p == 0.0 {
            return Err(Error::Data(format!(
                "target observation impossible under model: feature {d} is non-zero \
                 in the target but has zero marginal probability"
            )));
        }
        if c < n && q == 0.0 {
            return Err(Error::Data(format!(
                "target observation impossible under model: feature {d} is zero \
                 in the target but has zero marginal probability of being zero"
            )));
        }
        if c > 0 {
            loglik += c as f64 * p.ln();
        }
        if c < n {
            loglik += (n - c) as f64 * q.ln();
        }
    }
    Ok(loglik)
}
