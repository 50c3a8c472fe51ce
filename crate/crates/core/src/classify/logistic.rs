//! Binary logistic loss under a transfer model, approximated by a
//! second-order Taylor expansion of the log-partition function around the
//! uncorrupted score.
//!
//! For the unbiased dropout transfer the expansion's first-order term
//! vanishes and the risk becomes
//! `mean_i[ -y_i a_i + log(e^{a_i} + e^{-a_i})
//!          + sigma(-2a_i) sigma(2a_i) w'V_i w ]`
//! with `a_i = w'x_i` and `V_i` the per-sample diagonal transfer variance.
//! The general-transfer form (per-sample means differing from the inputs)
//! is kept alongside and checked by finite differences.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::data::{Dataset, Labels};
use crate::error::{Error, Result};
use crate::transfer::DropoutTransfer;

use super::descent::{minimize, Objective, TrainConfig};
use super::math::{log_partition_binary, sigma_pair};
use super::model::{LinearModel, LossKind, ModelWeights, TrainMeta};
use super::{design_matrix, softmax};

/// Precomputed pieces of the dropout Taylor objective.
pub(crate) struct BinaryTaylorProblem {
    design: Array2<f64>,     // n x (m+1), bias column last
    design_sq: Array2<f64>,  // elementwise square of `design`
    targets: Array1<f64>,    // +/-1
    var_factors: Array1<f64>, // theta/(1-theta) with 0 for the bias
    l2: f64,
}

impl BinaryTaylorProblem {
    pub(crate) fn new(source: &Dataset, transfer: &DropoutTransfer, l2: f64) -> Result<Self> {
        if source.m() != transfer.dim() {
            return Err(Error::Dimension { expected: transfer.dim(), got: source.m() });
        }
        let targets = source.binary_targets()?;
        if targets.is_empty() {
            return Err(Error::Data("empty training set".into()));
        }
        let design = design_matrix(source);
        let design_sq = design.mapv(|v| v * v);
        let v = transfer.variance_factors();
        let mut var_factors = Array1::zeros(v.len() + 1);
        var_factors.slice_mut(ndarray::s![..v.len()]).assign(&v);
        Ok(BinaryTaylorProblem { design, design_sq, targets, var_factors, l2 })
    }

    fn penalty(&self, w: &Array1<f64>) -> f64 {
        if self.l2 == 0.0 {
            return 0.0;
        }
        let m = w.len() - 1;
        self.l2 * w.slice(ndarray::s![..m]).mapv(|v| v * v).sum()
    }

    fn penalty_grad(&self, w: &Array1<f64>, grad: &mut Array1<f64>) {
        if self.l2 == 0.0 {
            return;
        }
        let m = w.len() - 1;
        for d in 0..m {
            grad[d] += 2.0 * self.l2 * w[d];
        }
    }
}

/// Shared per-sample pieces, all derived from one exponential:
/// with u = exp(-2|a|), the log-partition is |a| + ln(1+u), tanh(a) is
/// sign(a)(1-u)/(1+u), and sigma(2a)sigma(-2a) is u/(1+u)^2.
#[inline]
fn partition_tanh_pair(a: f64) -> (f64, f64, f64) {
    let abs = a.abs();
    let u = (-2.0 * abs).exp();
    let denom = 1.0 + u;
    let lse = abs + u.ln_1p();
    let tanh = (1.0 - u) / denom * a.signum();
    let pair = u / (denom * denom);
    (lse, tanh, pair)
}

impl Objective for BinaryTaylorProblem {
    fn value(&self, w: &Array1<f64>) -> f64 {
        let n = self.targets.len() as f64;
        let scores = self.design.dot(w);
        let scaled_sq = &self.var_factors * &w.mapv(|v| v * v);
        let var_terms = self.design_sq.dot(&scaled_sq);
        let mut total = 0.0;
        for ((&a, &y), &s) in scores.iter().zip(self.targets.iter()).zip(var_terms.iter()) {
            let (lse, _, pair) = partition_tanh_pair(a);
            total += -y * a + lse + pair * s;
        }
        total / n + self.penalty(w)
    }

    fn value_grad(&self, w: &Array1<f64>) -> (f64, Array1<f64>) {
        let n = self.targets.len() as f64;
        let scores = self.design.dot(w);
        let scaled_sq = &self.var_factors * &w.mapv(|v| v * v);
        let var_terms = self.design_sq.dot(&scaled_sq);

        let mut total = 0.0;
        let mut sample_coeff = Array1::zeros(self.targets.len());
        let mut curvature = Array1::zeros(self.targets.len());
        for i in 0..self.targets.len() {
            let a = scores[i];
            let (lse, t, q) = partition_tanh_pair(a);
            total += -self.targets[i] * a + lse + q * var_terms[i];
            // d/da of sigma(2a)sigma(-2a) is -2 q tanh(a)
            sample_coeff[i] = t - self.targets[i] - 2.0 * q * t * var_terms[i];
            curvature[i] = q;
        }
        let mut grad = self.design.t().dot(&sample_coeff);
        let weighted = self.design_sq.t().dot(&curvature);
        for d in 0..grad.len() {
            grad[d] += 2.0 * weighted[d] * self.var_factors[d] * w[d];
        }
        grad /= n;
        self.penalty_grad(w, &mut grad);
        (total / n + self.penalty(w), grad)
    }
}

/// Taylor-approximated expected logistic risk of `w` (bias last) under the
/// dropout transfer, averaged over the source samples.
pub fn expected_logistic_risk_taylor(
    w: ArrayView1<'_, f64>,
    source: &Dataset,
    transfer: &DropoutTransfer,
) -> Result<f64> {
    let problem = BinaryTaylorProblem::new(source, transfer, 0.0)?;
    if w.len() != source.m() + 1 {
        return Err(Error::Dimension { expected: source.m() + 1, got: w.len() });
    }
    Ok(problem.value(&w.to_owned()))
}

/// Analytic gradient of [`expected_logistic_risk_taylor`].
pub fn grad_logistic_taylor(
    w: ArrayView1<'_, f64>,
    source: &Dataset,
    transfer: &DropoutTransfer,
) -> Result<Array1<f64>> {
    let problem = BinaryTaylorProblem::new(source, transfer, 0.0)?;
    if w.len() != source.m() + 1 {
        return Err(Error::Dimension { expected: source.m() + 1, got: w.len() });
    }
    Ok(problem.value_grad(&w.to_owned()).1)
}

fn check_general_shapes(
    w: ArrayView1<'_, f64>,
    design: ArrayView2<'_, f64>,
    targets: ArrayView1<'_, f64>,
    means: ArrayView2<'_, f64>,
    var_diags: ArrayView2<'_, f64>,
) -> Result<()> {
    if design.nrows() == 0 {
        return Err(Error::Data("empty design matrix".into()));
    }
    if w.len() != design.ncols() {
        return Err(Error::Dimension { expected: design.ncols(), got: w.len() });
    }
    if targets.len() != design.nrows() {
        return Err(Error::Dimension { expected: design.nrows(), got: targets.len() });
    }
    if means.dim() != design.dim() || var_diags.dim() != design.dim() {
        return Err(Error::Data("moment matrices must match the design shape".into()));
    }
    Ok(())
}

/// Taylor risk for an arbitrary unbiased-or-not transfer: per-sample means
/// and diagonal variances are given explicitly. The expansion is around the
/// uncorrupted score `a_i = w'x_i`, so a mean shift contributes both a
/// first-order term and a rank-one addition to the quadratic term.
pub fn logistic_risk_taylor_general(
    w: ArrayView1<'_, f64>,
    design: ArrayView2<'_, f64>,
    targets: ArrayView1<'_, f64>,
    means: ArrayView2<'_, f64>,
    var_diags: ArrayView2<'_, f64>,
) -> Result<f64> {
    check_general_shapes(w, design, targets, means, var_diags)?;
    let n = design.nrows();
    let mut total = 0.0;
    for i in 0..n {
        let x = design.row(i);
        let mu = means.row(i);
        let s2 = var_diags.row(i);
        let a = x.dot(&w);
        let b = mu.dot(&w);
        let shift = b - a; // w'(mu - x)
        let spread: f64 = s2
            .iter()
            .zip(w.iter())
            .map(|(&v, &wd)| v * wd * wd)
            .sum::<f64>()
            + shift * shift;
        total +=
            -targets[i] * b + log_partition_binary(a) + a.tanh() * shift + sigma_pair(a) * spread;
    }
    Ok(total / n as f64)
}

/// Analytic gradient of [`logistic_risk_taylor_general`].
pub fn logistic_grad_taylor_general(
    w: ArrayView1<'_, f64>,
    design: ArrayView2<'_, f64>,
    targets: ArrayView1<'_, f64>,
    means: ArrayView2<'_, f64>,
    var_diags: ArrayView2<'_, f64>,
) -> Result<Array1<f64>> {
    check_general_shapes(w, design, targets, means, var_diags)?;
    let n = design.nrows();
    let mut grad = Array1::zeros(w.len());
    for i in 0..n {
        let x = design.row(i);
        let mu = means.row(i);
        let s2 = var_diags.row(i);
        let a = x.dot(&w);
        let b = mu.dot(&w);
        let shift = b - a;
        let t = a.tanh();
        let q = sigma_pair(a);
        let spread: f64 = s2
            .iter()
            .zip(w.iter())
            .map(|(&v, &wd)| v * wd * wd)
            .sum::<f64>()
            + shift * shift;
        let score_coeff = t + (1.0 - t * t) * shift - 2.0 * q * t * spread;
        for d in 0..w.len() {
            let delta = mu[d] - x[d];
            grad[d] += -targets[i] * mu[d]
                + score_coeff * x[d]
                + t * delta
                + 2.0 * q * (s2[d] * w[d] + shift * delta);
        }
    }
    Ok(grad / n as f64)
}

/// Transfer-adapted logistic fit by gradient descent from zero weights.
/// Dispatches to the softmax objective for multiclass labels.
pub fn fit_flda_l(
    source: &Dataset,
    transfer: &DropoutTransfer,
    config: &TrainConfig,
) -> Result<LinearModel> {
    config.validate()?;
    match source.labels() {
        Some(Labels::Binary(_)) => {
            let problem = BinaryTaylorProblem::new(source, transfer, config.l2)?;
            let (w, report) = minimize(&problem, Array1::zeros(source.m() + 1), config)?;
            LinearModel::new(
                ModelWeights::Binary(w),
                LossKind::Logistic,
                true,
                TrainMeta { iterations: report.iterations, grad_norm: report.grad_norm, seed: None },
            )
        }
        Some(Labels::Multiclass { .. }) => {
            softmax::fit_flda_l_multiclass(source, transfer, config)
        }
        None => Err(Error::Data("source has no labels".into())),
    }
}

/// Naive l2-regularized logistic regression (binary or multiclass softmax):
/// the adapted fit with a zero transfer.
pub fn fit_lr(data: &Dataset, config: &TrainConfig) -> Result<LinearModel> {
    let zero = DropoutTransfer::zero(data.m());
    let mut model = fit_flda_l(data, &zero, config)?;
    model = LinearModel::new(
        model.weights().clone(),
        LossKind::Logistic,
        false,
        model.meta().clone(),
    )?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::DEFAULT_EPSILON;
    use ndarray::array;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn binary_dataset(x: Array2<f64>, y: Vec<i8>) -> Dataset {
        Dataset::from_dense(x, Some(Labels::Binary(y))).unwrap()
    }

    #[test]
    fn risk_at_zero_is_log_two() {
        let ds = binary_dataset(array![[1.0, 2.0], [3.0, -1.0], [0.5, 0.5]], vec![1, -1, 1]);
        let tr = DropoutTransfer::from_theta(array![0.4, 0.1], DEFAULT_EPSILON).unwrap();
        let r = expected_logistic_risk_taylor(Array1::zeros(3).view(), &ds, &tr).unwrap();
        assert!((r - 2f64.ln()).abs() < 1e-15, "risk {r}");
    }

    #[test]
    fn risk_hand_case_single_sample() {
        // x = [1], y = +1, theta = 0.5, w = [1, 0]
        let ds = binary_dataset(array![[1.0]], vec![1]);
        let tr = DropoutTransfer::from_theta(array![0.5], DEFAULT_EPSILON).unwrap();
        let r = expected_logistic_risk_taylor(array![1.0, 0.0].view(), &ds, &tr).unwrap();
        let expect = -1.0 + (1f64.exp() + (-1f64).exp()).ln() + sigma_pair(1.0);
        assert!((r - expect).abs() < 1e-12, "risk {r} vs {expect}");
    }

    #[test]
    fn zero_transfer_reduces_to_plain_logistic_loss() {
        let ds = binary_dataset(array![[1.0, 0.5], [2.0, -1.0]], vec![1, -1]);
        let tr = DropoutTransfer::zero(2);
        let w = array![0.3, -0.2, 0.1];
        let r = expected_logistic_risk_taylor(w.view(), &ds, &tr).unwrap();
        let mut expect = 0.0;
        for (x, y) in [([1.0, 0.5], 1.0), ([2.0, -1.0], -1.0)] {
            let a: f64 = x[0] * w[0] + x[1] * w[1] + w[2];
            expect += -y * a + (a.exp() + (-a).exp()).ln();
        }
        expect /= 2.0;
        assert!((r - expect).abs() < 1e-12);
    }

    #[test]
    fn gradient_at_zero_matches_plain_logistic_gradient() {
        let ds = binary_dataset(array![[1.0, 2.0], [0.0, 1.0], [2.0, 0.0]], vec![1, -1, -1]);
        let tr = DropoutTransfer::from_theta(array![0.6, 0.3], DEFAULT_EPSILON).unwrap();
        let g = grad_logistic_taylor(Array1::zeros(3).view(), &ds, &tr).unwrap();
        // at w = 0 the variance term is quadratic, so only the score term remains
        let a = design_matrix(&ds);
        let y = ds.binary_targets().unwrap();
        let plain = a.t().dot(&y.mapv(|v| -v)) / 3.0;
        for (gi, pi) in g.iter().zip(plain.iter()) {
            assert!((gi - pi).abs() < 1e-14);
        }
    }

    fn central_difference<F: Fn(&Array1<f64>) -> f64>(
        f: &F,
        w: &Array1<f64>,
        step: f64,
    ) -> Array1<f64> {
        let mut g = Array1::zeros(w.len());
        for d in 0..w.len() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[d] += step;
            wm[d] -= step;
            g[d] = (f(&wp) - f(&wm)) / (2.0 * step);
        }
        g
    }

    #[test]
    fn dropout_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = Array2::from_shape_fn((5, 3), |_| rng.random::<f64>() * 4.0 - 1.0);
        let y: Vec<i8> = (0..5).map(|_| if rng.random::<f64>() < 0.5 { 1 } else { -1 }).collect();
        let ds = binary_dataset(x, y);
        let theta = Array1::from_shape_fn(3, |_| rng.random::<f64>() * 0.9);
        let tr = DropoutTransfer::from_theta(theta, DEFAULT_EPSILON).unwrap();
        let w = Array1::from_shape_fn(4, |_| rng.random::<f64>() - 0.5);

        let analytic = grad_logistic_taylor(w.view(), &ds, &tr).unwrap();
        let numeric = central_difference(
            &|wv: &Array1<f64>| expected_logistic_risk_taylor(wv.view(), &ds, &tr).unwrap(),
            &w,
            1e-5,
        );
        let scale = numeric.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for d in 0..4 {
            assert!(
                (analytic[d] - numeric[d]).abs() <= 1e-5 * scale,
                "component {d}: {} vs {}",
                analytic[d],
                numeric[d]
            );
        }
    }

    #[test]
    fn general_form_agrees_with_dropout_form_when_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((6, 2), |_| rng.random::<f64>() * 3.0);
        let y: Vec<i8> = (0..6).map(|_| if rng.random::<f64>() < 0.5 { 1 } else { -1 }).collect();
        let ds = binary_dataset(x, y);
        let theta = array![0.5, 0.2];
        let tr = DropoutTransfer::from_theta(theta, DEFAULT_EPSILON).unwrap();
        let w = Array1::from_shape_fn(3, |_| rng.random::<f64>() - 0.5);

        let design = design_matrix(&ds);
        let means = design.clone();
        let v = tr.variance_factors();
        let mut var_diags = Array2::zeros(design.dim());
        for i in 0..design.nrows() {
            for d in 0..2 {
                var_diags[(i, d)] = v[d] * design[(i, d)] * design[(i, d)];
            }
        }
        let targets = ds.binary_targets().unwrap();

        let fast = expected_logistic_risk_taylor(w.view(), &ds, &tr).unwrap();
        let general = logistic_risk_taylor_general(
            w.view(),
            design.view(),
            targets.view(),
            means.view(),
            var_diags.view(),
        )
        .unwrap();
        assert!((fast - general).abs() < 1e-13, "{fast} vs {general}");

        let gf = grad_logistic_taylor(w.view(), &ds, &tr).unwrap();
        let gg = logistic_grad_taylor_general(
            w.view(),
            design.view(),
            targets.view(),
            means.view(),
            var_diags.view(),
        )
        .unwrap();
        for (a, b) in gf.iter().zip(gg.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn general_gradient_with_mean_shift_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 4;
        let p = 3;
        let design = Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * 2.0 - 1.0);
        let targets =
            Array1::from_shape_fn(n, |_| if rng.random::<f64>() < 0.5 { 1.0 } else { -1.0 });
        // biased transfer: means differ from the design
        let means = &design + &Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * 0.5);
        let var_diags = Array2::from_shape_fn((n, p), |_| rng.random::<f64>());
        let w = Array1::from_shape_fn(p, |_| rng.random::<f64>() - 0.5);

        let analytic = logistic_grad_taylor_general(
            w.view(),
            design.view(),
            targets.view(),
            means.view(),
            var_diags.view(),
        )
        .unwrap();
        let numeric = central_difference(
            &|wv: &Array1<f64>| {
                logistic_risk_taylor_general(
                    wv.view(),
                    design.view(),
                    targets.view(),
                    means.view(),
                    var_diags.view(),
                )
                .unwrap()
            },
            &w,
            1e-5,
        );
        let scale = numeric.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for d in 0..p {
            assert!(
                (analytic[d] - numeric[d]).abs() <= 1e-5 * scale,
                "component {d}: {} vs {}",
                analytic[d],
                numeric[d]
            );
        }
    }

    #[test]
    fn converged_fit_is_stable_under_more_iterations() {
        // overlapping classes so the minimizer is finite
        let ds = binary_dataset(
            array![
                [0.2, 0.1],
                [0.5, 0.3],
                [1.5, 1.2],
                [0.4, 1.1],
                [1.1, 0.2],
                [1.3, 1.4],
                [0.8, 0.7],
                [0.9, 0.8]
            ],
            vec![1, 1, 1, -1, -1, -1, 1, -1],
        );
        let tr = DropoutTransfer::from_theta(array![0.3, 0.0], DEFAULT_EPSILON).unwrap();
        let cfg = TrainConfig::default();
        let first = fit_flda_l(&ds, &tr, &cfg).unwrap();
        assert!(first.meta().grad_norm <= cfg.grad_tol, "fit did not converge");
        let doubled = TrainConfig { max_iter: cfg.max_iter * 2, ..cfg };
        let second = fit_flda_l(&ds, &tr, &doubled).unwrap();
        for (a, b) in first
            .binary_weights()
            .unwrap()
            .iter()
            .zip(second.binary_weights().unwrap().iter())
        {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn non_finite_data_is_reported() {
        let ds = binary_dataset(array![[f64::MAX], [1.0]], vec![1, -1]);
        let tr = DropoutTransfer::from_theta(array![0.9], DEFAULT_EPSILON).unwrap();
        // f64::MAX squared overflows in the variance term at any non-zero weight;
        // descent either converges harmlessly at w=0 or reports non-finite risk
        let result = fit_flda_l(&ds, &tr, &TrainConfig::default());
        if let Err(e) = result {
            assert!(matches!(e, Error::Numeric(_)));
        }
    }

    #[test]
    fn fit_lr_is_marked_naive() {
        let ds = binary_dataset(array![[1.0], [2.0], [0.0]], vec![1, -1, 1]);
        let model = fit_lr(&ds, &TrainConfig::default()).unwrap();
        assert!(!model.adapted());
        assert_eq!(model.loss(), LossKind::Logistic);
    }
}
