//! Multiclass logistic loss with a (m+1) x K weight matrix, one-hot labels,
//! and the same second-order Taylor treatment of the log-partition as the
//! binary case. The expansion keeps the diagonal of the softmax Hessian,
//! giving per-class curvature weights p_k (1 - p_k).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::data::{Dataset, Labels};
use crate::error::{Error, Result};
use crate::transfer::DropoutTransfer;

use super::descent::{minimize, Objective, TrainConfig};
use super::design_matrix;
use super::model::{LinearModel, LossKind, ModelWeights, TrainMeta};

fn stable_row_softmax(scores: ArrayView1<'_, f64>) -> (f64, Array1<f64>) {
    let amax = scores.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let mut sum = 0.0;
    let mut probs = Array1::zeros(scores.len());
    for (p, &a) in probs.iter_mut().zip(scores.iter()) {
        *p = (a - amax).exp();
        sum += *p;
    }
    let lse = sum.ln() + amax;
    probs /= sum;
    (lse, probs)
}

pub(crate) struct SoftmaxTaylorProblem {
    design: Array2<f64>,
    design_sq: Array2<f64>,
    class_ids: Vec<usize>,
    classes: usize,
    var_factors: Array1<f64>,
    l2: f64,
}

impl SoftmaxTaylorProblem {
    pub(crate) fn new(source: &Dataset, transfer: &DropoutTransfer, l2: f64) -> Result<Self> {
        if source.m() != transfer.dim() {
            return Err(Error::Dimension { expected: transfer.dim(), got: source.m() });
        }
        let (class_ids, classes) = match source.labels() {
            Some(Labels::Multiclass { ids, classes }) => (ids.clone(), *classes),
            Some(Labels::Binary(_)) => {
                return Err(Error::Data("softmax objective expects multiclass labels".into()))
            }
            None => return Err(Error::Data("source has no labels".into())),
        };
        if classes < 2 {
            return Err(Error::Data("multiclass training needs at least 2 classes".into()));
        }
        if class_ids.is_empty() {
            return Err(Error::Data("empty training set".into()));
        }
        let design = design_matrix(source);
        let design_sq = design.mapv(|v| v * v);
        let v = transfer.variance_factors();
        let mut var_factors = Array1::zeros(v.len() + 1);
        var_factors.slice_mut(ndarray::s![..v.len()]).assign(&v);
        Ok(SoftmaxTaylorProblem { design, design_sq, class_ids, classes, var_factors, l2 })
    }

    fn dims(&self) -> (usize, usize) {
        (self.design.ncols(), self.classes)
    }

    fn weight_matrix<'a>(&self, w: &'a Array1<f64>) -> ArrayView2<'a, f64> {
        let (p, k) = self.dims();
        w.view().into_shape_with_order((p, k)).expect("flat weights are contiguous")
    }

    fn penalty(&self, wmat: ArrayView2<'_, f64>) -> f64 {
        if self.l2 == 0.0 {
            return 0.0;
        }
        let m = wmat.nrows() - 1;
        self.l2 * wmat.slice(ndarray::s![..m, ..]).mapv(|v| v * v).sum()
    }

    /// Scaled squared weights v_d * W_dk^2 and their per-sample spread S = SQ U.
    fn spread(&self, wmat: ArrayView2<'_, f64>) -> Array2<f64> {
        let (p, k) = self.dims();
        let mut u = Array2::zeros((p, k));
        for d in 0..p {
            for c in 0..k {
                u[(d, c)] = self.var_factors[d] * wmat[(d, c)] * wmat[(d, c)];
            }
        }
        self.design_sq.dot(&u)
    }
}

impl Objective for SoftmaxTaylorProblem {
    fn value(&self, w: &Array1<f64>) -> f64 {
        let wmat = self.weight_matrix(w);
        let n = self.class_ids.len();
        let scores = self.design.dot(&wmat);
        let spread = self.spread(wmat);
        let mut total = 0.0;
        for i in 0..n {
            let (lse, probs) = stable_row_softmax(scores.row(i));
            let mut curv = 0.0;
            for c in 0..self.classes {
                curv += (probs[c] - probs[c] * probs[c]) * spread[(i, c)];
            }
            total += -scores[(i, self.class_ids[i])] + lse + 0.5 * curv;
        }
        total / n as f64 + self.penalty(wmat)
    }

    fn value_grad(&self, w: &Array1<f64>) -> (f64, Array1<f64>) {
        let wmat = self.weight_matrix(w);
        let (p, k) = self.dims();
        let n = self.class_ids.len();
        let scores = self.design.dot(&wmat);
        let spread = self.spread(wmat);

        let mut total = 0.0;
        // coefficient on x_i for each class: (P - Y) plus the curvature part
        let mut score_coeff = Array2::zeros((n, k));
        // coefficient on v_d W_dk x_id^2: p (1-p)
        let mut curv_weight = Array2::zeros((n, k));
        for i in 0..n {
            let (lse, probs) = stable_row_softmax(scores.row(i));
            let mut curv = 0.0;
            let mut weighted_sum = 0.0;
            for c in 0..k {
                let pc = probs[c];
                let sc = spread[(i, c)];
                curv += (pc - pc * pc) * sc;
                weighted_sum += (1.0 - 2.0 * pc) * pc * sc;
            }
            total += -scores[(i, self.class_ids[i])] + lse + 0.5 * curv;
            for c in 0..k {
                let pc = probs[c];
                let indicator = if self.class_ids[i] == c { 1.0 } else { 0.0 };
                score_coeff[(i, c)] = pc - indicator
                    + 0.5 * ((1.0 - 2.0 * pc) * pc * spread[(i, c)] - pc * weighted_sum);
                curv_weight[(i, c)] = pc - pc * pc;
            }
        }

        let mut grad = self.design.t().dot(&score_coeff);
        let weighted = self.design_sq.t().dot(&curv_weight);
        for d in 0..p {
            for c in 0..k {
                grad[(d, c)] += self.var_factors[d] * wmat[(d, c)] * weighted[(d, c)];
            }
        }
        grad /= n as f64;
        if self.l2 != 0.0 {
            for d in 0..p - 1 {
                for c in 0..k {
                    grad[(d, c)] += 2.0 * self.l2 * wmat[(d, c)];
                }
            }
        }
        let value = total / n as f64 + self.penalty(wmat);
        let flat = grad.into_shape_with_order(p * k).expect("contiguous gradient");
        (value, flat)
    }
}

fn check_weight_shape(w: ArrayView2<'_, f64>, source: &Dataset) -> Result<usize> {
    let classes = match source.labels() {
        Some(Labels::Multiclass { classes, .. }) => *classes,
        Some(Labels::Binary(_)) => {
            return Err(Error::Data("multiclass risk expects multiclass labels".into()))
        }
        None => return Err(Error::Data("source has no labels".into())),
    };
    if w.ncols() != classes {
        return Err(Error::Dimension { expected: classes, got: w.ncols() });
    }
    if w.nrows() != source.m() + 1 {
        return Err(Error::Dimension { expected: source.m() + 1, got: w.nrows() });
    }
    Ok(classes)
}

/// Taylor-approximated expected multiclass logistic risk under the dropout
/// transfer, averaged over the source samples.
pub fn multiclass_risk_taylor(
    w: ArrayView2<'_, f64>,
    source: &Dataset,
    transfer: &DropoutTransfer,
) -> Result<f64> {
    check_weight_shape(w, source)?;
    let problem = SoftmaxTaylorProblem::new(source, transfer, 0.0)?;
    let flat = w.to_owned().into_shape_with_order(w.len()).expect("contiguous weights");
    Ok(problem.value(&flat))
}

/// Analytic gradient of [`multiclass_risk_taylor`], shaped like the weights.
pub fn multiclass_grad(
    w: ArrayView2<'_, f64>,
    source: &Dataset,
    transfer: &DropoutTransfer,
) -> Result<Array2<f64>> {
    check_weight_shape(w, source)?;
    let problem = SoftmaxTaylorProblem::new(source, transfer, 0.0)?;
    let (p, k) = problem.dims();
    let flat = w.to_owned().into_shape_with_order(w.len()).expect("contiguous weights");
    let (_, g) = problem.value_grad(&flat);
    Ok(g.into_shape_with_order((p, k)).expect("gradient matches weight shape"))
}

/// General-transfer multiclass Taylor risk: per-sample means and diagonal
/// variances given explicitly, mean shifts contributing first-order and
/// rank-one second-order terms.
pub fn multiclass_risk_taylor_general(
    w: ArrayView2<'_, f64>,
    design: ArrayView2<'_, f64>,
    class_ids: &[usize],
    means: ArrayView2<'_, f64>,
    var_diags: ArrayView2<'_, f64>,
) -> Result<f64> {
    let n = design.nrows();
    if n == 0 || class_ids.len() != n {
        return Err(Error::Data("design rows and class ids must agree".into()));
    }
    if means.dim() != design.dim() || var_diags.dim() != design.dim() {
        return Err(Error::Data("moment matrices must match the design shape".into()));
    }
    let k = w.ncols();
    let mut total = 0.0;
    for i in 0..n {
        let x = design.row(i);
        let mu = means.row(i);
        let s2 = var_diags.row(i);
        let scores = w.t().dot(&x);
        let mean_scores = w.t().dot(&mu);
        let (lse, probs) = stable_row_softmax(scores.view());
        let mut first_order = 0.0;
        let mut curv = 0.0;
        for c in 0..k {
            let shift = mean_scores[c] - scores[c];
            let spread: f64 = s2
                .iter()
                .zip(w.column(c).iter())
                .map(|(&v, &wd)| v * wd * wd)
                .sum::<f64>()
                + shift * shift;
            first_order += probs[c] * shift;
            curv += (probs[c] - probs[c] * probs[c]) * spread;
        }
        total += -mean_scores[class_ids[i]] + lse + first_order + 0.5 * curv;
    }
    Ok(total / n as f64)
}

/// Analytic gradient of [`multiclass_risk_taylor_general`].
pub fn multiclass_grad_general(
    w: ArrayView2<'_, f64>,
    design: ArrayView2<'_, f64>,
    class_ids: &[usize],
    means: ArrayView2<'_, f64>,
    var_diags: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    let n = design.nrows();
    if n == 0 || class_ids.len() != n {
        return Err(Error::Data("design rows and class ids must agree".into()));
    }
    if means.dim() != design.dim() || var_diags.dim() != design.dim() {
        return Err(Error::Data("moment matrices must match the design shape".into()));
    }
    let (p, k) = (w.nrows(), w.ncols());
    let mut grad = Array2::zeros((p, k));
    #[allow(clippy::needless_range_loop)] // i indexes four parallel row sets
    for i in 0..n {
        let x = design.row(i);
        let mu = means.row(i);
        let s2 = var_diags.row(i);
        let scores = w.t().dot(&x);
        let mean_scores = w.t().dot(&mu);
        let (_, probs) = stable_row_softmax(scores.view());

        let shifts: Vec<f64> = (0..k).map(|c| mean_scores[c] - scores[c]).collect();
        let spreads: Vec<f64> = (0..k)
            .map(|c| {
                s2.iter()
                    .zip(w.column(c).iter())
                    .map(|(&v, &wd)| v * wd * wd)
                    .sum::<f64>()
                    + shifts[c] * shifts[c]
            })
            .collect();
        let mean_shift: f64 = (0..k).map(|c| probs[c] * shifts[c]).sum();
        let weighted_sum: f64 =
            (0..k).map(|c| (1.0 - 2.0 * probs[c]) * probs[c] * spreads[c]).sum();

        for c in 0..k {
            let pc = probs[c];
            let indicator = if class_ids[i] == c { 1.0 } else { 0.0 };
            // coefficient multiplying x_i in the class-c gradient
            let coeff = pc - indicator + pc * shifts[c] - pc * mean_shift
                + 0.5 * ((1.0 - 2.0 * pc) * pc * spreads[c] - pc * weighted_sum);
            // first-order and true-class terms carry mu; quadratic terms carry
            // the variance and the rank-one mean shift
            for d in 0..p {
                let delta = mu[d] - x[d];
                grad[(d, c)] += coeff * x[d] + (pc * delta - indicator * delta)
                    + (pc - pc * pc) * (s2[d] * w[(d, c)] + shifts[c] * delta);
            }
        }
    }
    Ok(grad / n as f64)
}

/// Transfer-adapted multiclass logistic fit by gradient descent from zero.
pub fn fit_flda_l_multiclass(
    source: &Dataset,
    transfer: &DropoutTransfer,
    config: &TrainConfig,
) -> Result<LinearModel> {
    config.validate()?;
    let problem = SoftmaxTaylorProblem::new(source, transfer, config.l2)?;
    let (p, k) = problem.dims();
    let (w, report) = minimize(&problem, Array1::zeros(p * k), config)?;
    let wmat = w.into_shape_with_order((p, k)).expect("contiguous weights");
    LinearModel::new(
        ModelWeights::Multiclass(wmat),
        LossKind::Logistic,
        true,
        TrainMeta { iterations: report.iterations, grad_norm: report.grad_norm, seed: None },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::DEFAULT_EPSILON;
    use ndarray::array;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn three_class_dataset() -> Dataset {
        Dataset::from_dense(
            array![
                [1.0, 0.0],
                [2.0, 1.0],
                [0.0, 2.0],
                [1.5, 0.5],
                [0.5, 1.5],
                [2.5, 2.5]
            ],
            Some(Labels::Multiclass { ids: vec![0, 1, 2, 0, 1, 2], classes: 3 }),
        )
        .unwrap()
    }

    #[test]
    fn risk_at_zero_is_log_k() {
        let ds = three_class_dataset();
        let tr = DropoutTransfer::from_theta(array![0.4, 0.2], DEFAULT_EPSILON).unwrap();
        let w = Array2::zeros((3, 3));
        let r = multiclass_risk_taylor(w.view(), &ds, &tr).unwrap();
        assert!((r - 3f64.ln()).abs() < 1e-14, "risk {r}");
    }

    #[test]
    fn weight_class_count_must_match_labels() {
        let ds = three_class_dataset();
        let tr = DropoutTransfer::zero(2);
        let w = Array2::zeros((3, 4));
        assert!(multiclass_risk_taylor(w.view(), &ds, &tr).is_err());
    }

    #[test]
    fn dropout_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let ds = three_class_dataset();
        let tr = DropoutTransfer::from_theta(array![0.6, 0.3], DEFAULT_EPSILON).unwrap();
        let w = Array2::from_shape_fn((3, 3), |_| rng.random::<f64>() - 0.5);

        let analytic = multiclass_grad(w.view(), &ds, &tr).unwrap();
        let step = 1e-5;
        let mut worst = 0.0f64;
        let mut scale = 1.0f64;
        for d in 0..3 {
            for c in 0..3 {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[(d, c)] += step;
                wm[(d, c)] -= step;
                let fp = multiclass_risk_taylor(wp.view(), &ds, &tr).unwrap();
                let fm = multiclass_risk_taylor(wm.view(), &ds, &tr).unwrap();
                let fd = (fp - fm) / (2.0 * step);
                worst = worst.max((fd - analytic[(d, c)]).abs());
                scale = scale.max(fd.abs());
            }
        }
        assert!(worst <= 1e-5 * scale, "max diff {worst} at scale {scale}");
    }

    #[test]
    fn general_gradient_with_mean_shift_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 5;
        let p = 3;
        let k = 3;
        let design = Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * 2.0 - 1.0);
        let means = &design + &Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * 0.4);
        let var_diags = Array2::from_shape_fn((n, p), |_| rng.random::<f64>());
        let ids: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let w = Array2::from_shape_fn((p, k), |_| rng.random::<f64>() - 0.5);

        let analytic =
            multiclass_grad_general(w.view(), design.view(), &ids, means.view(), var_diags.view())
                .unwrap();
        let step = 1e-5;
        let mut worst = 0.0f64;
        let mut scale = 1.0f64;
        for d in 0..p {
            for c in 0..k {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[(d, c)] += step;
                wm[(d, c)] -= step;
                let fp = multiclass_risk_taylor_general(
                    wp.view(), design.view(), &ids, means.view(), var_diags.view(),
                )
                .unwrap();
                let fm = multiclass_risk_taylor_general(
                    wm.view(), design.view(), &ids, means.view(), var_diags.view(),
                )
                .unwrap();
                let fd = (fp - fm) / (2.0 * step);
                worst = worst.max((fd - analytic[(d, c)]).abs());
                scale = scale.max(fd.abs());
            }
        }
        assert!(worst <= 1e-5 * scale, "max diff {worst} at scale {scale}");
    }

    #[test]
    fn general_form_reduces_to_dropout_form() {
        let ds = three_class_dataset();
        let theta = array![0.5, 0.25];
        let tr = DropoutTransfer::from_theta(theta, DEFAULT_EPSILON).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = Array2::from_shape_fn((3, 3), |_| rng.random::<f64>() - 0.5);

        let design = design_matrix(&ds);
        let v = tr.variance_factors();
        let mut var_diags = Array2::zeros(design.dim());
        for i in 0..design.nrows() {
            for d in 0..2 {
                var_diags[(i, d)] = v[d] * design[(i, d)] * design[(i, d)];
            }
        }
        let ids = match ds.labels().unwrap() {
            Labels::Multiclass { ids, .. } => ids.clone(),
            _ => unreachable!(),
        };
        let fast = multiclass_risk_taylor(w.view(), &ds, &tr).unwrap();
        let general = multiclass_risk_taylor_general(
            w.view(), design.view(), &ids, design.view(), var_diags.view(),
        )
        .unwrap();
        assert!((fast - general).abs() < 1e-13);

        let gf = multiclass_grad(w.view(), &ds, &tr).unwrap();
        let gg = multiclass_grad_general(
            w.view(), design.view(), &ids, design.view(), var_diags.view(),
        )
        .unwrap();
        for (a, b) in gf.iter().zip(gg.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn separable_three_class_fit_reaches_zero_training_error() {
        let mut rows = Vec::new();
        let mut ids = Vec::new();
        for (k, &(cx, cy)) in [(0.0, 0.0), (8.0, 0.0), (0.0, 8.0)].iter().enumerate() {
            for i in 0..8 {
                rows.push(vec![cx + 0.1 * i as f64, cy + 0.05 * i as f64]);
                ids.push(k);
            }
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let ds = Dataset::from_dense(
            Array2::from_shape_vec((24, 2), flat).unwrap(),
            Some(Labels::Multiclass { ids, classes: 3 }),
        )
        .unwrap();
        let tr = DropoutTransfer::zero(2);
        let model = fit_flda_l_multiclass(&ds, &tr, &TrainConfig::default()).unwrap();
        let pred = model.predict(&ds).unwrap();
        let err = super::super::model::error_rate(&pred, ds.labels().unwrap()).unwrap();
        assert_eq!(err, 0.0);
    }
}
