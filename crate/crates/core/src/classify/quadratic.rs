//! Quadratic-loss classifiers: the closed-form transfer-adapted fit and the
//! ridge least-squares baseline.
//!
//! With the dropout transfer model the expected quadratic risk is
//! `y'y - 2 w'E[Z]y + w'(E[Z]E[Z]' + V[Z])w` on bias-appended data, where
//! `E[Z] = X` and `V[Z]` is diagonal with entries `theta_d/(1-theta_d)`
//! times the d-th diagonal entry of `XX'`. Setting the gradient to zero
//! gives a data-dependent ridge system.

use ndarray::{Array1, Array2, ArrayView1};

use crate::data::{Dataset, Labels};
use crate::error::{Error, Result};
use crate::linalg::solve_normal_equations;
use crate::transfer::DropoutTransfer;

use super::descent::TrainConfig;
use super::model::{LinearModel, LossKind, ModelWeights, TrainMeta};
use super::design_matrix;

/// Variance factors for bias-appended data: theta/(1-theta) with a zero
/// appended (the bias coordinate is never dropped).
fn variance_factors_with_bias(transfer: &DropoutTransfer) -> Array1<f64> {
    let v = transfer.variance_factors();
    let mut out = Array1::zeros(v.len() + 1);
    out.slice_mut(ndarray::s![..v.len()]).assign(&v);
    out
}

fn check_dims(data: &Dataset, transfer: &DropoutTransfer) -> Result<()> {
    if data.m() != transfer.dim() {
        return Err(Error::Dimension { expected: transfer.dim(), got: data.m() });
    }
    Ok(())
}

/// Expected quadratic risk of weights `w` (bias last) under the transfer
/// model, summed over the source samples.
pub fn expected_quadratic_risk(
    w: ArrayView1<'_, f64>,
    source: &Dataset,
    transfer: &DropoutTransfer,
) -> Result<f64> {
    check_dims(source, transfer)?;
    let y = source.binary_targets()?;
    if w.len() != source.m() + 1 {
        return Err(Error::Dimension { expected: source.m() + 1, got: w.len() });
    }
    let a = design_matrix(source);
    let gram = a.t().dot(&a);
    let b = a.t().dot(&y);
    let v = variance_factors_with_bias(transfer);

    let quadratic = w.dot(&gram.dot(&w));
    let variance: f64 = (0..w.len()).map(|d| v[d] * gram[(d, d)] * w[d] * w[d]).sum();
    Ok(y.dot(&y) - 2.0 * w.dot(&b) + quadratic + variance)
}

/// Gradient of [`expected_quadratic_risk`] with respect to `w`.
pub fn quadratic_risk_gradient(
    w: ArrayView1<'_, f64>,
    source: &Dataset,
    transfer: &DropoutTransfer,
) -> Result<Array1<f64>> {
    check_dims(source, transfer)?;
    let y = source.binary_targets()?;
    if w.len() != source.m() + 1 {
        return Err(Error::Dimension { expected: source.m() + 1, got: w.len() });
    }
    let a = design_matrix(source);
    let gram = a.t().dot(&a);
    let b = a.t().dot(&y);
    let v = variance_factors_with_bias(transfer);
    let mut grad = gram.dot(&w);
    for d in 0..w.len() {
        grad[d] += v[d] * gram[(d, d)] * w[d];
        grad[d] -= b[d];
    }
    Ok(2.0 * grad)
}

/// Solve `(A'A + D) w = A'y_k` for each target column, sharing the matrix.
fn solve_augmented(
    a: &Array2<f64>,
    targets: &[Array1<f64>],
    extra_diag: &Array1<f64>,
) -> Result<Vec<Array1<f64>>> {
    let mut system = a.t().dot(a);
    for d in 0..system.nrows() {
        system[(d, d)] += extra_diag[d];
    }
    targets
        .iter()
        .map(|y| solve_normal_equations(system.view(), a.t().dot(y).view()))
        .collect()
}

fn ridge_diag(dim_with_bias: usize, l2: f64) -> Array1<f64> {
    let mut d = Array1::from_elem(dim_with_bias, l2);
    d[dim_with_bias - 1] = 0.0; // bias is never penalized
    d
}

/// Closed-form transfer-adapted least squares on binary labels.
pub fn fit_flda_q(
    source: &Dataset,
    transfer: &DropoutTransfer,
    config: &TrainConfig,
) -> Result<LinearModel> {
    config.validate()?;
    check_dims(source, transfer)?;
    let y = source.binary_targets()?;
    let a = design_matrix(source);
    let v = variance_factors_with_bias(transfer);
    let gram_diag: Array1<f64> =
        (0..a.ncols()).map(|d| a.column(d).dot(&a.column(d))).collect();
    let extra = &v * &gram_diag + ridge_diag(a.ncols(), config.l2);
    let w = solve_augmented(&a, &[y], &extra)?.pop().expect("one target solved");
    LinearModel::new(
        ModelWeights::Binary(w),
        LossKind::Quadratic,
        true,
        TrainMeta::default(),
    )
}

/// One-vs-all stack of transfer-adapted least-squares fits.
pub fn fit_flda_q_multiclass(
    source: &Dataset,
    transfer: &DropoutTransfer,
    config: &TrainConfig,
) -> Result<LinearModel> {
    config.validate()?;
    check_dims(source, transfer)?;
    let (ids, classes) = match source.labels() {
        Some(Labels::Multiclass { ids, classes }) => (ids.clone(), *classes),
        Some(Labels::Binary(_)) => {
            return Err(Error::Data("use fit_flda_q for binary labels".into()))
        }
        None => return Err(Error::Data("source has no labels".into())),
    };
    for k in 0..classes {
        if !ids.contains(&k) {
            return Err(Error::Data(format!("class {k} absent from the source data")));
        }
    }
    let a = design_matrix(source);
    let v = variance_factors_with_bias(transfer);
    let gram_diag: Array1<f64> =
        (0..a.ncols()).map(|d| a.column(d).dot(&a.column(d))).collect();
    let extra = &v * &gram_diag + ridge_diag(a.ncols(), config.l2);
    let targets: Vec<Array1<f64>> = (0..classes)
        .map(|k| ids.iter().map(|&c| if c == k { 1.0 } else { -1.0 }).collect())
        .collect();
    let columns = solve_augmented(&a, &targets, &extra)?;
    let mut w = Array2::zeros((a.ncols(), classes));
    for (k, col) in columns.into_iter().enumerate() {
        w.column_mut(k).assign(&col);
    }
    LinearModel::new(
        ModelWeights::Multiclass(w),
        LossKind::Quadratic,
        true,
        TrainMeta::default(),
    )
}

/// Naive ridge least squares (binary or one-vs-all multiclass).
pub fn fit_ls(data: &Dataset, config: &TrainConfig) -> Result<LinearModel> {
    config.validate()?;
    let a = design_matrix(data);
    let extra = ridge_diag(a.ncols(), config.l2);
    let advise = |e: Error| {
        if config.l2 == 0.0 {
            Error::Numeric(format!("{e}; retry with an l2 penalty > 0"))
        } else {
            e
        }
    };
    match data.labels() {
        Some(Labels::Binary(_)) => {
            let y = data.binary_targets()?;
            let w = solve_augmented(&a, &[y], &extra)
                .map_err(advise)?
                .pop()
                .expect("one target solved");
            LinearModel::new(
                ModelWeights::Binary(w),
                LossKind::Quadratic,
                false,
                TrainMeta::default(),
            )
        }
        Some(Labels::Multiclass { ids, classes }) => {
            let targets: Vec<Array1<f64>> = (0..*classes)
                .map(|k| ids.iter().map(|&c| if c == k { 1.0 } else { -1.0 }).collect())
                .collect();
            let columns = solve_augmented(&a, &targets, &extra).map_err(advise)?;
            let mut w = Array2::zeros((a.ncols(), *classes));
            for (k, col) in columns.into_iter().enumerate() {
                w.column_mut(k).assign(&col);
            }
            LinearModel::new(
                ModelWeights::Multiclass(w),
                LossKind::Quadratic,
                false,
                TrainMeta::default(),
            )
        }
        None => Err(Error::Data("dataset has no labels".into())),
    }
}
