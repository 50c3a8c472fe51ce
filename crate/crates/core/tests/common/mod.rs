//! Shared test oracles, independent of the library's optimization path.

use flda::Dataset;
use ndarray::{Array1, Array2};

/// Newton's method for plain binary logistic regression with +/-1 labels and
/// the mean log-partition log(e^a + e^-a); independent of the gradient
/// descent used by the fits.
#[allow(dead_code)] // not every test binary that includes this module uses it
pub fn newton_logistic(data: &Dataset, tol: f64, max_iter: usize) -> Array1<f64> {
    let x = data.dense_features();
    let (n, m) = (x.nrows(), x.ncols());
    let mut a = Array2::ones((n, m + 1));
    a.slice_mut(ndarray::s![.., ..m]).assign(&x);
    let y = data.binary_targets().unwrap();

    let mut w = Array1::zeros(m + 1);
    for _ in 0..max_iter {
        let scores = a.dot(&w);
        let t = scores.mapv(f64::tanh);
        let grad = a.t().dot(&(&t - &y)) / n as f64;
        if grad.iter().fold(0.0f64, |acc, v| acc.max(v.abs())) < tol {
            break;
        }
        // Hessian: (1/n) A' diag(sech^2) A
        let sech2 = scores.mapv(|s| {
            let c = s.cosh();
            1.0 / (c * c)
        });
        let mut hess = Array2::zeros((m + 1, m + 1));
        for i in 0..n {
            let row = a.row(i);
            for p in 0..m + 1 {
                for q in 0..m + 1 {
                    hess[(p, q)] += sech2[i] * row[p] * row[q];
                }
            }
        }
        hess /= n as f64;
        // small ridge keeps the solve stable near separation
        for d in 0..m + 1 {
            hess[(d, d)] += 1e-12;
        }
        let step = flda::linalg::solve_normal_equations(hess.view(), grad.view())
            .expect("newton system solvable");
        w -= &step;
    }
    w
}
