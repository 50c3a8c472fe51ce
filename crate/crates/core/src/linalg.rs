//! Dense linear solve for the normal-equation systems built by the
//! quadratic-loss fits.

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Pivots smaller than this fraction of the largest pivot are treated as a
/// singular factorization so the caller can fall back to the jitter retry.
const PIVOT_RATIO_FLOOR: f64 = 1e-13;

/// LU decomposition with partial pivoting; returns None on a zero or
/// negligibly small pivot.
fn lu_solve(matrix: ArrayView2<'_, f64>, rhs: ArrayView1<'_, f64>) -> Option<Array1<f64>> {
    let n = matrix.nrows();
    debug_assert_eq!(matrix.ncols(), n);
    debug_assert_eq!(rhs.len(), n);
    let mut a = matrix.to_owned();
    let mut b = rhs.to_owned();
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot = 0.0f64;

    for col in 0..n {
        let mut pivot = col;
        let mut max = a[(col, col)].abs();
        for row in col + 1..n {
            let v = a[(row, col)].abs();
            if v > max {
                max = v;
                pivot = row;
            }
        }
        if max == 0.0 || !max.is_finite() {
            return None;
        }
        min_pivot = min_pivot.min(max);
        max_pivot = max_pivot.max(max);
        if pivot != col {
            for k in 0..n {
                let tmp = a[(col, k)];
                a[(col, k)] = a[(pivot, k)];
                a[(pivot, k)] = tmp;
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[(col, col)];
        for row in col + 1..n {
            let factor = a[(row, col)] * inv;
            if factor == 0.0 {
                continue;
            }
            a[(row, col)] = 0.0;
            for k in col + 1..n {
                a[(row, k)] -= factor * a[(col, k)];
            }
            b[row] -= factor * b[col];
        }
    }

    if min_pivot < PIVOT_RATIO_FLOOR * max_pivot {
        return None;
    }

    // back substitution
    let mut x = Array1::zeros(n);
    for row in (0..n).rev() {
        let mut sum = b[row];
        for k in row + 1..n {
            sum -= a[(row, k)] * x[k];
        }
        x[row] = sum / a[(row, row)];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn residual_inf(matrix: ArrayView2<'_, f64>, x: &Array1<f64>, rhs: ArrayView1<'_, f64>) -> f64 {
    let r = matrix.dot(x) - rhs;
    r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

fn inf_norm(matrix: ArrayView2<'_, f64>) -> f64 {
    matrix
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
}

fn acceptable(matrix: ArrayView2<'_, f64>, x: &Array1<f64>, rhs: ArrayView1<'_, f64>) -> bool {
    let scale = 1.0
        + rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()))
        + inf_norm(matrix) * x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    residual_inf(matrix, x, rhs) <= 1e-8 * scale
}

/// Solve `M x = b` for a symmetric positive semidefinite system.
///
/// Tries a direct solve first; if the factorization breaks down or the
/// solution fails a residual check, retries once with `1e-9 * mean(diag(M))`
/// added to the diagonal, then fails with a condition diagnostic.
pub fn solve_normal_equations(
    matrix: ArrayView2<'_, f64>,
    rhs: ArrayView1<'_, f64>,
) -> Result<Array1<f64>> {
    let n = matrix.nrows();
    if matrix.ncols() != n || rhs.len() != n {
        return Err(Error::Dimension { expected: n, got: rhs.len() });
    }

    if let Some(x) = lu_solve(matrix, rhs) {
        if acceptable(matrix, &x, rhs) {
            return Ok(x);
        }
    }

    let mean_diag = matrix.diag().sum() / n as f64;
    let jitter = 1e-9 * mean_diag;
    if jitter > 0.0 {
        let mut jittered = matrix.to_owned();
        for d in 0..n {
            jittered[(d, d)] += jitter;
        }
        if let Some(x) = lu_solve(jittered.view(), rhs) {
            if acceptable(jittered.view(), &x, rhs) {
                return Ok(x);
            }
        }
    }

    Err(Error::Numeric(format!(
        "singular normal equations ({n}x{n}, mean diagonal {mean_diag:.3e}); \
         direct solve and jitter {jitter:.3e} both failed"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn solves_well_posed_system() {
        let m = array![[4.0, 1.0], [1.0, 3.0]];
        let b = array![1.0, 2.0];
        let x = solve_normal_equations(m.view(), b.view()).unwrap();
        let r = m.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn jitter_rescues_singular_system() {
        // rank-1 PSD matrix with consistent rhs
        let m = array![[1.0, 1.0], [1.0, 1.0]];
        let b = array![2.0, 2.0];
        let x = solve_normal_equations(m.view(), b.view()).unwrap();
        assert!((x[0] + x[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn zero_matrix_fails_with_diagnostic() {
        let m = Array2::zeros((2, 2));
        let b = array![1.0, 0.0];
        let err = solve_normal_equations(m.view(), b.view()).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn permuted_rows_need_pivoting() {
        let m = array![[0.0, 1.0], [1.0, 0.0]];
        let b = array![3.0, 5.0];
        let x = solve_normal_equations(m.view(), b.view()).unwrap();
        assert_eq!(x.to_vec(), vec![5.0, 3.0]);
    }
}
