//! Lawson–Hanson active-set non-negative least squares.

use crate::error::{ensure, Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{compensated_sum, Real};

/// Solution of `min ||A x - b||` subject to `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution<T> {
    pub x: Vec<T>,
    /// Euclidean norm of `A x - b`.
    pub residual_norm: T,
    /// Smallest normalized gradient component `a_j . (A x - b) / (|a_j| |b|)`
    /// over the zero (active) coordinates; non-negative at an exact optimum.
    pub kkt_min: T,
    pub iterations: usize,
}

fn column_dot<T: Real>(a: &Matrix<T>, j: usize, v: &[T]) -> T {
    compensated_sum((0..a.rows).map(|i| a[(i, j)] * v[i]))
}

fn residual<T: Real>(a: &Matrix<T>, x: &[T], b: &[T]) -> Vec<T> {
    (0..a.rows)
        .map(|i| compensated_sum((0..a.cols).map(|j| a[(i, j)] * x[j])) - b[i])
        .collect()
}

/// Unconstrained least squares on the columns `cols` of `a` via Householder QR.
fn lstsq_subset<T: Real>(a: &Matrix<T>, cols: &[usize], b: &[T]) -> Result<Vec<T>> {
    let m = a.rows;
    let k = cols.len();
    let mut q = Matrix::zeros(m, k);
    for (c, &j) in cols.iter().enumerate() {
        for i in 0..m {
            q[(i, c)] = a[(i, j)];
        }
    }
    let mut rhs = b.to_vec();
    let scale = q.frobenius();
    for c in 0..k {
        let norm = compensated_sum((c..m).map(|i| q[(i, c)] * q[(i, c)])).sqrt();
        ensure(norm > T::epsilon() * T::lit(64.0) * scale, || {
            Error::Conditioning("rank-deficient NNLS subproblem".into())
        })?;
        let alpha = if q[(c, c)] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (c..m).map(|i| q[(i, c)]).collect();
        v[0] -= alpha;
        let vnorm2 = compensated_sum(v.iter().map(|x| *x * *x));
        if vnorm2 > T::zero() {
            for cc in c..k {
                let d = compensated_sum(v.iter().enumerate().map(|(t, vi)| *vi * q[(c + t, cc)]));
                let f = T::two() * d / vnorm2;
                for (t, vi) in v.iter().enumerate() {
                    q[(c + t, cc)] -= f * *vi;
                }
            }
            let d = compensated_sum(v.iter().enumerate().map(|(t, vi)| *vi * rhs[c + t]));
            let f = T::two() * d / vnorm2;
            for (t, vi) in v.iter().enumerate() {
                rhs[c + t] -= f * *vi;
            }
        }
    }
    let mut z = vec![T::zero(); k];
    for c in (0..k).rev() {
        let mut s = rhs[c];
        for cc in (c + 1)..k {
            s -= q[(c, cc)] * z[cc];
        }
        z[c] = s / q[(c, c)];
    }
    Ok(z)
}

/// Solves `min ||A x - b||_2` with `x >= 0`.
pub fn nnls<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<NnlsSolution<T>> {
    let (m, n) = (a.rows, a.cols);
    ensure(m == b.len(), || Error::Argument(format!("matrix has {m} rows but rhs has {}", b.len())))?;
    ensure(m > 0 && n > 0, || Error::Argument("empty NNLS problem".into()))?;
    ensure(a.data.iter().chain(b).all(|v| v.is_finite()), || {
        Error::Argument("non-finite value in NNLS input".into())
    })?;
    let bnorm = compensated_sum(b.iter().map(|v| *v * *v)).sqrt();
    let tol = T::epsilon() * T::lit(10.0) * T::from_usize_lossy(m.max(n)) * a.frobenius() * bnorm;
    let mut x = vec![T::zero(); n];
    let mut passive = vec![false; n];
    let mut iterations = 0;
    let max_outer = 3 * n + 10;
    loop {
        let r = residual(a, &x, b);
        // w = A^T (b - A x) = -A^T r.
        let w: Vec<T> = (0..n).map(|j| -column_dot(a, j, &r)).collect();
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap_or(std::cmp::Ordering::Equal));
        let t = match candidate {
            Some(t) if w[t] > tol => t,
            _ => break,
        };
        iterations += 1;
        ensure(iterations <= max_outer, || Error::Numerical("NNLS did not terminate".into()))?;
        passive[t] = true;
        loop {
            let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let zp = lstsq_subset(a, &cols, b)?;
            let mut z = vec![T::zero(); n];
            for (c, &j) in cols.iter().enumerate() {
                z[j] = zp[c];
            }
            if cols.iter().all(|&j| z[j] > T::zero()) {
                x = z;
                break;
            }
            let mut alpha = T::infinity();
            for &j in &cols {
                if z[j] <= T::zero() {
                    alpha = alpha.min(x[j] / (x[j] - z[j]));
                }
            }
            for (xj, zj) in x.iter_mut().zip(&z) {
                *xj += alpha * (*zj - *xj);
            }
            let floor = T::epsilon() * T::lit(16.0) * x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            for &j in &cols {
                if x[j] <= floor {
                    x[j] = T::zero();
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|p| *p) {
                break;
            }
        }
    }
    let r = residual(a, &x, b);
    let residual_norm = compensated_sum(r.iter().map(|v| *v * *v)).sqrt();
    let denom = bnorm.max(T::min_positive_value());
    let kkt_min = (0..n)
        .filter(|&j| x[j] == T::zero())
        .map(|j| {
            let cn = compensated_sum((0..m).map(|i| a[(i, j)] * a[(i, j)])).sqrt();
            column_dot(a, j, &r) / (cn * denom)
        })
        .fold(T::infinity(), T::min);
    let kkt_min = if kkt_min.is_finite() { kkt_min } else { T::zero() };
    Ok(NnlsSolution { x, residual_norm, kkt_min, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> Matrix<f64> {
        Matrix { rows, cols, data: data.to_vec() }
    }

    #[test]
    fn interior_solution_matches_least_squares() {
        let a = mat(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = [1.0, 2.0, 3.0];
        let s = nnls(&a, &b).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-14 && (s.x[1] - 2.0).abs() < 1e-14);
        assert!(s.residual_norm < 1e-14);
    }

    #[test]
    fn clamps_negative_coordinate() {
        // Unconstrained optimum has x1 < 0.
        let a = mat(3, 2, &[1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let b = [3.0, 2.0, 1.0];
        let s = nnls(&a, &b).unwrap();
        assert_eq!(s.x[1], 0.0);
        assert!((s.x[0] - 2.0).abs() < 1e-14);
        assert!(s.kkt_min >= -1e-12);
    }

    #[test]
    fn all_zero_when_rhs_opposes_columns() {
        let a = mat(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let s = nnls(&a, &[-1.0, -2.0]).unwrap();
        assert_eq!(s.x, vec![0.0, 0.0]);
        assert!(s.kkt_min > 0.0);
    }
}
