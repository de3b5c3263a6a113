//! Small dense square matrices stored row-major in slices.

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::dual::Scalar;

/// Relative singular-value threshold for numeric rank.
pub const RANK_THRESHOLD: f64 = 1e-8;

fn to_na(m: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, m)
}

fn from_na(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    (0..n * n).map(|k| m[(k / n, k % n)]).collect()
}

pub fn identity(n: usize) -> Vec<f64> {
    (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect()
}

pub fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum()).collect()
}

/// Row vector times matrix: `w^T m`.
pub fn vec_mat(w: &[f64], m: &[f64]) -> Vec<f64> {
    let n = w.len();
    (0..n).map(|j| (0..n).map(|i| w[i] * m[i * n + j]).sum()).collect()
}

pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = alloc::vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    (0..n * n).map(|k| a[(k % n) * n + k / n]).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sup-norm of a slice.
pub fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scaled(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| x * c).collect()
}

/// Outer product `u v^T`.
pub fn outer(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect()
}

pub fn inverse(m: &[f64], n: usize) -> Option<Vec<f64>> {
    to_na(m, n).try_inverse().map(|inv| from_na(&inv))
}

/// Cholesky factorization succeeds (symmetric positive definite test).
pub fn is_positive_definite(m: &[f64], n: usize) -> bool {
    to_na(m, n).cholesky().is_some()
}

pub fn singular_values(m: &[f64], n: usize) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(m, n).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `RANK_THRESHOLD * largest`.
pub fn numeric_rank(m: &[f64], n: usize) -> usize {
    let s = singular_values(m, n);
    let cutoff = RANK_THRESHOLD * s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > cutoff && v > 0.0).count()
}

pub fn min_symmetric_eigenvalue(m: &[f64], n: usize) -> f64 {
    let a = to_na(m, n);
    let sym = (&a + a.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, v| acc.min(*v))
}

/// Solves `m x = b` over any scalar by Gaussian elimination with partial
/// pivoting on real parts. Returns `None` for a (numerically) singular `m`.
pub fn solve_generic<S: Scalar>(m: &[S], b: &[S]) -> Option<Vec<S>> {
    let n = b.len();
    let mut a: Vec<S> = m.to_vec();
    let mut x: Vec<S> = b.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i * n + col].value().abs().total_cmp(&a[j * n + col].value().abs()))?;
        if a[pivot * n + col].value() == 0.0 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            x.swap(col, pivot);
        }
        let p = a[col * n + col].clone();
        for row in col + 1..n {
            let f = a[row * n + col].clone() / p.clone();
            for k in col..n {
                let v = a[row * n + k].clone() - f.clone() * a[col * n + k].clone();
                a[row * n + k] = v;
            }
            let v = x[row].clone() - f * x[col].clone();
            x[row] = v;
        }
    }
    for row in (0..n).rev() {
        let mut acc = x[row].clone();
        for k in row + 1..n {
            acc = acc - a[row * n + k].clone() * x[k].clone();
        }
        x[row] = acc / a[row * n + row].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;
    use alloc::vec;

    #[test]
    fn rank_of_rotation_generator() {
        let j = [0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(numeric_rank(&j, 3), 2);
        assert_eq!(numeric_rank(&identity(3), 3), 3);
    }

    #[test]
    fn generic_solve_matches_inverse() {
        let m = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let b = [1.0, -2.0, 0.5];
        let inv = inverse(&m, 3).unwrap();
        let x = solve_generic(&m, &b).unwrap();
        let y = mat_vec(&inv, &b);
        for i in 0..3 {
            assert!((x[i] - y[i]).abs() < 1e-14);
        }
        assert!(solve_generic(&[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn generic_solve_differentiates() {
        // (t * I) x = 1  =>  x = 1/t, dx/dt = -1/t^2
        let t = Dual::variable(2.0, 0, 1);
        let zero = Dual::from_f64(0.0);
        let m = vec![t.clone(), zero.clone(), zero, t];
        let one = Dual::from_f64(1.0);
        let x = solve_generic(&m, &[one.clone(), one]).unwrap();
        assert_eq!(x[0].value, 0.5);
        assert_eq!(x[0].partial(0), -0.25);
    }

    #[test]
    fn spd_detection() {
        assert!(is_positive_definite(&identity(3), 3));
        assert!(!is_positive_definite(&[1.0, 0.0, 0.0, -1.0], 2));
        assert!(min_symmetric_eigenvalue(&[1.0, 0.0, 0.0, -1.0], 2) < 0.0);
    }
}
