//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Relative pivot threshold below which an LU factorization is treated as singular.
pub const PIVOT_RTOL: f64 = 1e-14;

pub fn diag(v: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(v)
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

pub fn all_positive(v: &DVector<f64>) -> bool {
    v.iter().all(|&x| x > 0.0 && x.is_finite())
}

/// Largest absolute entry of `a - a^T`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// LU factorization that refuses numerically singular matrices.
pub struct Factor {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Factor {
    pub fn new(a: &DMatrix<f64>) -> Option<Self> {
        let scale = max_abs(a);
        if !scale.is_finite() || scale == 0.0 {
            return None;
        }
        let lu = a.clone().lu();
        let u = lu.u();
        let min_pivot = u.diagonal().iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        if !(min_pivot > PIVOT_RTOL * scale) {
            return None;
        }
        Some(Self { lu })
    }

    pub fn solve(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        let x = self.lu.solve(b)?;
        all_finite(&x).then_some(x)
    }

    pub fn inverse(&self) -> Option<DMatrix<f64>> {
        self.lu.try_inverse()
    }
}

pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    Factor::new(a)?.solve(b)
}

pub fn inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    Factor::new(a)?.inverse()
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 1-norm condition number, computed from the explicit inverse.
///
/// Only intended for the small dense systems this crate works with.
pub fn condition_1(a: &DMatrix<f64>) -> f64 {
    match inverse(a) {
        Some(inv) => norm1(a) * norm1(&inv),
        None => f64::INFINITY,
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue_sym(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |m, &x| m.min(x))
}

/// `v / ||v||_1`.
pub fn normalize_l1(v: &DVector<f64>) -> DVector<f64> {
    let s: f64 = v.iter().map(|x| x.abs()).sum();
    v / s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_rejects_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[-0.5, 0.5, 0.5, -0.5]);
        assert!(Factor::new(&a).is_none());
        let b = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let x = solve(&b, &DVector::from_vec(vec![1.0, 1.0])).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn condition_of_identity_is_one() {
        assert_eq!(condition_1(&DMatrix::identity(3, 3)), 1.0);
    }
}
