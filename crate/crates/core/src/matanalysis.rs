//! Z-matrix and M-matrix primitives.
//!
//! For an irreducible Z-matrix `A` the eigenvalue with smallest real part is
//! real and simple and owns a strictly positive eigenvector (the Perron root
//! and Perron vector). `A` is a nonsingular M-matrix exactly when that root
//! is positive, and a singular M-matrix when it is zero.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, Factor};
use crate::powerflow::GridCore;

/// Relative band (times `max|A_ij|`) separating singular from nonsingular.
pub const PERRON_RTOL: f64 = 1e-9;
/// Dense eigen-decomposition is used up to this size; inverse iteration above.
pub const DENSE_EIGEN_LIMIT: usize = 64;
/// Relative asymmetry tolerated by [`is_positive_definite`].
pub const PD_SYMMETRY_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PerronPair {
    pub root: f64,
    /// Strictly positive, `||vector||_1 = 1`.
    pub vector: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum MTag {
    NonsingularM,
    SingularM,
    NotM,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MClass {
    pub tag: MTag,
    pub perron: Option<PerronPair>,
}

pub fn is_z_matrix(a: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    a.ncols() == n
        && (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] <= 0.0))
        && a.iter().all(|x| x.is_finite())
}

fn reaches_all(n: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !seen[j] && edge(i, j) {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Strong connectivity of the off-diagonal nonzero pattern (exact zeros only).
pub fn is_irreducible(a: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    if n <= 1 {
        return true;
    }
    reaches_all(n, |i, j| i != j && a[(i, j)] != 0.0)
        && reaches_all(n, |i, j| i != j && a[(j, i)] != 0.0)
}

fn fix_sign_and_normalize(mut v: DVector<f64>) -> DVector<f64> {
    if v.sum() < 0.0 {
        v.neg_mut();
    }
    // rounding can leave entries of size eps where the true vector is positive
    v.iter_mut().for_each(|x| *x = x.abs());
    linalg::normalize_l1(&v)
}

/// Inverse iteration with a fixed shift strictly below the Perron root.
fn inverse_iteration(a: &DMatrix<f64>, shift: f64) -> Option<DVector<f64>> {
    let n = a.nrows();
    let shifted = a - DMatrix::identity(n, n) * shift;
    let f = Factor::new(&shifted)?;
    let mut v = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..200 {
        let next = linalg::normalize_l1(&f.solve(&v)?);
        let change = (&next - &v).amax();
        v = next;
        if change <= 1e-15 {
            break;
        }
    }
    Some(v)
}

/// Shift-updated inverse iteration driven by Collatz-Wielandt bounds.
///
/// For a positive vector `x`, `min (Ax)_i/x_i <= r <= max (Ax)_i/x_i`; the
/// lower bound is reused as the next shift so `A - sigma I` stays a
/// nonsingular M-matrix with positive inverse.
fn collatz_wielandt_iteration(a: &DMatrix<f64>) -> Option<PerronPair> {
    let n = a.nrows();
    let scale = linalg::max_abs(a).max(f64::MIN_POSITIVE);
    let gersh = (0..n)
        .map(|i| a[(i, i)] - (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let mut sigma = gersh - 1e-3 * scale;
    let mut v = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..500 {
        let shifted = a - DMatrix::identity(n, n) * sigma;
        let f = Factor::new(&shifted)?;
        v = linalg::normalize_l1(&f.solve(&v)?.abs());
        if v.iter().any(|&x| x <= 0.0) {
            return None;
        }
        let av = a * &v;
        let ratios = av.component_div(&v);
        let lo = ratios.min();
        let hi = ratios.max();
        if hi - lo <= 1e-13 * scale {
            return Some(PerronPair { root: 0.5 * (lo + hi), vector: v });
        }
        let next = lo - 1e-3 * (hi - lo);
        sigma = if next > sigma { next } else { sigma + 0.5 * (lo - sigma) };
    }
    None
}

/// Perron root and 1-norm normalized positive Perron vector of an
/// irreducible Z-matrix.
pub fn perron(a: &DMatrix<f64>) -> Result<PerronPair> {
    let n = a.nrows();
    if a.ncols() != n || n == 0 {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    if !is_z_matrix(a) {
        return Err(Error::NotZMatrix);
    }
    if !is_irreducible(a) {
        return Err(Error::Reducible);
    }
    if n == 1 {
        return Ok(PerronPair { root: a[(0, 0)], vector: DVector::from_element(1, 1.0) });
    }
    let scale = linalg::max_abs(a);
    if linalg::asymmetry(a) == 0.0 {
        let eig = a.clone().symmetric_eigen();
        let (k, root) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, x)| if x < best.1 { (i, x) } else { best });
        let v = eig.eigenvectors.column(k).into_owned();
        return Ok(PerronPair { root, vector: fix_sign_and_normalize(v) });
    }
    if n <= DENSE_EIGEN_LIMIT {
        let root = a
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min);
        let shift = root - 1e-7 * scale;
        if let Some(v) = inverse_iteration(a, shift) {
            return Ok(PerronPair { root, vector: fix_sign_and_normalize(v) });
        }
    }
    collatz_wielandt_iteration(a).ok_or(Error::Reducible)
}

/// Smallest real part over the spectrum, for Z-matrices that are reducible.
fn min_real_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if linalg::asymmetry(a) == 0.0 {
        linalg::min_eigenvalue_sym(a)
    } else {
        a.clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Classify `a` as a nonsingular, singular or non M-matrix.
///
/// `tol` defaults to `PERRON_RTOL * max|a_ij|`.
pub fn classify_m(a: &DMatrix<f64>, tol: Option<f64>) -> MClass {
    let not_m = MClass { tag: MTag::NotM, perron: None };
    if a.nrows() != a.ncols() || a.nrows() == 0 || !is_z_matrix(a) {
        return not_m;
    }
    let tol = tol.unwrap_or(PERRON_RTOL * linalg::max_abs(a));
    let (root, perron) = if is_irreducible(a) {
        match perron(a) {
            Ok(p) => (p.root, Some(p)),
            Err(_) => return not_m,
        }
    } else {
        (min_real_eigenvalue(a), None)
    };
    let tag = if root > tol {
        MTag::NonsingularM
    } else if root >= -tol {
        MTag::SingularM
    } else {
        MTag::NotM
    };
    MClass { tag, perron }
}

/// Rounding floor used by the strict test: `16 n eps max|a_ij|`.
pub fn pd_rounding_floor(a: &DMatrix<f64>) -> f64 {
    16.0 * a.nrows() as f64 * f64::EPSILON * linalg::max_abs(a)
}

/// Strict positive definiteness: smallest eigenvalue above the rounding floor.
pub fn is_positive_definite(a: &DMatrix<f64>) -> Result<bool> {
    is_positive_definite_with(a, pd_rounding_floor(a))
}

/// Positive definiteness with an explicit threshold `pd_tol` on the smallest
/// eigenvalue; pass a small negative value for a semidefinite test.
pub fn is_positive_definite_with(a: &DMatrix<f64>, pd_tol: f64) -> Result<bool> {
    Ok(symmetric_min_eigenvalue(a)? > pd_tol)
}

/// Smallest eigenvalue of a (numerically) symmetric matrix.
pub fn symmetric_min_eigenvalue(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    let asym = linalg::asymmetry(a);
    if asym > PD_SYMMETRY_RTOL * linalg::max_abs(a) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(linalg::min_eigenvalue_sym(&linalg::symmetrize(a)))
}

/// The `(n+1) x (n+1)` block whose positive definiteness for some `nu > 0`
/// certifies that the demand `p_c` is infeasible:
///
/// ```text
/// [ [nu] Y_LL + Y_LL [nu]   [nu] I*      ]
/// [ ([nu] I*)^T             2 nu^T p_c   ]
/// ```
pub fn lmi_block(core: &GridCore, nu: &DVector<f64>, p_c: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = core.n();
    crate::error::check_len(n, nu.len())?;
    crate::error::check_len(n, p_c.len())?;
    if !linalg::all_positive(nu) {
        return Err(Error::NonpositiveNu);
    }
    if !linalg::all_finite(p_c) {
        return Err(Error::NonFinite);
    }
    let dn = linalg::diag(nu);
    let y = core.y_ll();
    let top = &dn * y + y * &dn;
    let side = nu.component_mul(core.i_star());
    let mut b = DMatrix::zeros(n + 1, n + 1);
    b.view_mut((0, 0), (n, n)).copy_from(&top);
    for i in 0..n {
        b[(i, n)] = side[i];
        b[(n, i)] = side[i];
    }
    b[(n, n)] = 2.0 * nu.dot(p_c);
    Ok(b)
}
