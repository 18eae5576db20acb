//! Necessary and sufficient feasibility conditions and certificates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg;
use crate::matanalysis;
use crate::network::kron_reduce;
use crate::par::Execution;
use crate::powerflow::{self, GridCore};
use crate::simplex;

/// Grids for [`nonneg_decide`] are capped at this many points.
pub const MAX_GRID_POINTS: u128 = 1_000_000;
/// Subset enumeration limit for [`tight_points`].
pub const MAX_TIGHT_LOADS: usize = 16;

/// Supporting half-space `{y : lambda^T y <= ||phi(lambda)||^2_h}` and the
/// slack of a demand against it.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceCertificate {
    pub lambda: DVector<f64>,
    /// Negative means the demand is outside the half-space, hence infeasible.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibilityCertificate {
    pub nu: DVector<f64>,
    /// Smallest eigenvalue of the LMI block at `nu`; positive.
    pub min_eig: f64,
}

pub fn halfspace_margin(core: &GridCore, lambda: &DVector<f64>, p: &DVector<f64>) -> Result<HalfspaceCertificate> {
    check_len(core.n(), p.len())?;
    check_len(core.n(), lambda.len())?;
    if !linalg::all_finite(lambda) || lambda.iter().all(|&x| x == 0.0) {
        return Err(Error::LambdaNotAdmissible);
    }
    let lambda = linalg::normalize_l1(lambda);
    let phi = powerflow::phi(core, &lambda)?;
    let h = powerflow::h_of(core, &lambda);
    let margin = phi.dot(&(&h * &phi)) - lambda.dot(p);
    Ok(HalfspaceCertificate { lambda, margin })
}

fn lmi_min_eig(core: &GridCore, nu: &DVector<f64>, p: &DVector<f64>) -> Result<f64> {
    matanalysis::symmetric_min_eigenvalue(&matanalysis::lmi_block(core, nu, p)?)
}

/// `true` certifies that `p` is infeasible.
pub fn verify_certificate(core: &GridCore, nu: &DVector<f64>, p: &DVector<f64>) -> Result<bool> {
    let b = matanalysis::lmi_block(core, nu, p)?;
    matanalysis::is_positive_definite(&b)
}

/// Semidefinite variant: `true` certifies that `p` is not an interior point.
pub fn verify_certificate_semidefinite(core: &GridCore, nu: &DVector<f64>, p: &DVector<f64>) -> Result<bool> {
    let b = matanalysis::lmi_block(core, nu, p)?;
    let tol = -1e-10 * linalg::max_abs(&b);
    matanalysis::is_positive_definite_with(&b, tol)
}

/// Keeps search points strictly inside the simplex.
fn interior(nu: &DVector<f64>) -> DVector<f64> {
    let n = nu.len() as f64;
    nu * (1.0 - 1e-9) + DVector::from_element(nu.len(), 1e-9 / n)
}

/// Best-effort search for `nu > 0` making the LMI block positive definite.
///
/// The smallest eigenvalue of the block is concave in `nu`, so it is
/// maximized over the simplex from the center, `0.9`-mass corners, a coarse
/// grid and any caller `seeds`. `None` does not prove feasibility.
pub fn find_certificate(
    core: &GridCore,
    p: &DVector<f64>,
    budget: usize,
    seeds: &[DVector<f64>],
) -> Option<InfeasibilityCertificate> {
    let n = core.n();
    if p.len() != n || !linalg::all_finite(p) {
        return None;
    }
    let objective = |nu: &DVector<f64>| -> f64 {
        lmi_min_eig(core, &interior(nu), p).map_or(f64::INFINITY, |e| -e)
    };
    let accept = |nu: &DVector<f64>| -> Option<InfeasibilityCertificate> {
        let nu = interior(nu);
        if verify_certificate(core, &nu, p).ok()? {
            let min_eig = lmi_min_eig(core, &nu, p).ok()?;
            Some(InfeasibilityCertificate { nu, min_eig })
        } else {
            None
        }
    };
    let mut starts: Vec<DVector<f64>> = seeds
        .iter()
        .filter(|s| s.len() == n && s.iter().all(|&x| x >= 0.0 && x.is_finite()) && s.sum() > 0.0)
        .map(linalg::normalize_l1)
        .collect();
    starts.push(DVector::from_element(n, 1.0 / n as f64));
    if n > 1 {
        for i in 0..n {
            let mut c = DVector::from_element(n, 0.1 / (n - 1) as f64);
            c[i] = 0.9;
            starts.push(c);
        }
    }
    let mut used = 0usize;
    let mut scored: Vec<(f64, DVector<f64>)> = Vec::new();
    for s in &starts {
        if used >= budget {
            return None;
        }
        used += 1;
        let f = objective(s);
        if f < 0.0 {
            if let Some(c) = accept(s) {
                return Some(c);
            }
        }
        scored.push((f, s.clone()));
    }
    let res = simplex::capped_resolution(n, 8, (budget / 4).max(1) as u128);
    if n > 1 {
        for g in simplex::grid(n, res) {
            if used >= budget / 4 {
                break;
            }
            used += 1;
            let f = objective(&g);
            if f < 0.0 {
                if let Some(c) = accept(&g) {
                    return Some(c);
                }
            }
            scored.push((f, g));
        }
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = (1e-12 * (linalg::max_abs(core.y_ll()) + linalg::inf_norm(p))).max(f64::MIN_POSITIVE);
    for (_, start) in scored.iter().take(5) {
        if used >= budget || n == 1 {
            break;
        }
        let m = simplex::nelder_mead(&objective, start, 0.1, budget - used, 1e-15, |v| v < -scale);
        used += m.evaluations;
        if m.value < 0.0 {
            if let Some(c) = accept(&m.x) {
                return Some(c);
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NonnegVerdict {
    /// Feasible, within the decision band of the boundary.
    Feasible,
    FeasibleInterior,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonnegDecision {
    pub verdict: NonnegVerdict,
    /// Minimizer of `m(nu)` over the simplex.
    pub worst_nu: DVector<f64>,
    pub min_margin: f64,
    pub tolerance: f64,
    pub resolution: usize,
    pub evaluations: usize,
}

/// `m(nu) = V*^T nu / 2 - chi(nu)^T p`.
pub fn nonneg_margin(core: &GridCore, nu: &DVector<f64>, p: &DVector<f64>) -> Result<f64> {
    Ok(0.5 * nu.dot(core.v_star()) - powerflow::chi(core, nu)?.dot(p))
}

/// Exact test for nonnegative demands: `p` is feasible iff `m(nu) >= 0` on
/// the whole simplex. The minimum is searched on a barycentric grid with
/// `resolution` subdivisions per edge, then polished from the five worst
/// nodes.
pub fn nonneg_decide(core: &GridCore, p: &DVector<f64>, resolution: usize, exec: Execution) -> Result<NonnegDecision> {
    let n = core.n();
    check_len(n, p.len())?;
    if !linalg::all_finite(p) {
        return Err(Error::NonFinite);
    }
    if p.iter().any(|&x| x < 0.0) {
        return Err(Error::NegativeDemand);
    }
    let res = simplex::capped_resolution(n, resolution, MAX_GRID_POINTS);
    let nodes = simplex::grid(n, res);
    let values = exec.map(&nodes, |nu| nonneg_margin(core, nu, p).unwrap_or(f64::INFINITY));
    let mut evaluations = nodes.len();
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut best_nu = nodes[order[0]].clone();
    let mut best = values[order[0]];
    if n > 1 {
        let step = 1.0 / res as f64;
        let polished = exec.map(&order[..order.len().min(5)], |&i| {
            simplex::nelder_mead(
                |nu| nonneg_margin(core, nu, p).unwrap_or(f64::INFINITY),
                &nodes[i],
                step,
                400 * n,
                1e-16,
                |_| false,
            )
        });
        for m in polished {
            evaluations += m.evaluations;
            if m.value < best {
                best = m.value;
                best_nu = m.x;
            }
        }
    }
    let tolerance = 1e-9 * 1f64.max(linalg::inf_norm(core.v_star()));
    let verdict = if best < -tolerance {
        NonnegVerdict::Infeasible
    } else if best > tolerance {
        NonnegVerdict::FeasibleInterior
    } else {
        NonnegVerdict::Feasible
    };
    Ok(NonnegDecision { verdict, worst_nu: best_nu, min_margin: best, tolerance, resolution: res, evaluations })
}

/// Sufficient test for any demand: if the clamp `max(p, 0)` is feasible,
/// so is every demand below it.
pub fn sufficient_clamped_nonneg(core: &GridCore, p: &DVector<f64>, resolution: usize, exec: Execution) -> Result<bool> {
    let clamped = p.map(|x| x.max(0.0));
    Ok(nonneg_decide(core, &clamped, resolution, exec)?.verdict != NonnegVerdict::Infeasible)
}

/// `(V*^T Y V* / 4)^-1` with the diagonal scalings written out.
pub fn simpson_porco_matrix(core: &GridCore) -> Result<DMatrix<f64>> {
    let d = linalg::diag(core.v_star());
    linalg::inverse(&(&d * core.y_ll() * &d * 0.25)).ok_or(Error::SingularBlock)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimpsonPorco {
    Holds,
    /// The demand is the vertex of the inner region for this load subset and
    /// lies on the feasibility boundary.
    HoldsTight(Vec<usize>),
    /// Inconclusive.
    Fails,
}

/// Vertex of the inner feasible region for load subset `alpha`.
pub fn tight_point(core: &GridCore, alpha: &[usize]) -> Result<DVector<f64>> {
    let k = kron_reduce(core.y_ll(), alpha)?;
    let mut a: Vec<usize> = alpha.to_vec();
    a.sort_unstable();
    let va = DVector::from_iterator(a.len(), a.iter().map(|&i| core.v_star()[i]));
    let pa = va.component_mul(&(&k * &va)) * 0.25;
    let mut p = DVector::zeros(core.n());
    for (j, &i) in a.iter().enumerate() {
        p[i] = pa[j];
    }
    Ok(p)
}

/// All `2^n - 1` vertices, ordered by subset bitmask.
pub fn tight_points(core: &GridCore, exec: Execution) -> Result<Vec<(Vec<usize>, DVector<f64>)>> {
    let n = core.n();
    if n > MAX_TIGHT_LOADS {
        return Err(Error::TooManySubsets { n });
    }
    let masks: Vec<u32> = (1..(1u32 << n)).collect();
    exec.map(&masks, |&mask| {
        let alpha: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        tight_point(core, &alpha).map(|p| (alpha, p))
    })
    .into_iter()
    .collect()
}

pub fn sufficient_simpson_porco(core: &GridCore, p: &DVector<f64>) -> Result<SimpsonPorco> {
    check_len(core.n(), p.len())?;
    let a = simpson_porco_matrix(core)?;
    let x = &a * p.map(|v| v.max(0.0));
    if x.iter().any(|&v| v > 1.0 + 1e-12) {
        return Ok(SimpsonPorco::Fails);
    }
    // a vertex for alpha has x = 1 exactly on alpha
    let alpha: Vec<usize> = (0..core.n()).filter(|&i| (x[i] - 1.0).abs() <= 1e-9).collect();
    if !alpha.is_empty() {
        let t = tight_point(core, &alpha)?;
        let tol = 1e-9 * 1f64.max(linalg::inf_norm(core.p_max()));
        if (&t - p).amax() <= tol {
            return Ok(SimpsonPorco::HoldsTight(alpha));
        }
    }
    Ok(SimpsonPorco::Holds)
}

fn conjugate(p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidP { p });
    }
    Ok(if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    })
}

fn vec_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    } else if p == 1.0 {
        v.iter().map(|x| x.abs()).sum()
    } else {
        v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Row with the largest `q`-norm and that norm.
fn worst_row(a: &DMatrix<f64>, q: f64) -> (usize, f64) {
    (0..a.nrows())
        .map(|i| {
            let row: Vec<f64> = a.row(i).iter().copied().collect();
            (i, vec_norm(&row, q))
        })
        .fold((0, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best })
}

/// Radius of the `p`-norm ball around the origin certified feasible.
pub fn bolognani_radius(core: &GridCore, p: f64) -> Result<f64> {
    let q = conjugate(p)?;
    let a = simpson_porco_matrix(core)?;
    Ok(1.0 / worst_row(&a, q).1)
}

pub fn sufficient_bolognani(core: &GridCore, demand: &DVector<f64>, p: f64) -> Result<bool> {
    check_len(core.n(), demand.len())?;
    let r = bolognani_radius(core, p)?;
    Ok(vec_norm(demand.as_slice(), p) < r)
}

/// Demand on the ball boundary that also makes one row of the
/// Simpson-Porco test tight.
pub fn bolognani_extremal_point(core: &GridCore, p: f64) -> Result<DVector<f64>> {
    let q = conjugate(p)?;
    let a = simpson_porco_matrix(core)?;
    let (j, norm) = worst_row(&a, q);
    let v: DVector<f64> = a.row(j).transpose();
    if q.is_infinite() {
        let k = v.iamax();
        let mut out = DVector::zeros(v.len());
        out[k] = 1.0 / v[k];
        return Ok(out);
    }
    Ok(v.map(|x| x.powf(q - 1.0)) / norm.powf(q))
}

/// `low <= high` elementwise and `low != high`.
pub fn dominates(low: &DVector<f64>, high: &DVector<f64>) -> bool {
    low.len() == high.len() && low.iter().zip(high.iter()).all(|(a, b)| a <= b) && low != high
}
