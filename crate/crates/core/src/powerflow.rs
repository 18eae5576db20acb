//! Core maps on a fixed grid.
//!
//! All vectors live on the load nodes. `V` is a load-voltage vector, `P` a
//! demand vector (positive = consumption). The demand drawn at `V` is
//! `P(V) = [V] Y_LL (V* - V)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::linalg;
use crate::matanalysis::{self, MTag};
use crate::network::KirchhoffPartition;

/// `psi` refuses to evaluate when `cond_1(g(mu))` exceeds this.
pub const PSI_CONDITION_LIMIT: f64 = 1e12;
/// Relative residual accepted for `Y_LL V* = I*`.
pub const OPEN_CIRCUIT_RTOL: f64 = 1e-10;

/// Operating point: strictly positive load voltages.
pub type OperatingPoint = DVector<f64>;
/// Constant power demands at the loads, any sign.
pub type DemandVector = DVector<f64>;

/// Immutable analysis context for one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCore {
    partition: KirchhoffPartition,
    v_s: DVector<f64>,
    i_star: DVector<f64>,
    v_star: DVector<f64>,
    p_max: DVector<f64>,
}

impl GridCore {
    pub fn n(&self) -> usize {
        self.i_star.len()
    }
    pub fn m(&self) -> usize {
        self.v_s.len()
    }
    pub fn partition(&self) -> &KirchhoffPartition {
        &self.partition
    }
    pub fn y_ll(&self) -> &DMatrix<f64> {
        &self.partition.y_ll
    }
    pub fn y_ls(&self) -> &DMatrix<f64> {
        &self.partition.y_ls
    }
    pub fn v_s(&self) -> &DVector<f64> {
        &self.v_s
    }
    /// Currents injected into the loads when they are grounded.
    pub fn i_star(&self) -> &DVector<f64> {
        &self.i_star
    }
    /// Open-circuit load voltages.
    pub fn v_star(&self) -> &DVector<f64> {
        &self.v_star
    }
    /// The unique demand maximizing `1^T P` over the feasible set.
    pub fn p_max(&self) -> &DVector<f64> {
        &self.p_max
    }
}

pub fn make_core(partition: KirchhoffPartition, v_s: DVector<f64>) -> Result<GridCore> {
    check_len(partition.n_sources(), v_s.len())?;
    if !linalg::all_positive(&v_s) {
        return Err(Error::NonpositiveSourceVoltage);
    }
    let i_star = -(&partition.y_ls * &v_s);
    if i_star.iter().any(|&x| x < 0.0) || i_star.iter().all(|&x| x == 0.0) {
        return Err(Error::CoreInvariantViolation(
            "I* must be nonnegative and not all zero".into(),
        ));
    }
    let v_star = linalg::solve(&partition.y_ll, &i_star)
        .ok_or_else(|| Error::CoreInvariantViolation("Y_LL is singular".into()))?;
    let resid = linalg::inf_norm(&(&partition.y_ll * &v_star - &i_star));
    if resid > OPEN_CIRCUIT_RTOL * linalg::inf_norm(&i_star) {
        return Err(Error::CoreInvariantViolation(format!(
            "open-circuit residual {resid:.3e} too large"
        )));
    }
    if !linalg::all_positive(&v_star) {
        return Err(Error::CoreInvariantViolation("V* must be positive".into()));
    }
    let p_max = v_star.component_mul(&i_star) * 0.25;
    Ok(GridCore { partition, v_s, i_star, v_star, p_max })
}

fn check_voltage(core: &GridCore, v: &DVector<f64>) -> Result<()> {
    check_len(core.n(), v.len())?;
    if linalg::all_positive(v) {
        Ok(())
    } else {
        Err(Error::NonpositiveVoltage)
    }
}

/// `P(V) = [V] Y_LL (V* - V)`.
pub fn injected_power(core: &GridCore, v: &DVector<f64>) -> Result<DemandVector> {
    check_voltage(core, v)?;
    Ok(v.component_mul(&(core.y_ll() * (core.v_star() - v))))
}

/// Derivative of [`injected_power`]: `[Y_LL (V* - V)] - [V] Y_LL`.
pub fn jacobian(core: &GridCore, v: &DVector<f64>) -> DMatrix<f64> {
    let y = core.y_ll();
    linalg::diag(&(y * (core.v_star() - v))) - linalg::diag(v) * y
}

/// `h(lambda) = ([lambda] Y_LL + Y_LL [lambda]) / 2`.
pub fn h_of(core: &GridCore, lambda: &DVector<f64>) -> DMatrix<f64> {
    let d = linalg::diag(lambda);
    let y = core.y_ll();
    (&d * y + y * &d) * 0.5
}

pub fn in_lambda(core: &GridCore, lambda: &DVector<f64>) -> bool {
    lambda.len() == core.n()
        && linalg::all_finite(lambda)
        && matanalysis::is_positive_definite(&h_of(core, lambda)).unwrap_or(false)
}

/// `g(mu) = [mu] Y_LL + [Y_LL mu]`.
pub fn g_of(core: &GridCore, mu: &DVector<f64>) -> DMatrix<f64> {
    let y = core.y_ll();
    linalg::diag(mu) * y + linalg::diag(&(y * mu))
}

/// Whether `g(mu)` is a nonsingular M-matrix. Such `mu` are always positive.
pub fn in_m(core: &GridCore, mu: &DVector<f64>) -> bool {
    mu.len() == core.n()
        && linalg::all_positive(mu)
        && matanalysis::classify_m(&g_of(core, mu), None).tag == MTag::NonsingularM
}

/// `phi(lambda) = h(lambda)^-1 [lambda] I* / 2`, a point of the boundary of
/// the stable operating region.
pub fn phi(core: &GridCore, lambda: &DVector<f64>) -> Result<OperatingPoint> {
    check_len(core.n(), lambda.len())?;
    if !in_lambda(core, lambda) {
        return Err(Error::LambdaNotAdmissible);
    }
    let rhs = lambda.component_mul(core.i_star()) * 0.5;
    linalg::solve(&h_of(core, lambda), &rhs).ok_or(Error::LambdaNotAdmissible)
}

/// `psi(mu) = g(mu)^-1 [mu] I*`.
pub fn psi(core: &GridCore, mu: &DVector<f64>) -> Result<OperatingPoint> {
    check_len(core.n(), mu.len())?;
    if !in_m(core, mu) {
        return Err(Error::MuNotAdmissible);
    }
    let g = g_of(core, mu);
    if linalg::condition_1(&g) > PSI_CONDITION_LIMIT {
        return Err(Error::MuNotAdmissible);
    }
    linalg::solve(&g, &mu.component_mul(core.i_star())).ok_or(Error::MuNotAdmissible)
}

fn check_nu(core: &GridCore, nu: &DVector<f64>) -> Result<()> {
    check_len(core.n(), nu.len())?;
    if nu.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) || nu.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidNu);
    }
    Ok(())
}

/// `chi(nu) = [psi(Y_LL^-1 nu)]^-1 Y_LL^-1 nu`, unnormalized.
///
/// The supporting-hyperplane normal of the boundary demand whose operating
/// point is `psi(Y_LL^-1 nu)`.
pub fn chi(core: &GridCore, nu: &DVector<f64>) -> Result<DVector<f64>> {
    check_nu(core, nu)?;
    let mu = linalg::solve(core.y_ll(), nu).ok_or(Error::InvalidNu)?;
    let v = linalg::solve(&g_of(core, &mu), &mu.component_mul(core.i_star()))
        .ok_or(Error::InvalidNu)?;
    if !linalg::all_positive(&v) {
        return Err(Error::InvalidNu);
    }
    Ok(mu.component_div(&v))
}

/// [`chi`] scaled to unit 1-norm.
pub fn chi_normalized(core: &GridCore, nu: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(linalg::normalize_l1(&chi(core, nu)?))
}

fn stacked(core: &GridCore, v: &DVector<f64>) -> DVector<f64> {
    let mut x = DVector::zeros(core.n() + core.m());
    x.rows_mut(0, core.n()).copy_from(v);
    x.rows_mut(core.n(), core.m()).copy_from(core.v_s());
    x
}

/// Total resistive loss `V^T Y V` over all lines.
pub fn dissipation(core: &GridCore, v: &DVector<f64>) -> Result<f64> {
    check_voltage(core, v)?;
    let x = stacked(core, v);
    Ok(x.dot(&(core.partition.full() * &x)))
}

/// Power delivered by each source: `[V_S] (Y_SL V + Y_SS V_S)`.
pub fn source_power(core: &GridCore, v: &DVector<f64>) -> Result<DVector<f64>> {
    check_voltage(core, v)?;
    let p = &core.partition;
    Ok(core.v_s().component_mul(&(&p.y_sl * v + &p.y_ss * core.v_s())))
}

/// Equivalent grid with one unit source and open-circuit voltages all one.
///
/// Operating points map as `V = [V*] V_hat`; demands are unchanged.
pub fn to_single_source(core: &GridCore) -> Result<GridCore> {
    let d = linalg::diag(core.v_star());
    let y_ll = &d * core.y_ll() * &d;
    let i_hat = core.v_star().component_mul(core.i_star());
    let y_ls = DMatrix::from_column_slice(core.n(), 1, (-&i_hat).as_slice());
    let y_ss = DMatrix::from_element(1, 1, i_hat.sum());
    let part = KirchhoffPartition::from_blocks(y_ll, y_ls, Some(y_ss))?;
    make_core(part, DVector::from_element(1, 1.0))
}

/// `P_c` solving the power-flow residual `[V] Y_LL (V - V*) + P_c = 0`.
pub fn residual(core: &GridCore, p_c: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    v.component_mul(&(core.y_ll() * (v - core.v_star()))) + p_c
}
