//! Points of the feasibility boundary from three parameter families.
//!
//! * `lambda` with `h(lambda)` positive definite: `V = phi(lambda)`.
//! * `mu` with `g(mu)` a nonsingular M-matrix: `V = psi(mu)`.
//! * `nu` on the simplex: `mu = Y_LL^-1 nu`, covering the boundary part
//!   with nonnegative demands.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg;
use crate::par::Execution;
use crate::powerflow::{self, GridCore, OperatingPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lambda,
    Mu,
    Nu,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Lambda => "lambda",
            Family::Mu => "mu",
            Family::Nu => "nu",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    pub family: Family,
    /// The generating parameter, unit 1-norm.
    pub param: DVector<f64>,
    pub v: OperatingPoint,
    pub p: DVector<f64>,
    /// `||P(V) - p||_inf`, closed form against the direct evaluation.
    pub residual: f64,
}

fn finish(core: &GridCore, family: Family, param: DVector<f64>, v: DVector<f64>, p: DVector<f64>) -> Result<BoundaryPoint> {
    let direct = powerflow::injected_power(core, &v)?;
    let residual = (&direct - &p).amax();
    Ok(BoundaryPoint { family, param, v, p, residual })
}

fn normalized(x: &DVector<f64>) -> Option<DVector<f64>> {
    let s: f64 = x.iter().map(|v| v.abs()).sum();
    (s > 0.0 && s.is_finite()).then(|| x / s)
}

/// `V = phi(lambda)`, `P = [V][lambda]^-1 Y_LL [lambda] V`.
pub fn boundary_from_lambda(core: &GridCore, lambda: &DVector<f64>) -> Result<BoundaryPoint> {
    check_len(core.n(), lambda.len())?;
    let lambda = normalized(lambda).ok_or(Error::LambdaNotAdmissible)?;
    let v = powerflow::phi(core, &lambda)?;
    let lv = lambda.component_mul(&v);
    let p = v.component_mul(&(core.y_ll() * &lv).component_div(&lambda));
    finish(core, Family::Lambda, lambda, v, p)
}

fn from_mu_unchecked(core: &GridCore, mu: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let v = powerflow::psi(core, mu)?;
    let p = v.component_mul(&v).component_mul(&(core.y_ll() * mu).component_div(mu));
    Ok((v, p))
}

/// `V = psi(mu)`, `P = [V]^2 [mu]^-1 Y_LL mu`.
pub fn boundary_from_mu(core: &GridCore, mu: &DVector<f64>) -> Result<BoundaryPoint> {
    check_len(core.n(), mu.len())?;
    let mu = normalized(mu).ok_or(Error::MuNotAdmissible)?;
    let (v, p) = from_mu_unchecked(core, &mu)?;
    finish(core, Family::Mu, mu, v, p)
}

/// Boundary point with nonnegative demand generated by `nu >= 0`.
pub fn boundary_from_nu(core: &GridCore, nu: &DVector<f64>) -> Result<BoundaryPoint> {
    check_len(core.n(), nu.len())?;
    if nu.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidNu);
    }
    let nu = normalized(nu).ok_or(Error::InvalidNu)?;
    let mu = linalg::solve(core.y_ll(), &nu).ok_or(Error::InvalidNu)?;
    let mu = normalized(&mu).ok_or(Error::InvalidNu)?;
    let (v, p) = from_mu_unchecked(core, &mu)?;
    finish(core, Family::Nu, nu, v, p)
}

/// `mu = [lambda] phi(lambda)`, normalized.
pub fn lambda_to_mu(core: &GridCore, lambda: &DVector<f64>) -> Result<DVector<f64>> {
    let v = powerflow::phi(core, lambda)?;
    normalized(&lambda.component_mul(&v)).ok_or(Error::LambdaNotAdmissible)
}

/// `lambda = [psi(mu)]^-1 mu`, normalized.
pub fn mu_to_lambda(core: &GridCore, mu: &DVector<f64>) -> Result<DVector<f64>> {
    let v = powerflow::psi(core, mu)?;
    normalized(&mu.component_div(&v)).ok_or(Error::MuNotAdmissible)
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeRadius { r })
    }
}

/// `phi(lambda) + r h(lambda)^-1 lambda`: stable for `r > 0`, on the
/// boundary for `r = 0`.
pub fn point_in_d(core: &GridCore, lambda: &DVector<f64>, r: f64) -> Result<OperatingPoint> {
    check_radius(r)?;
    let v = powerflow::phi(core, lambda)?;
    let step = linalg::solve(&powerflow::h_of(core, lambda), lambda).ok_or(Error::LambdaNotAdmissible)?;
    Ok(v + step * r)
}

/// `g(mu)^-1 [mu] (I* + r 1)`.
pub fn point_in_d_dual(core: &GridCore, mu: &DVector<f64>, r: f64) -> Result<OperatingPoint> {
    check_radius(r)?;
    let base = powerflow::psi(core, mu)?;
    if r == 0.0 {
        return Ok(base);
    }
    let step = linalg::solve(&powerflow::g_of(core, mu), mu).ok_or(Error::MuNotAdmissible)?;
    Ok(base + step * r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub points: Vec<BoundaryPoint>,
    /// Parameters that were admissible but too ill-conditioned to evaluate.
    pub skipped: Vec<DVector<f64>>,
}

fn admissible(core: &GridCore, family: Family, x: &DVector<f64>) -> bool {
    match family {
        Family::Lambda => powerflow::in_lambda(core, x),
        Family::Mu => powerflow::in_m(core, x),
        Family::Nu => true,
    }
}

fn evaluate(core: &GridCore, family: Family, x: &DVector<f64>) -> Result<BoundaryPoint> {
    match family {
        Family::Lambda => boundary_from_lambda(core, x),
        Family::Mu => boundary_from_mu(core, x),
        Family::Nu => boundary_from_nu(core, x),
    }
}

/// Admissible interval of `t` for `(t, 1 - t)`, by bisection from `t = 1/2`.
fn admissible_interval(core: &GridCore, family: Family) -> (f64, f64) {
    let ok = |t: f64| admissible(core, family, &DVector::from_vec(vec![t, 1.0 - t]));
    let edge = |mut inside: f64, mut outside: f64| {
        if ok(outside) {
            return outside;
        }
        while (outside - inside).abs() > 1e-13 {
            let mid = 0.5 * (inside + outside);
            if ok(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    (edge(0.5, 0.0), edge(0.5, 1.0))
}

/// Uniform sample from the simplex.
fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    let e = DVector::from_fn(n, |_, _| -(1.0 - rng.gen::<f64>()).ln());
    let s = e.sum();
    e / s
}

/// Sample `samples` boundary points. `nu` uses a barycentric grid with at
/// most `samples` nodes; `lambda` and `mu` use a uniform sweep of the
/// admissible interval for two loads and seeded rejection sampling above.
/// Two-load sweeps are sorted by the first demand coordinate.
pub fn sweep_boundary(core: &GridCore, family: Family, samples: usize, seed: u64, exec: Execution) -> Sweep {
    let n = core.n();
    let samples = samples.max(1);
    let params: Vec<DVector<f64>> = if n == 1 {
        vec![DVector::from_element(1, 1.0)]
    } else {
        match family {
            Family::Nu => {
                let mut res = 1;
                while crate::simplex::grid_size(n, res + 1) <= samples as u128 {
                    res += 1;
                }
                crate::simplex::grid(n, res)
            }
            _ if n == 2 => {
                let (a, b) = admissible_interval(core, family);
                (0..samples)
                    .map(|k| {
                        let t = a + (b - a) * (k as f64 + 0.5) / samples as f64;
                        DVector::from_vec(vec![t, 1.0 - t])
                    })
                    .collect()
            }
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut out = Vec::with_capacity(samples);
                let mut tries = 0usize;
                while out.len() < samples && tries < 1000 * samples {
                    tries += 1;
                    let x = dirichlet(&mut rng, n);
                    if admissible(core, family, &x) {
                        out.push(x);
                    }
                }
                out
            }
        }
    };
    let evaluated = exec.map(&params, |x| evaluate(core, family, x));
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (x, r) in params.into_iter().zip(evaluated) {
        match r {
            Ok(bp) => points.push(bp),
            Err(_) => skipped.push(x),
        }
    }
    if n == 2 {
        points.sort_by(|a, b| a.p[0].total_cmp(&b.p[0]));
    }
    Sweep { points, skipped }
}
