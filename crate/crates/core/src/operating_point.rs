//! High-voltage operating point by continuation along the demand ray.
//!
//! The path `gamma(theta)` starts at the open-circuit voltages and satisfies
//! `P(gamma(theta)) = theta * P`, i.e. `dgamma/dtheta = J(gamma)^-1 P`. It
//! stays in the stable region until the Jacobian turns singular at the ray
//! margin `theta*`, which is detected through the Perron root of `-J`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{self, Factor};
use crate::matanalysis::{self, MTag};
use crate::par::Execution;
use crate::powerflow::{self, jacobian, GridCore, OperatingPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub atol: f64,
    pub rtol: f64,
    /// `|theta* - 1| <= boundary_band` is reported as a boundary demand.
    pub boundary_band: f64,
    /// Integration stops here when no fold has been met.
    pub theta_max: f64,
    pub record_trace: bool,
    pub max_steps: usize,
    /// Fold location starts once the Perron root drops below this fraction
    /// of its open-circuit value.
    pub switch_fraction: f64,
    pub initial_step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            atol: 1e-8,
            rtol: 1e-8,
            boundary_band: 1e-6,
            theta_max: 1e6,
            record_trace: false,
            max_steps: 100_000,
            switch_fraction: 1e-2,
            initial_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Interior,
    Boundary,
    Infeasible,
}

/// How `theta_star` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaKind {
    /// Located singular point of the path.
    Fold,
    /// No fold before `theta_max`; `theta_star` is a lower bound.
    LowerBound,
    /// Zero demand: every multiple is feasible. `theta_star` is `f64::MAX`.
    Unbounded,
}

/// The singular point ending the continuation path.
#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    pub theta: f64,
    pub v: DVector<f64>,
    /// Positive kernel vector of the Jacobian, unit 1-norm.
    pub kernel: DVector<f64>,
    /// Normal of the supporting hyperplane at `theta * P`, unit 1-norm.
    pub normal: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub theta: f64,
    pub v: DVector<f64>,
    pub perron_root: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    pub theta_star: f64,
    pub theta_kind: ThetaKind,
    pub verdict: Verdict,
    /// Operating point for the requested demand (the fold point for
    /// boundary demands); `None` when infeasible.
    pub v: Option<OperatingPoint>,
    pub fold: Option<Fold>,
    pub trace: Option<Vec<TracePoint>>,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityClass {
    Stable,
    SemiStableBoundary,
    Outside,
}

pub const NEWTON_MAX_ITER: usize = 30;

fn newton_tol(core: &GridCore, p: &DVector<f64>) -> f64 {
    1e-10 * 1f64.max(linalg::inf_norm(p)).max(linalg::inf_norm(core.p_max()))
}

/// Plain Newton on `[V] Y_LL (V - V*) + P = 0`, keeping `V` positive by
/// step halving. `None` on failure.
fn newton(core: &GridCore, p: &DVector<f64>, v0: &DVector<f64>, tol: f64, max_iter: usize) -> Option<DVector<f64>> {
    let mut v = v0.clone();
    let mut r = powerflow::residual(core, p, &v);
    for _ in 0..max_iter {
        if linalg::inf_norm(&r) <= tol {
            return Some(v);
        }
        let f = Factor::new(&jacobian(core, &v))?;
        // dr/dV = -J
        let step = f.solve(&r)?;
        let mut t = 1.0;
        loop {
            let cand = &v + &step * t;
            if linalg::all_positive(&cand) {
                v = cand;
                break;
            }
            t *= 0.5;
            if t < 1e-6 {
                return None;
            }
        }
        r = powerflow::residual(core, p, &v);
    }
    (linalg::inf_norm(&r) <= tol).then_some(v)
}

/// Newton refinement of an approximate operating point.
pub fn newton_refine(core: &GridCore, p: &DVector<f64>, v0: &DVector<f64>) -> Result<OperatingPoint> {
    check_len(core.n(), p.len())?;
    check_len(core.n(), v0.len())?;
    if !linalg::all_positive(v0) {
        return Err(Error::NonpositiveVoltage);
    }
    if !linalg::all_finite(p) {
        return Err(Error::NonFinite);
    }
    let tol = newton_tol(core, p);
    let mut v = v0.clone();
    for it in 0..=NEWTON_MAX_ITER {
        let f = Factor::new(&jacobian(core, &v)).ok_or(Error::SingularJacobian)?;
        let r = powerflow::residual(core, p, &v);
        let rn = linalg::inf_norm(&r);
        if rn <= tol {
            // one more step is nearly free and usually hits rounding level
            if let Some(polished) = f.solve(&r).map(|step| &v + step) {
                let pn = linalg::inf_norm(&powerflow::residual(core, p, &polished));
                if linalg::all_positive(&polished) && pn < rn {
                    return Ok(polished);
                }
            }
            return Ok(v);
        }
        if it == NEWTON_MAX_ITER {
            break;
        }
        let step = f.solve(&r).ok_or(Error::SingularJacobian)?;
        let mut t = 1.0;
        while !linalg::all_positive(&(&v + &step * t)) {
            t *= 0.5;
            if t < 1e-6 {
                return Err(Error::NoConvergence { iterations: it + 1 });
            }
        }
        v += step * t;
    }
    Err(Error::NoConvergence { iterations: NEWTON_MAX_ITER })
}

/// Stability class from the sign of the Perron root of `-J(V)`.
pub fn classify(core: &GridCore, v: &DVector<f64>) -> Result<StabilityClass> {
    classify_with_tol(core, v, None)
}

/// [`classify`] with an explicit band on the Perron root.
pub fn classify_with_tol(core: &GridCore, v: &DVector<f64>, tol: Option<f64>) -> Result<StabilityClass> {
    check_len(core.n(), v.len())?;
    if !linalg::all_positive(v) {
        return Err(Error::NonpositiveVoltage);
    }
    Ok(match matanalysis::classify_m(&-jacobian(core, v), tol).tag {
        MTag::NonsingularM => StabilityClass::Stable,
        MTag::SingularM => StabilityClass::SemiStableBoundary,
        MTag::NotM => StabilityClass::Outside,
    })
}

fn perron_of_neg_jacobian(core: &GridCore, v: &DVector<f64>) -> Option<matanalysis::PerronPair> {
    matanalysis::perron(&-jacobian(core, v)).ok()
}

// Dormand-Prince 5(4) tableau; the last row of A holds the 5th-order weights.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Path<'a> {
    core: &'a GridCore,
    /// `P / c`, scaled so that `||dir||_inf = ||P_max||_inf`; `theta = s / c`.
    dir: DVector<f64>,
    c: f64,
    opts: SolveOptions,
    s: f64,
    v: DVector<f64>,
    rho: f64,
    rho0: f64,
    h: f64,
    steps: usize,
    scale: f64,
    trace: Option<Vec<TracePoint>>,
}

enum LegEnd {
    Reached,
    NearFold,
}

impl<'a> Path<'a> {
    fn rhs(&self, v: &DVector<f64>) -> Option<DVector<f64>> {
        if !linalg::all_positive(v) {
            return None;
        }
        linalg::solve(&jacobian(self.core, v), &self.dir)
    }

    /// One embedded step; returns the 5th-order point and the scaled error.
    fn dp_step(&self, h: f64) -> Option<(DVector<f64>, f64)> {
        let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);
        k.push(self.rhs(&self.v)?);
        for i in 1..7 {
            let mut y = self.v.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[i][j] != 0.0 {
                    y.axpy(h * A[i][j], kj, 1.0);
                }
            }
            k.push(self.rhs(&y)?);
        }
        let mut y5 = self.v.clone();
        let mut err = DVector::zeros(self.v.len());
        for (i, ki) in k.iter().enumerate() {
            let b5 = if i < 6 { A[6][i] } else { 0.0 };
            y5.axpy(h * b5, ki, 1.0);
            err.axpy(h * (b5 - B4[i]), ki, 1.0);
        }
        let mut e = 0.0_f64;
        for i in 0..y5.len() {
            let sc = self.opts.atol + self.opts.rtol * y5[i].abs().max(self.v[i].abs());
            e = e.max(err[i].abs() / sc);
        }
        Some((y5, e))
    }

    fn project(&self, s: f64, v: &DVector<f64>) -> Option<DVector<f64>> {
        let target = &self.dir * s;
        let tol = 1e-12 * self.scale.max(s * linalg::inf_norm(&self.dir));
        newton(self.core, &target, v, tol, 8)
    }

    fn record(&mut self) {
        let theta_scale = self.theta_of(1.0);
        if let Some(t) = self.trace.as_mut() {
            t.push(TracePoint { theta: self.s * theta_scale, v: self.v.clone(), perron_root: self.rho });
        }
    }

    fn theta_of(&self, s: f64) -> f64 {
        s / self.c
    }

    fn run_to(&mut self, s_target: f64, prev: &mut Option<(f64, DVector<f64>, f64)>) -> Result<LegEnd> {
        while self.s < s_target {
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(Error::StepFailure {
                    theta: self.theta_of(self.s),
                    reason: format!("more than {} steps", self.opts.max_steps),
                });
            }
            let clipped = self.h >= s_target - self.s;
            let h = if clipped { s_target - self.s } else { self.h };
            let mut accepted = false;
            match self.dp_step(h) {
                Some((y, err)) if err <= 1.0 => {
                    let s_new = if clipped { s_target } else { self.s + h };
                    if let Some(y) = self.project(s_new, &y) {
                        if let Some(p) = perron_of_neg_jacobian(self.core, &y) {
                            if p.root > 0.0 {
                                *prev = Some((self.s, self.v.clone(), self.rho));
                                self.s = s_new;
                                self.v = y;
                                self.rho = p.root;
                                self.record();
                                accepted = true;
                                let grow = if err > 0.0 { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) } else { 5.0 };
                                if !clipped {
                                    self.h = h * grow;
                                }
                                if self.rho < self.opts.switch_fraction * self.rho0 {
                                    return Ok(LegEnd::NearFold);
                                }
                            }
                        }
                    }
                    if !accepted {
                        self.h = h * 0.5;
                    }
                }
                Some((_, err)) => self.h = h * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9),
                None => self.h = h * 0.25,
            }
            if !accepted && self.h < 1e-14 * self.s.max(1.0) {
                return Ok(LegEnd::NearFold);
            }
        }
        Ok(LegEnd::Reached)
    }

    /// Newton on `[P(V) - s dir; J(V) w; 1^T w - 1] = 0`.
    fn fold_newton(&self, s0: f64, v0: &DVector<f64>, w0: &DVector<f64>) -> Option<(f64, DVector<f64>, DVector<f64>)> {
        let n = v0.len();
        let core = self.core;
        let (mut s, mut v, mut w) = (s0, v0.clone(), linalg::normalize_l1(w0));
        let tol = 1e-13 * self.scale.max(s0 * linalg::inf_norm(&self.dir));
        for _ in 0..60 {
            let j = jacobian(core, &v);
            let f1 = powerflow::injected_power(core, &v).ok()? - &self.dir * s;
            let f2 = &j * &w;
            let f3 = w.sum() - 1.0;
            let res = linalg::inf_norm(&f1).max(linalg::inf_norm(&f2)).max(f3.abs());
            if res <= tol {
                return Some((s, v, w));
            }
            // row order: f1 (n), f2 (n), f3 (1); unknowns: v (n), s, w (n)
            let mut f = DVector::zeros(2 * n + 1);
            f.rows_mut(0, n).copy_from(&f1);
            f.rows_mut(n, n).copy_from(&f2);
            f[2 * n] = f3;
            let mut jac = DMatrix::zeros(2 * n + 1, 2 * n + 1);
            jac.view_mut((0, 0), (n, n)).copy_from(&j);
            for i in 0..n {
                jac[(i, n)] = -self.dir[i];
                jac[(2 * n, n + 1 + i)] = 1.0;
            }
            jac.view_mut((n, 0), (n, n)).copy_from(&-powerflow::g_of(core, &w));
            jac.view_mut((n, n + 1), (n, n)).copy_from(&j);
            let delta = linalg::solve(&jac, &f)?;
            v -= delta.rows(0, n);
            s -= delta[n];
            w -= delta.rows(n + 1, n);
            if !linalg::all_positive(&v) || !s.is_finite() {
                return None;
            }
        }
        None
    }

    /// Largest `s` reachable by Newton on the stable branch, by step halving.
    fn march_to_fold(&self, s0: f64, v0: &DVector<f64>, guess: f64) -> (f64, DVector<f64>) {
        let (mut lo, mut v_lo) = (s0, v0.clone());
        let mut ds = guess.max(1e-8 * s0.max(1.0));
        let mut iters = 0;
        while ds > 1e-10 * lo.max(1.0) && iters < 400 {
            iters += 1;
            let s = lo + ds;
            match self.project(s, &v_lo) {
                Some(v) if perron_of_neg_jacobian(self.core, &v).is_some_and(|p| p.root > 0.0) => {
                    lo = s;
                    v_lo = v;
                }
                _ => ds *= 0.5,
            }
        }
        (lo, v_lo)
    }

    fn locate_fold(&self, prev: &Option<(f64, DVector<f64>, f64)>) -> Result<(f64, DVector<f64>, DVector<f64>)> {
        let (s_k, v_k) = (self.s, self.v.clone());
        let w_k = perron_of_neg_jacobian(self.core, &v_k)
            .map(|p| p.vector)
            .unwrap_or_else(|| DVector::from_element(v_k.len(), 1.0 / v_k.len() as f64));
        let slack = 1e-9 * s_k.max(1.0);
        if let Some((s, v, w)) = self.fold_newton(s_k, &v_k, &w_k) {
            let w = if w.sum() < 0.0 { -w } else { w };
            let root = perron_of_neg_jacobian(self.core, &v).map(|p| p.root.abs());
            if s >= s_k - slack
                && w.iter().all(|&x| x > 0.0)
                && root.is_some_and(|r| r <= 1e-6 * self.rho0.max(1e-300))
            {
                return Ok((s.max(s_k), v, linalg::normalize_l1(&w)));
            }
        }
        // rho^2 is roughly linear in s near a quadratic fold
        let guess = match prev {
            Some((s_p, _, rho_p)) if rho_p > &self.rho => {
                (self.rho * self.rho) * (s_k - s_p) / (rho_p * rho_p - self.rho * self.rho)
            }
            _ => 1e-3 * s_k.max(1.0),
        };
        let (s, v) = self.march_to_fold(s_k, &v_k, guess);
        let p = perron_of_neg_jacobian(self.core, &v).ok_or_else(|| Error::StepFailure {
            theta: self.theta_of(s),
            reason: "could not locate the fold".into(),
        })?;
        Ok((s, v, p.vector))
    }

    /// Operating point at `s_target < s_fold` when the path was left early.
    fn back_fill(&self, s_target: f64, s_k: f64, v_k: &DVector<f64>, s_f: f64, v_f: &DVector<f64>) -> Result<DVector<f64>> {
        let stable = |v: &DVector<f64>| perron_of_neg_jacobian(self.core, v).is_some_and(|p| p.root > 0.0);
        if s_f > s_k {
            let frac = ((s_f - s_target) / (s_f - s_k)).max(0.0).sqrt();
            let guess = v_f + (v_k - v_f) * frac;
            if linalg::all_positive(&guess) {
                if let Some(v) = self.project(s_target, &guess) {
                    if stable(&v) {
                        return Ok(v);
                    }
                }
            }
        }
        // natural-parameter continuation from the last accepted point
        let (mut s, mut v) = (s_k, v_k.clone());
        let mut ds = s_target - s_k;
        let mut iters = 0;
        while s < s_target && iters < 200 {
            iters += 1;
            let next = (s + ds).min(s_target);
            match self.project(next, &v) {
                Some(y) if stable(&y) => {
                    s = next;
                    v = y;
                }
                _ => ds *= 0.5,
            }
        }
        if s < s_target {
            return Err(Error::StepFailure { theta: self.theta_of(s), reason: "could not reach theta = 1".into() });
        }
        Ok(v)
    }
}

/// Follow the demand ray from the origin and decide where `P` lies.
pub fn solve_desired(core: &GridCore, p: &DVector<f64>, opts: &SolveOptions) -> Result<ContinuationResult> {
    check_len(core.n(), p.len())?;
    if !linalg::all_finite(p) {
        return Err(Error::NonFinite);
    }
    let p_norm = linalg::inf_norm(p);
    let rho0 = perron_of_neg_jacobian(core, core.v_star())
        .map(|p| p.root)
        .ok_or_else(|| Error::CoreInvariantViolation("-J(V*) has no Perron root".into()))?;
    let start_trace = opts
        .record_trace
        .then(|| vec![TracePoint { theta: 0.0, v: core.v_star().clone(), perron_root: rho0 }]);
    if p_norm == 0.0 {
        return Ok(ContinuationResult {
            theta_star: f64::MAX,
            theta_kind: ThetaKind::Unbounded,
            verdict: Verdict::Interior,
            v: Some(core.v_star().clone()),
            fold: None,
            trace: start_trace,
            steps: 0,
        });
    }
    let pm = linalg::inf_norm(core.p_max());
    let c = p_norm / pm;
    let mut path = Path {
        core,
        dir: p / c,
        c,
        opts: *opts,
        s: 0.0,
        v: core.v_star().clone(),
        rho: rho0,
        rho0,
        h: opts.initial_step,
        steps: 0,
        scale: 1f64.max(pm),
        trace: start_trace,
    };
    let s_one = c;
    let s_end = (opts.theta_max * c).max(s_one);
    let mut prev = None;
    let mut v_one = None;
    let mut end = path.run_to(s_one, &mut prev)?;
    if matches!(end, LegEnd::Reached) {
        v_one = Some(path.v.clone());
        end = path.run_to(s_end, &mut prev)?;
    }
    let finish = |path: Path, theta_star, theta_kind, verdict, v, fold| ContinuationResult {
        theta_star,
        theta_kind,
        verdict,
        v,
        fold,
        trace: path.trace,
        steps: path.steps,
    };
    if matches!(end, LegEnd::Reached) {
        let theta = path.theta_of(path.s);
        return Ok(finish(path, theta, ThetaKind::LowerBound, Verdict::Interior, v_one, None));
    }
    let (s_f, v_f, w) = path.locate_fold(&prev)?;
    let theta_star = path.theta_of(s_f);
    let normal = linalg::normalize_l1(&w.component_div(&v_f));
    let fold = Fold { theta: theta_star, v: v_f.clone(), kernel: w, normal };
    if let Some(t) = path.trace.as_mut() {
        t.push(TracePoint { theta: theta_star, v: v_f.clone(), perron_root: 0.0 });
    }
    let band = opts.boundary_band;
    if (theta_star - 1.0).abs() <= band {
        Ok(finish(path, theta_star, ThetaKind::Fold, Verdict::Boundary, Some(v_f), Some(fold)))
    } else if theta_star < 1.0 {
        Ok(finish(path, theta_star, ThetaKind::Fold, Verdict::Infeasible, None, Some(fold)))
    } else {
        let v = match v_one {
            Some(v) => v,
            None => {
                let (s_k, v_k) = (path.s, path.v.clone());
                path.back_fill(s_one, s_k, &v_k, s_f, &v_f)?
            }
        };
        Ok(finish(path, theta_star, ThetaKind::Fold, Verdict::Interior, Some(v), Some(fold)))
    }
}

/// [`solve_desired`] over many demands.
pub fn solve_batch(
    core: &GridCore,
    demands: &[DVector<f64>],
    opts: &SolveOptions,
    exec: Execution,
) -> Vec<Result<ContinuationResult>> {
    exec.map(demands, |p| solve_desired(core, p, opts))
}

/// Damped Newton used by the oracle: backtracks on the residual norm.
fn damped_newton(core: &GridCore, p: &DVector<f64>, v0: &DVector<f64>, tol: f64) -> Option<DVector<f64>> {
    let mut v = v0.clone();
    let mut r = powerflow::residual(core, p, &v);
    let mut rn = linalg::inf_norm(&r);
    for _ in 0..200 {
        if rn <= tol {
            return Some(v);
        }
        let step = Factor::new(&jacobian(core, &v))?.solve(&r)?;
        let mut t = 1.0;
        loop {
            let cand = &v + &step * t;
            if linalg::all_positive(&cand) {
                let rc = powerflow::residual(core, p, &cand);
                let rcn = linalg::inf_norm(&rc);
                if rcn < (1.0 - 1e-4 * t) * rn || rcn <= tol {
                    v = cand;
                    r = rc;
                    rn = rcn;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-10 {
                return None;
            }
        }
    }
    (rn <= tol).then_some(v)
}

/// All positive solutions of the power-flow equations for `n <= 3`.
///
/// `n = 1` is solved in closed form. For `n = 2, 3` damped Newton is started
/// from a `9^n` grid of positive voltages; the result is best effort and
/// deduplicated at `1e-6 ||V*||_inf`. Solutions are sorted by decreasing
/// first voltage.
pub fn all_solutions_oracle(core: &GridCore, p: &DVector<f64>, exec: Execution) -> Result<Vec<OperatingPoint>> {
    let n = core.n();
    if n > 3 {
        return Err(Error::OracleTooLarge { n });
    }
    check_len(n, p.len())?;
    if !linalg::all_finite(p) {
        return Err(Error::NonFinite);
    }
    let vs = core.v_star();
    if n == 1 {
        let y = core.y_ll()[(0, 0)];
        let disc = vs[0] * vs[0] - 4.0 * p[0] / y;
        let mut out = Vec::new();
        if disc == 0.0 {
            out.push(DVector::from_element(1, vs[0] / 2.0));
        } else if disc > 0.0 {
            for root in [(vs[0] + disc.sqrt()) / 2.0, (vs[0] - disc.sqrt()) / 2.0] {
                if root > 0.0 {
                    out.push(DVector::from_element(1, root));
                }
            }
        }
        return Ok(out);
    }
    let vmax = linalg::inf_norm(vs);
    let neg = p.iter().fold(0.0_f64, |m, &x| m.max(-x));
    let upper = vmax * (2.0 + 2.0 * (neg / linalg::inf_norm(core.p_max())).sqrt());
    let lower = 1e-3 * vs.min();
    const K: usize = 9;
    // geometric spacing resolves low-voltage solutions near zero
    let ratio = (upper / lower).powf(1.0 / (K - 1) as f64);
    let levels: Vec<f64> = (0..K).map(|k| lower * ratio.powi(k as i32)).collect();
    let seeds: Vec<DVector<f64>> = (0..K.pow(n as u32))
        .map(|mut idx| {
            DVector::from_fn(n, |_, _| {
                let l = levels[idx % K];
                idx /= K;
                l
            })
        })
        .collect();
    let tol = 1e-12 * 1f64.max(linalg::inf_norm(p)).max(linalg::inf_norm(core.p_max()));
    let found = exec.map(&seeds, |v0| damped_newton(core, p, v0, tol));
    let dedup = 1e-6 * vmax;
    let mut sols: Vec<DVector<f64>> = Vec::new();
    for v in found.into_iter().flatten() {
        if !sols.iter().any(|s| (s - &v).amax() <= dedup) {
            sols.push(v);
        }
    }
    sols.sort_by(|a, b| b[0].total_cmp(&a[0]));
    Ok(sols)
}
