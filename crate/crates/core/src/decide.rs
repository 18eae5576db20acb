//! Combines the conditions into one feasibility decision with a record of
//! which condition settled it.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::feasibility::{self, InfeasibilityCertificate, NonnegDecision, NonnegVerdict, SimpsonPorco};
use crate::linalg;
use crate::operating_point::{self, ContinuationResult, SolveOptions, StabilityClass, Verdict};
use crate::par::Execution;
use crate::powerflow::GridCore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Cheap sufficient conditions first, then the exact tests.
    Auto,
    Continuation,
    /// Simplex test; demands with negative entries use their clamp.
    Nonneg,
    /// Certificate search only.
    Lmi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Interior,
    Boundary,
    Infeasible,
    Undecided,
}

impl Decision {
    /// Process exit code for this decision.
    pub fn exit_code(self) -> i32 {
        match self {
            Decision::Interior => 0,
            Decision::Infeasible => 2,
            Decision::Boundary => 3,
            Decision::Undecided => 4,
        }
    }
}

impl From<Verdict> for Decision {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Interior => Decision::Interior,
            Verdict::Boundary => Decision::Boundary,
            Verdict::Infeasible => Decision::Infeasible,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    NonpositiveDemand,
    SimpsonPorco,
    Bolognani,
    DominatedByPmax,
    TotalExceedsPmax,
    NonnegSimplex,
    ClampedNonneg,
    Continuation,
    LmiCertificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// The condition settled the decision.
    Decided,
    /// Evaluated and consistent, but an earlier condition had decided.
    Agrees,
    Inconclusive,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub condition: Condition,
    pub outcome: Outcome,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecideOptions {
    pub method: Method,
    pub solve: SolveOptions,
    pub resolution: usize,
    pub lmi_budget: usize,
    /// Hoelder exponent for the ball condition.
    pub bolognani_p: f64,
    pub exec: Execution,
}

impl Default for DecideOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            solve: SolveOptions::default(),
            resolution: 200,
            lmi_budget: 2000,
            bolognani_p: 2.0,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub decision: Decision,
    pub decided_by: Option<Condition>,
    pub provenance: Vec<ConditionRecord>,
    pub operating_point: Option<DVector<f64>>,
    pub stability: Option<StabilityClass>,
    pub continuation: Option<ContinuationResult>,
    pub nonneg: Option<NonnegDecision>,
    pub certificate: Option<InfeasibilityCertificate>,
}

struct Builder {
    decision: Option<(Decision, Condition)>,
    provenance: Vec<ConditionRecord>,
}

impl Builder {
    fn note(&mut self, condition: Condition, outcome: Outcome, detail: impl Into<String>) {
        self.provenance.push(ConditionRecord { condition, outcome, detail: detail.into() });
    }

    /// Record a condition that reached `decision`; the first one wins.
    fn settle(&mut self, condition: Condition, decision: Decision, detail: impl Into<String>) {
        let outcome = if self.decision.is_none() {
            self.decision = Some((decision, condition));
            Outcome::Decided
        } else {
            Outcome::Agrees
        };
        self.note(condition, outcome, detail);
    }

    fn open(&self) -> bool {
        self.decision.is_none()
    }
}

fn fmt_vec(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

/// Certificate from a candidate normal, falling back to a seeded search.
fn certify(core: &GridCore, p: &DVector<f64>, candidate: Option<DVector<f64>>, budget: usize) -> Option<InfeasibilityCertificate> {
    if let Some(nu) = candidate.as_ref() {
        if linalg::all_positive(nu) && feasibility::verify_certificate(core, nu, p).unwrap_or(false) {
            let b = crate::matanalysis::lmi_block(core, nu, p).ok()?;
            let min_eig = crate::matanalysis::symmetric_min_eigenvalue(&b).ok()?;
            return Some(InfeasibilityCertificate { nu: nu.clone(), min_eig });
        }
    }
    let seeds: Vec<DVector<f64>> = candidate.into_iter().collect();
    feasibility::find_certificate(core, p, budget, &seeds)
}

/// Decide where `p` lies relative to the feasible set.
pub fn decide(core: &GridCore, p: &DVector<f64>, opts: &DecideOptions) -> Result<FeasibilityReport> {
    check_len(core.n(), p.len())?;
    if !linalg::all_finite(p) {
        return Err(Error::NonFinite);
    }
    let mut b = Builder { decision: None, provenance: Vec::new() };
    let mut certificate = None;
    let mut nonneg = None;
    let nonneg_ok = p.iter().all(|&x| x >= 0.0);

    if opts.method == Method::Auto {
        if p.iter().all(|&x| x <= 0.0) {
            b.settle(Condition::NonpositiveDemand, Decision::Interior, "no load consumes power");
        }
        match feasibility::sufficient_simpson_porco(core, p)? {
            SimpsonPorco::Holds => b.settle(Condition::SimpsonPorco, Decision::Interior, "inner condition holds strictly"),
            SimpsonPorco::HoldsTight(alpha) => {
                b.settle(Condition::SimpsonPorco, Decision::Boundary, format!("demand is the vertex for loads {alpha:?}"))
            }
            SimpsonPorco::Fails => b.note(Condition::SimpsonPorco, Outcome::Inconclusive, "inner condition fails"),
        }
        let radius = feasibility::bolognani_radius(core, opts.bolognani_p)?;
        if feasibility::sufficient_bolognani(core, p, opts.bolognani_p)? {
            b.settle(
                Condition::Bolognani,
                Decision::Interior,
                format!("inside the p = {} ball of radius {radius:.6e}", opts.bolognani_p),
            );
        } else {
            b.note(Condition::Bolognani, Outcome::Inconclusive, format!("outside the ball of radius {radius:.6e}"));
        }
        if feasibility::dominates(p, core.p_max()) {
            b.settle(Condition::DominatedByPmax, Decision::Interior, "below P_max elementwise");
        } else {
            b.note(Condition::DominatedByPmax, Outcome::Inconclusive, "not below P_max");
        }
        let total = p.sum();
        let total_max = core.p_max().sum();
        if total > total_max {
            let ones = DVector::from_element(core.n(), 1.0 / core.n() as f64);
            certificate = certify(core, p, Some(ones), opts.lmi_budget);
            b.settle(
                Condition::TotalExceedsPmax,
                Decision::Infeasible,
                format!("total demand {total:.6e} exceeds {total_max:.6e}"),
            );
        } else {
            b.note(Condition::TotalExceedsPmax, Outcome::Inconclusive, "total demand within 1^T P_max");
        }
    }

    if matches!(opts.method, Method::Auto | Method::Nonneg) && (nonneg_ok || opts.method == Method::Nonneg) && b.open() {
        let clamped = p.map(|x| x.max(0.0));
        let cond = if nonneg_ok { Condition::NonnegSimplex } else { Condition::ClampedNonneg };
        let d = feasibility::nonneg_decide(core, &clamped, opts.resolution, opts.exec)?;
        let detail = format!("min margin {:.3e} at nu = {}", d.min_margin, fmt_vec(&d.worst_nu));
        match (d.verdict, nonneg_ok) {
            (NonnegVerdict::FeasibleInterior, _) => b.settle(cond, Decision::Interior, detail),
            (NonnegVerdict::Feasible, true) => b.settle(cond, Decision::Boundary, detail),
            (NonnegVerdict::Feasible, false) => b.settle(cond, Decision::Interior, detail),
            (NonnegVerdict::Infeasible, true) => {
                let normal = crate::powerflow::chi_normalized(core, &d.worst_nu).ok();
                certificate = certify(core, p, normal, opts.lmi_budget);
                b.settle(cond, Decision::Infeasible, detail);
            }
            (NonnegVerdict::Infeasible, false) => b.note(cond, Outcome::Inconclusive, detail),
        }
        nonneg = Some(d);
    }

    if opts.method == Method::Lmi {
        certificate = feasibility::find_certificate(core, p, opts.lmi_budget, &[]);
        match &certificate {
            Some(c) => b.settle(
                Condition::LmiCertificate,
                Decision::Infeasible,
                format!("block positive definite at nu = {}", fmt_vec(&c.nu)),
            ),
            None => b.note(Condition::LmiCertificate, Outcome::Inconclusive, "no certificate within budget"),
        }
    }

    // the continuation supplies the operating point and the ray margin
    let continuation = match operating_point::solve_desired(core, p, &opts.solve) {
        Ok(r) => {
            let detail = format!("theta* = {:.9e} ({:?})", r.theta_star, r.theta_kind);
            let verdict = Decision::from(r.verdict);
            match b.decision {
                None if opts.method == Method::Lmi => b.note(Condition::Continuation, Outcome::Agrees, detail),
                None => b.settle(Condition::Continuation, verdict, detail),
                Some((d, _)) if d == verdict => b.note(Condition::Continuation, Outcome::Agrees, detail),
                Some(_) => b.note(Condition::Continuation, Outcome::Inconclusive, detail),
            }
            Some(r)
        }
        Err(e) => {
            b.note(Condition::Continuation, Outcome::Failed, e.to_string());
            None
        }
    };
    let decision = b.decision.map_or(Decision::Undecided, |d| d.0);
    if decision == Decision::Infeasible && certificate.is_none() {
        let normal = continuation.as_ref().and_then(|r| r.fold.as_ref()).map(|f| f.normal.clone());
        certificate = certify(core, p, normal, opts.lmi_budget);
    }
    let operating_point = match decision {
        Decision::Interior | Decision::Boundary => continuation.as_ref().and_then(|r| r.v.clone()),
        _ => None,
    };
    let stability = operating_point
        .as_ref()
        .and_then(|v| {
            // boundary points are singular only up to the solver tolerance
            let tol = (decision == Decision::Boundary).then(|| 1e-6 * linalg::max_abs(core.y_ll()));
            operating_point::classify_with_tol(core, v, tol).ok()
        });
    Ok(FeasibilityReport {
        decision,
        decided_by: b.decision.map(|d| d.1),
        provenance: b.provenance,
        operating_point,
        stability,
        continuation,
        nonneg,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids;
    use approx::assert_relative_eq;

    fn v2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    #[test]
    fn auto_examples() {
        let c = grids::two_load();
        let o = DecideOptions::default();
        let r = decide(&c, &v2(0.1, 0.1), &o).unwrap();
        assert_eq!(r.decision, Decision::Interior);
        assert_eq!(r.decided_by, Some(Condition::SimpsonPorco));
        assert!(r.operating_point.is_some());

        let r = decide(&c, &v2(0.3, 0.3), &o).unwrap();
        assert_eq!(r.decision, Decision::Infeasible);
        let cert = r.certificate.unwrap();
        assert!(feasibility::verify_certificate(&c, &cert.nu, &v2(0.3, 0.3)).unwrap());

        let r = decide(&c, &v2(0.25, 0.25), &o).unwrap();
        assert_eq!(r.decision, Decision::Boundary);
        assert_relative_eq!(r.operating_point.unwrap(), v2(0.5, 0.5), epsilon = 1e-6);
        assert_eq!(r.stability, Some(StabilityClass::SemiStableBoundary));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Decision::Interior.exit_code(), 0);
        assert_eq!(Decision::Infeasible.exit_code(), 2);
        assert_eq!(Decision::Boundary.exit_code(), 3);
        assert_eq!(Decision::Undecided.exit_code(), 4);
    }

    #[test]
    fn methods_agree_on_two_load() {
        let c = grids::two_load();
        let cases = [v2(0.2, 0.1), v2(0.35, 0.01), v2(0.4, 0.0), v2(-1.0, 0.3), v2(0.3, 0.15)];
        for p in &cases {
            let auto = decide(&c, p, &DecideOptions::default()).unwrap().decision;
            let cont = decide(&c, p, &DecideOptions { method: Method::Continuation, ..Default::default() })
                .unwrap()
                .decision;
            assert_eq!(auto, cont, "{p:?}");
        }
    }

    #[test]
    fn lmi_method_is_one_sided() {
        let c = grids::two_load();
        let o = DecideOptions { method: Method::Lmi, ..Default::default() };
        assert_eq!(decide(&c, &v2(0.45, 0.0), &o).unwrap().decision, Decision::Infeasible);
        assert_eq!(decide(&c, &v2(0.1, 0.0), &o).unwrap().decision, Decision::Undecided);
    }

    #[test]
    fn nonneg_method_with_negative_entries() {
        let c = grids::two_load();
        let o = DecideOptions { method: Method::Nonneg, resolution: 100, ..Default::default() };
        let r = decide(&c, &v2(-1.0, 0.3), &o).unwrap();
        assert_eq!(r.decided_by, Some(Condition::ClampedNonneg));
        assert_eq!(r.decision, Decision::Interior);
    }
}
