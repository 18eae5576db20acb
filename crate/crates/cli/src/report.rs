//! Serializable reports. JSON is the canonical form; the text output is
//! rendered from these structs.

use dcpf::decide::{Condition, ConditionRecord};
use dcpf::operating_point::{ContinuationResult, ThetaKind};
use dcpf::{Decision, FeasibilityReport, GridCore, StabilityClass, Verdict};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

fn vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub n: usize,
    pub m: usize,
    pub v_star: Vec<f64>,
    pub i_star: Vec<f64>,
    pub p_max: Vec<f64>,
}

impl GridSummary {
    pub fn of(core: &GridCore) -> Self {
        Self {
            n: core.n(),
            m: core.m(),
            v_star: vec(core.v_star()),
            i_star: vec(core.i_star()),
            p_max: vec(core.p_max()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub nu: Vec<f64>,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayReport {
    pub theta_star: f64,
    pub theta_kind: ThetaKind,
    pub verdict: Verdict,
    pub steps: usize,
}

impl RayReport {
    pub fn of(r: &ContinuationResult) -> Self {
        Self { theta_star: r.theta_star, theta_kind: r.theta_kind, verdict: r.verdict, steps: r.steps }
    }

    fn render(&self) -> String {
        match self.theta_kind {
            ThetaKind::Unbounded => "unbounded".into(),
            ThetaKind::LowerBound => format!(">= {} (no fold found)", self.theta_star),
            ThetaKind::Fold => format!("{}", self.theta_star),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleReport {
    pub grid: GridSummary,
    pub demand: Vec<f64>,
    pub method: String,
    pub decision: Decision,
    pub exit_code: i32,
    pub decided_by: Option<Condition>,
    /// No operating point and no certificate within the budget.
    pub undecided: bool,
    pub provenance: Vec<ConditionRecord>,
    pub operating_point: Option<Vec<f64>>,
    pub stability: Option<StabilityClass>,
    pub continuation: Option<RayReport>,
    pub certificate: Option<CertificateReport>,
    pub elapsed_ms: f64,
}

impl FeasibleReport {
    pub fn new(core: &GridCore, demand: &DVector<f64>, method: &str, r: &FeasibilityReport, elapsed_ms: f64) -> Self {
        Self {
            grid: GridSummary::of(core),
            demand: vec(demand),
            method: method.to_string(),
            decision: r.decision,
            exit_code: r.decision.exit_code(),
            decided_by: r.decided_by,
            undecided: r.decision == Decision::Undecided,
            provenance: r.provenance.clone(),
            operating_point: r.operating_point.as_ref().map(vec),
            stability: r.stability,
            continuation: r.continuation.as_ref().map(RayReport::of),
            certificate: r.certificate.as_ref().map(|c| CertificateReport { nu: vec(&c.nu), min_eigenvalue: c.min_eig }),
            elapsed_ms,
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!("decision: {:?}\n", self.decision);
        if let Some(c) = self.decided_by {
            out += &format!("decided by: {c:?}\n");
        }
        for rec in &self.provenance {
            out += &format!("  {:?} [{:?}] {}\n", rec.condition, rec.outcome, rec.detail);
        }
        if let Some(v) = &self.operating_point {
            out += &format!("operating point: {}\n", fmt(v));
        }
        if let Some(s) = self.stability {
            out += &format!("stability: {s:?}\n");
        }
        if let Some(r) = &self.continuation {
            out += &format!("theta*: {}\n", r.render());
        }
        if let Some(c) = &self.certificate {
            out += &format!("certificate nu: {} (min eigenvalue {:.3e})\n", fmt(&c.nu), c.min_eigenvalue);
        }
        if self.undecided {
            out += "undecided within budget\n";
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPointReport {
    pub grid: GridSummary,
    pub demand: Vec<f64>,
    pub verdict: Verdict,
    pub exit_code: i32,
    pub ray: RayReport,
    /// Zero demand: the ray is degenerate and `V = V*`.
    pub degenerate_ray: bool,
    pub operating_point: Option<Vec<f64>>,
    pub stability: Option<StabilityClass>,
    pub dissipation: Option<f64>,
    pub elapsed_ms: f64,
}

impl OperatingPointReport {
    pub fn render(&self) -> String {
        let mut out = format!("verdict: {:?}\ntheta*: {}\n", self.verdict, self.ray.render());
        if self.degenerate_ray {
            out += "zero demand: degenerate ray, V = V*\n";
        }
        if let Some(v) = &self.operating_point {
            out += &format!("V_L: {}\n", fmt(v));
        }
        if let Some(s) = self.stability {
            out += &format!("stability: {s:?}\n");
        }
        if let Some(d) = self.dissipation {
            out += &format!("dissipation: {d}\n");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub valid: bool,
    pub error: Option<String>,
    pub invariants: Option<dcpf::network::InvariantReport>,
    pub grid: Option<GridSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSearchReport {
    pub demand: Vec<f64>,
    pub budget: usize,
    pub found: bool,
    pub certificate: Option<CertificateReport>,
    pub exit_code: i32,
}

pub fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(", "))
}
