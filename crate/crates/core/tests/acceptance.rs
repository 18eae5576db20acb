//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod support;

use std::time::{Duration, Instant};

use dcpf::boundary;
use dcpf::feasibility::{self, NonnegVerdict, SimpsonPorco};
use dcpf::grids;
use dcpf::network::kron_reduce;
use dcpf::operating_point::{self, classify_with_tol, ContinuationResult, SolveOptions, StabilityClass, Verdict};
use dcpf::powerflow::{self, GridCore};
use dcpf::Execution;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

const BAND: f64 = 1e-4;

type Outcome = Result<String, String>;

fn v2(a: f64, b: f64) -> DVector<f64> {
    DVector::from_vec(vec![a, b])
}

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let c = grids::one_load();
    let opts = SolveOptions::default();
    check(c.p_max()[0] == 0.25, format!("P_max = {}", c.p_max()[0]))?;
    let at = |p: f64| operating_point::solve_desired(&c, &DVector::from_element(1, p), &opts);
    let r = at(0.25).map_err(|e| e.to_string())?;
    check(r.verdict == Verdict::Boundary, format!("P = 0.25 gives {:?}", r.verdict))?;
    let r = at(0.25 + 1e-5).map_err(|e| e.to_string())?;
    check(r.verdict == Verdict::Infeasible, "just above the threshold is not infeasible")?;
    let r = at(0.25 - 1e-5).map_err(|e| e.to_string())?;
    check(r.verdict == Verdict::Interior, "just below the threshold is not interior")?;
    let r = at(0.5).map_err(|e| e.to_string())?;
    let theta_err = (r.theta_star - 0.5).abs();
    check(theta_err <= 1e-6, format!("theta* = {}", r.theta_star))?;
    let r = at(0.2).map_err(|e| e.to_string())?;
    let v = r.v.ok_or("no operating point at P = 0.2")?[0];
    let v_err = (v - (1.0 + 0.2_f64.sqrt()) / 2.0).abs();
    check(v_err <= 1e-8, format!("V = {v}"))?;
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("|theta*-0.5| = {theta_err:.1e}, |V-V_exact| = {v_err:.1e}, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let c = grids::two_load();
    let ones = v2(1.0, 1.0);
    check((c.v_star() - &ones).amax() <= 1e-14, "V* != (1,1)")?;
    check((c.i_star() - &ones).amax() <= 1e-14, "I* != (1,1)")?;
    check((c.p_max() - v2(0.25, 0.25)).amax() <= 1e-14, "P_max != (1/4,1/4)")?;
    let r = operating_point::solve_desired(&c, c.p_max(), &SolveOptions::default()).map_err(|e| e.to_string())?;
    check(r.verdict == Verdict::Boundary, format!("verdict {:?}", r.verdict))?;
    let err = (r.v.ok_or("no operating point")? - v2(0.5, 0.5)).amax();
    check(err <= 1e-6, format!("|V - (0.5,0.5)| = {err:.2e}"))?;
    Ok(format!("|V - V*/2| = {err:.1e}"))
}

fn criterion_3() -> Outcome {
    let c = grids::two_load();
    let nu = v2(1.0, 0.0);
    let mu = dcpf::linalg::normalize_l1(&dcpf::linalg::solve(c.y_ll(), &nu).ok_or("singular")?);
    check((&mu - v2(2.0 / 3.0, 1.0 / 3.0)).amax() <= 1e-10, format!("mu = {mu:?}"))?;
    let bp = boundary::boundary_from_nu(&c, &nu).map_err(|e| e.to_string())?;
    check((&bp.v - v2(0.5, 0.75)).amax() <= 1e-10, "V != (0.5, 0.75)")?;
    check((&bp.p - v2(0.375, 0.0)).amax() <= 1e-10, "P != (0.375, 0)")?;
    let kron = kron_reduce(c.y_ll(), &[0]).map_err(|e| e.to_string())?;
    let tight = feasibility::tight_point(&c, &[0]).map_err(|e| e.to_string())?;
    let kerr = (&tight - &bp.p).amax();
    check(kerr <= 1e-10, format!("tight point differs by {kerr:.2e}"))?;
    check((kron[(0, 0)] - 1.5).abs() <= 1e-14, "Kron reduction != 3/2")?;
    let lam = v2(0.75, 0.25);
    let m = boundary::lambda_to_mu(&c, &lam).map_err(|e| e.to_string())?;
    let l = boundary::mu_to_lambda(&c, &m).map_err(|e| e.to_string())?;
    let derr = (&m - v2(2.0 / 3.0, 1.0 / 3.0)).amax().max((&l - &lam).amax());
    check(derr <= 1e-8, format!("duality round trip error {derr:.2e}"))?;
    Ok(format!("chain and Kron agree to {kerr:.1e}, duality to {derr:.1e}"))
}

struct Case {
    core: GridCore,
    p: DVector<f64>,
    cont: dcpf::Result<ContinuationResult>,
    oracle: Vec<DVector<f64>>,
}

impl Case {
    fn near_band(&self) -> bool {
        matches!(&self.cont, Ok(r) if (r.theta_star - 1.0).abs() <= BAND)
    }
    fn theta(&self) -> f64 {
        self.cont.as_ref().map_or(f64::NAN, |r| r.theta_star)
    }
    fn verdict(&self) -> Option<Verdict> {
        self.cont.as_ref().ok().map(|r| r.verdict)
    }
}

/// Random grids with a mix of random and structured demands.
fn corpus(grids: usize, seed: u64) -> Vec<Case> {
    let mut rng = support::rng(seed);
    let opts = SolveOptions::default();
    let mut specs = Vec::new();
    for _ in 0..grids {
        let core = support::random_core(&mut rng, 3);
        let mut ps = vec![
            support::random_demand(&mut rng, &core),
            support::nonneg_demand(&mut rng, &core),
            support::mixed_demand(&mut rng, &core),
        ];
        let x = DVector::from_fn(core.n(), |_, _| rng.gen_range(0.0..1.05));
        let d = dcpf::linalg::diag(core.v_star());
        ps.push(&d * core.y_ll() * &d * &x * 0.25);
        ps.push(feasibility::bolognani_extremal_point(&core, 2.0).unwrap() * rng.gen_range(0.5..1.0));
        for p in ps {
            specs.push((core.clone(), p));
        }
    }
    Execution::Parallel
        .map(&specs, |(core, p)| {
            let cont = operating_point::solve_desired(core, p, &opts);
            let oracle = operating_point::all_solutions_oracle(core, p, Execution::Sequential).unwrap();
            Case { core: core.clone(), p: p.clone(), cont, oracle }
        })
}

fn criterion_4(cases: &[Case], elapsed: Duration) -> Outcome {
    let grids = cases.len() / 5;
    check(grids >= 200, format!("only {grids} grids"))?;
    let mut contradictions = Vec::new();
    let mut banded = 0;
    for (i, c) in cases.iter().enumerate() {
        if c.near_band() {
            banded += 1;
            continue;
        }
        let exists = !c.oracle.is_empty();
        match &c.cont {
            Ok(r) => {
                let feasible = r.verdict != Verdict::Infeasible;
                if feasible != exists {
                    contradictions.push(format!(
                        "case {i}: n={} P={:?} theta*={} oracle found {}",
                        c.core.n(),
                        c.p.as_slice(),
                        r.theta_star,
                        c.oracle.len()
                    ));
                }
            }
            Err(e) => contradictions.push(format!("case {i}: continuation failed: {e}")),
        }
    }
    check(
        contradictions.is_empty(),
        format!("{} contradictions, first: {}", contradictions.len(), contradictions.first().cloned().unwrap_or_default()),
    )?;
    check(elapsed < Duration::from_secs(300), format!("took {elapsed:?}"))?;
    let infeasible = cases.iter().filter(|c| c.oracle.is_empty()).count();
    Ok(format!(
        "{grids} grids, {} demands ({infeasible} infeasible), {banded} in band, 0 contradictions, {elapsed:.1?}",
        cases.len()
    ))
}

fn criterion_5(cases: &[Case]) -> Outcome {
    let mut checked = 0;
    let mut pairs = 0;
    for (i, c) in cases.iter().enumerate() {
        if c.oracle.len() < 2 || c.near_band() {
            continue;
        }
        let Some(v) = c.cont.as_ref().ok().and_then(|r| r.v.clone()) else {
            return Err(format!("case {i}: oracle has solutions but continuation has none"));
        };
        let (k, dist) = c
            .oracle
            .iter()
            .enumerate()
            .map(|(k, s)| (k, (s - &v).amax()))
            .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
        check(dist <= 1e-6, format!("case {i}: continuation point not among oracle solutions ({dist:.2e})"))?;
        let desired = &c.oracle[k];
        let d0 = powerflow::dissipation(&c.core, desired).unwrap();
        for (j, other) in c.oracle.iter().enumerate() {
            if j == k {
                continue;
            }
            pairs += 1;
            let gap = (desired - other).min();
            check(gap > 1e-8, format!("case {i}: domination gap {gap:.2e}"))?;
            let d1 = powerflow::dissipation(&c.core, other).unwrap();
            check(d0 < d1, format!("case {i}: dissipation {d0} vs {d1}"))?;
            let mid = (desired + other) * 0.5;
            let cls = classify_with_tol(&c.core, &mid, Some(1e-6)).unwrap();
            check(cls == StabilityClass::SemiStableBoundary, format!("case {i}: midpoint is {cls:?}"))?;
        }
        checked += 1;
    }
    check(checked >= 50, format!("only {checked} cases with several solutions"))?;
    Ok(format!("{checked} demands, {pairs} solution pairs"))
}

fn feasible_by_continuation(c: &Case) -> bool {
    matches!(c.verdict(), Some(Verdict::Interior | Verdict::Boundary)) || c.theta() >= 1.0 - BAND
}

fn criterion_6(cases: &[Case]) -> Outcome {
    let (mut bol, mut sp, mut nn) = (0, 0, 0);
    for (i, c) in cases.iter().enumerate() {
        let s = feasibility::sufficient_simpson_porco(&c.core, &c.p).unwrap();
        let sp_holds = s != SimpsonPorco::Fails;
        for p in [1.0, 2.0, f64::INFINITY] {
            if feasibility::sufficient_bolognani(&c.core, &c.p, p).unwrap() {
                bol += 1;
                check(sp_holds, format!("case {i}: ball condition (p = {p}) holds but the inner condition fails"))?;
            }
        }
        if sp_holds {
            sp += 1;
            check(feasible_by_continuation(c), format!("case {i}: inner condition holds, theta* = {}", c.theta()))?;
        }
        if c.p.iter().all(|&x| x >= 0.0) {
            let d = feasibility::nonneg_decide(&c.core, &c.p, 200, Execution::Parallel).unwrap();
            if d.verdict == NonnegVerdict::FeasibleInterior {
                nn += 1;
                let ok = c.verdict() == Some(Verdict::Interior) || c.near_band();
                check(ok, format!("case {i}: simplex test says interior, theta* = {}", c.theta()))?;
            }
        }
    }
    check(bol > 0 && sp > 0 && nn > 0, "an implication was never exercised")?;
    Ok(format!("{bol} ball, {sp} inner, {nn} simplex-interior demands, 0 violations"))
}

fn criterion_7(cases: &[Case]) -> Outcome {
    let mut rng = support::rng(7);
    let (mut found, mut interior) = (0, 0);
    for (i, c) in cases.iter().enumerate() {
        let Ok(r) = &c.cont else { continue };
        let nonneg = c.p.iter().all(|&x| x >= 0.0);
        if nonneg && r.verdict == Verdict::Infeasible && r.theta_star < 0.9 {
            let cert = feasibility::find_certificate(&c.core, &c.p, 2000, &[]);
            let Some(cert) = cert else {
                return Err(format!("case {i}: no certificate, theta* = {}", r.theta_star));
            };
            check(
                feasibility::verify_certificate(&c.core, &cert.nu, &c.p).unwrap(),
                format!("case {i}: certificate does not verify"),
            )?;
            found += 1;
        }
        if r.verdict == Verdict::Interior && !c.near_band() {
            interior += 1;
            let n = c.core.n();
            let mut candidates: Vec<DVector<f64>> = (0..20).map(|_| support::simplex_point(&mut rng, n)).collect();
            candidates.push(DVector::from_element(n, 1.0));
            if let Some(f) = &r.fold {
                if f.normal.iter().all(|&x| x > 0.0) {
                    candidates.push(f.normal.clone());
                }
            }
            for nu in candidates.iter().filter(|nu| nu.iter().all(|&x| x > 0.0)) {
                check(
                    !feasibility::verify_certificate(&c.core, nu, &c.p).unwrap(),
                    format!("case {i}: certificate for an interior demand"),
                )?;
            }
            check(
                feasibility::find_certificate(&c.core, &c.p, 200, &[]).is_none(),
                format!("case {i}: search certified an interior demand"),
            )?;
        }
    }
    check(found >= 20, format!("only {found} certificate searches"))?;
    Ok(format!("{found} certificates found, {interior} interior demands never certified"))
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1e-300)
}

fn criterion_8() -> Outcome {
    let mut rng = support::rng(8);
    let (mut jac, mut bil, mut tr, mut bal, mut sc) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..200 {
        let core = support::random_core(&mut rng, 4);
        let n = core.n();
        let v = DVector::from_fn(n, |i, _| core.v_star()[i] * rng.gen_range(0.2..1.5));
        // central differences
        let h = 1e-6 * v.amax();
        let j = powerflow::jacobian(&core, &v);
        let mut fd = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut vp = v.clone();
            let mut vm = v.clone();
            vp[k] += h;
            vm[k] -= h;
            let d = (powerflow::injected_power(&core, &vp).unwrap() - powerflow::injected_power(&core, &vm).unwrap()) / (2.0 * h);
            fd.set_column(k, &d);
        }
        jac = jac.max(rel(&j, &fd));
        let mu = DVector::from_fn(n, |_, _| rng.gen_range(0.1..2.0));
        let w = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let lhs = powerflow::g_of(&core, &mu) * &w;
        let rhs = powerflow::g_of(&core, &w) * &mu;
        bil = bil.max((&lhs - &rhs).amax() / lhs.amax().max(rhs.amax()));
        let g = powerflow::g_of(&core, &mu);
        let d = dcpf::linalg::diag(&mu);
        let dinv = dcpf::linalg::diag(&mu.map(|x| 1.0 / x));
        tr = tr.max(rel(&(&dinv * &g * &d), &g.transpose()));
        let ps = powerflow::source_power(&core, &v).unwrap().sum();
        let pc = powerflow::injected_power(&core, &v).unwrap().sum();
        let diss = powerflow::dissipation(&core, &v).unwrap();
        bal = bal.max((ps - pc - diss).abs() / ps.abs().max(pc.abs()).max(diss).max(1e-300));
        let lam = support::simplex_point(&mut rng, n);
        if powerflow::in_lambda(&core, &lam) {
            let a = powerflow::phi(&core, &lam).unwrap();
            for k in [0.01, 3.0, 250.0] {
                let b = powerflow::phi(&core, &(&lam * k)).unwrap();
                sc = sc.max((&a - &b).amax() / a.amax());
            }
        }
        if powerflow::in_m(&core, &mu) {
            if let Ok(a) = powerflow::psi(&core, &mu) {
                for k in [0.01, 3.0, 250.0] {
                    let b = powerflow::psi(&core, &(&mu * k)).unwrap();
                    sc = sc.max((&a - &b).amax() / a.amax());
                }
            }
        }
    }
    check(jac <= 1e-5, format!("Jacobian vs differences {jac:.2e}"))?;
    check(bil <= 1e-10, format!("bilinearity {bil:.2e}"))?;
    check(tr <= 1e-10, format!("transpose identity {tr:.2e}"))?;
    check(bal <= 1e-10, format!("power balance {bal:.2e}"))?;
    check(sc <= 1e-10, format!("scale invariance {sc:.2e}"))?;

    let opts = SolveOptions::default();
    let mut pairs = 0;
    let mut worst = f64::INFINITY;
    while pairs < 1000 {
        let core = support::random_core(&mut rng, 3);
        let p = support::random_demand(&mut rng, &core);
        let feasible = matches!(
            operating_point::solve_desired(&core, &p, &opts).map(|r| r.verdict),
            Ok(Verdict::Interior | Verdict::Boundary)
        );
        if !feasible {
            continue;
        }
        for _ in 0..5 {
            let lam = support::simplex_point(&mut rng, core.n());
            if !powerflow::in_lambda(&core, &lam) {
                continue;
            }
            let h = feasibility::halfspace_margin(&core, &lam, &p).unwrap();
            worst = worst.min(h.margin);
            pairs += 1;
        }
    }
    check(worst >= -1e-8, format!("half-space margin {worst:.2e} for a feasible demand"))?;
    Ok(format!(
        "jac {jac:.1e}, bilinear {bil:.1e}, transpose {tr:.1e}, balance {bal:.1e}, scale {sc:.1e}, min margin {worst:.2e} over {pairs} pairs"
    ))
}

fn main() {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, r: Outcome| match r {
        Ok(detail) => println!("PASS [{id}] {name}: {detail}"),
        Err(detail) => {
            failed += 1;
            println!("FAIL [{id}] {name}: {detail}");
        }
    };
    report(1, "single-load threshold, ray margin and operating point", criterion_1());
    report(2, "symmetric two-load grid at P_max", criterion_2());
    report(3, "boundary chain, tight point and duality", criterion_3());
    let start = Instant::now();
    let cases = corpus(240, 2024);
    let elapsed = start.elapsed();
    report(4, "continuation agrees with the all-solutions oracle", criterion_4(&cases, elapsed));
    report(5, "desired point dominates the other solutions", criterion_5(&cases));
    report(6, "sufficient conditions are sound and ordered", criterion_6(&cases));
    report(7, "infeasibility certificates", criterion_7(&cases));
    report(8, "algebraic invariants", criterion_8());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
