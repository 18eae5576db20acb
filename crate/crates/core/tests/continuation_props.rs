mod support;

use dcpf::operating_point::{all_solutions_oracle, classify, solve_desired, SolveOptions, StabilityClass, Verdict};
use dcpf::powerflow;
use dcpf::Execution;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_stays_on_the_solution_curve(seed in any::<u64>()) {
        let mut rng = support::rng(seed);
        let core = support::random_core(&mut rng, 4);
        let p = support::random_demand(&mut rng, &core);
        let opts = SolveOptions { record_trace: true, ..Default::default() };
        let r = solve_desired(&core, &p, &opts).unwrap();
        let trace = r.trace.unwrap();
        prop_assert!(!trace.is_empty());
        for t in &trace {
            let target = &p * t.theta;
            let got = powerflow::injected_power(&core, &t.v).unwrap();
            prop_assert!((got - &target).amax() <= 1e-8 * target.amax().max(1.0), "theta {}", t.theta);
        }
        prop_assert!(trace.windows(2).all(|w| w[0].theta < w[1].theta));
    }

    #[test]
    fn nonnegative_demand_lowers_every_voltage(seed in any::<u64>()) {
        let mut rng = support::rng(seed);
        let core = support::random_core(&mut rng, 4);
        let p = support::nonneg_demand(&mut rng, &core);
        let opts = SolveOptions { record_trace: true, ..Default::default() };
        let trace = solve_desired(&core, &p, &opts).unwrap().trace.unwrap();
        for w in trace.windows(2) {
            prop_assert!(w[1].v.iter().zip(w[0].v.iter()).all(|(b, a)| *b <= *a + 1e-12));
        }
    }

    #[test]
    fn desired_point_is_dominant_and_stable(seed in any::<u64>()) {
        let mut rng = support::rng(seed);
        let core = support::random_core(&mut rng, 3);
        let p = support::random_demand(&mut rng, &core);
        let r = solve_desired(&core, &p, &SolveOptions::default()).unwrap();
        prop_assume!((r.theta_star - 1.0).abs() > 1e-4);
        let sols = all_solutions_oracle(&core, &p, Execution::Sequential).unwrap();
        match r.verdict {
            Verdict::Infeasible => prop_assert!(sols.is_empty()),
            _ => {
                let v = r.v.unwrap();
                prop_assert_eq!(classify(&core, &v).unwrap(), StabilityClass::Stable);
                prop_assert!((&sols[0] - &v).amax() <= 1e-6);
                let d = powerflow::dissipation(&core, &v).unwrap();
                for other in &sols[1..] {
                    prop_assert!((&v - other).min() > 0.0);
                    prop_assert!(d < powerflow::dissipation(&core, other).unwrap());
                }
            }
        }
    }

    #[test]
    fn boundary_demand_has_a_single_solution(seed in any::<u64>()) {
        let mut rng = support::rng(seed);
        let core = support::random_core(&mut rng, 3);
        let p = support::random_demand(&mut rng, &core);
        let r = solve_desired(&core, &p, &SolveOptions::default()).unwrap();
        prop_assume!(r.theta_star.is_finite() && r.theta_star < 1e5);
        let edge = &p * (r.theta_star * (1.0 - 1e-8));
        let sols = all_solutions_oracle(&core, &edge, Execution::Sequential).unwrap();
        let fold = r.fold.unwrap();
        prop_assert!(!sols.is_empty());
        let spread = core.v_star().amax() * 1e-3;
        prop_assert!(sols.iter().all(|s| (s - &fold.v).amax() <= spread), "{} solutions", sols.len());
        let b = solve_desired(&core, &edge, &SolveOptions::default()).unwrap();
        prop_assert_eq!(b.verdict, Verdict::Boundary);
    }
}
