mod support;

use dcpf::linalg;
use dcpf::operating_point::{classify, StabilityClass};
use dcpf::powerflow::{self, to_single_source};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn jacobian_splits_into_current_and_g(seed in any::<u64>()) {
        let mut rng = support::rng(seed);
        let core = support::random_core(&mut rng, 5);
        let v = DVector::from_fn(core.n(), |_, _| rng.gen_range(0.1..2.0));
        let j = powerflow::jacobian(&core, &v);
        let split = linalg::diag(core.i_star()) - powerflow::g_of(&core, &v);
        prop_assert!((j - split).amax() <= 1e-14 * core.y_ll().amax() * 4.0);
    }

    #[test]
    fn stable_points_lie_in_m(seed in any::<u64>()) {
        let mut rng = support::rng(seed);
        let core = support::random_core(&mut rng, 4);
        let v = DVector::from_fn(core.n(), |i, _| core.v_star()[i] * rng.gen_range(0.3..1.3));
        if classify(&core, &v).unwrap() != StabilityClass::Outside {
            prop_assert!(powerflow::in_m(&core, &v));
        }
    }

    #[test]
    fn single_source_form_has_unit_open_circuit(seed in any::<u64>()) {
        let mut rng = support::rng(seed);
        let core = support::random_core(&mut rng, 5);
        let hat = to_single_source(&core).unwrap();
        prop_assert!((hat.v_star() - DVector::from_element(core.n(), 1.0)).amax() <= 1e-12);
        prop_assert!((hat.p_max() - core.p_max()).amax() <= 1e-12 * core.p_max().amax());
    }

    #[test]
    fn chi_is_scale_invariant(seed in any::<u64>(), k in 0.01f64..100.0) {
        let mut rng = support::rng(seed);
        let core = support::random_core(&mut rng, 4);
        let nu = support::simplex_point(&mut rng, core.n());
        let a = powerflow::chi(&core, &nu).unwrap();
        let b = powerflow::chi(&core, &(&nu * k)).unwrap();
        prop_assert!((b - a * k).amax() <= 1e-10 * k * powerflow::chi(&core, &nu).unwrap().amax());
    }
}
