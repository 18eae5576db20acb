mod support;

use dcpf::matanalysis::{classify_m, is_z_matrix, MTag};
use dcpf::network::{build_kirchhoff, kron_reduce};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn assembled_partition_is_valid(seed in any::<u64>(), n in 1usize..6, m in 1usize..4) {
        let mut rng = support::rng(seed);
        let net = support::random_network(&mut rng, n, m);
        let part = build_kirchhoff(&net).unwrap();
        prop_assert!(part.diagnose().all_hold());
        let y = part.full();
        let scale = y.amax();
        for i in 0..n + m {
            prop_assert!(y.row(i).sum().abs() <= 1e-12 * scale);
        }
        let sums: Vec<f64> = (0..n).map(|i| part.y_ll.row(i).sum()).collect();
        prop_assert!(sums.iter().all(|&s| s >= -1e-12 * scale));
        prop_assert!(sums.iter().any(|&s| s > 1e-12 * scale));
    }

    #[test]
    fn kron_reduction_stays_nonsingular_m(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = support::rng(seed);
        let part = build_kirchhoff(&support::random_network(&mut rng, n, 1)).unwrap();
        let alpha: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        prop_assume!(!alpha.is_empty());
        let k = kron_reduce(&part.y_ll, &alpha).unwrap();
        prop_assert_eq!(k.nrows(), alpha.len());
        prop_assert!((&k - k.transpose()).amax() <= 1e-12 * k.amax());
        prop_assert!(is_z_matrix(&k));
        let c = classify_m(&k, None);
        prop_assert_eq!(c.tag, MTag::NonsingularM);
        prop_assert!(c.perron.unwrap().root > 0.0);
    }
}
