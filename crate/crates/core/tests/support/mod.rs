#![allow(dead_code)]

use dcpf::network::{build_kirchhoff, Edge, Network};
use dcpf::powerflow::{make_core, GridCore};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected grid with a connected load subgraph, conductances in
/// [0.1, 10] and source voltages in [0.5, 2].
pub fn random_network<R: Rng>(rng: &mut R, n: usize, m: usize) -> Network {
    let mut edges = Vec::new();
    let g = |rng: &mut R| rng.gen_range(0.1..=10.0);
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push(Edge { a: j, b: i, g: g(rng) });
    }
    for k in 0..m {
        let i = rng.gen_range(0..n);
        edges.push(Edge { a: i, b: n + k, g: g(rng) });
    }
    for a in 0..n + m {
        for b in a + 1..n + m {
            if edges.iter().any(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a)) {
                continue;
            }
            if rng.gen_bool(0.35) {
                edges.push(Edge { a, b, g: g(rng) });
            }
        }
    }
    let source_voltages = (0..m).map(|_| rng.gen_range(0.5..=2.0)).collect();
    Network { n_loads: n, n_sources: m, edges, source_voltages }
}

pub fn core_of(net: &Network) -> GridCore {
    let part = build_kirchhoff(net).expect("random network is valid");
    make_core(part, DVector::from_vec(net.source_voltages.clone())).expect("valid core")
}

pub fn random_core(rng: &mut impl Rng, max_n: usize) -> GridCore {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=2);
    core_of(&random_network(rng, n, m))
}

pub fn simplex_point(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    let e = DVector::from_fn(n, |_, _| -(1.0 - rng.gen::<f64>()).ln());
    let s = e.sum();
    e / s
}

/// Nonnegative demand whose total is a random fraction of `1^T P_max`.
pub fn nonneg_demand(rng: &mut impl Rng, core: &GridCore) -> DVector<f64> {
    let u = simplex_point(rng, core.n());
    u * core.p_max().sum() * rng.gen_range(0.1..1.2)
}

/// Demand of either sign, scaled to the size of `P_max`.
pub fn mixed_demand(rng: &mut impl Rng, core: &GridCore) -> DVector<f64> {
    let scale = core.p_max().amax() * rng.gen_range(0.2..2.0);
    DVector::from_fn(core.n(), |_, _| rng.gen_range(-1.0..1.0)) * scale
}

/// Demand scaled along a random direction, mixing both families.
pub fn random_demand(rng: &mut impl Rng, core: &GridCore) -> DVector<f64> {
    if rng.gen_bool(0.6) {
        nonneg_demand(rng, core)
    } else {
        mixed_demand(rng, core)
    }
}
