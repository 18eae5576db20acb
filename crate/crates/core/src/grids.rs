//! Small reference grids with closed-form quantities.

use crate::network::{build_kirchhoff, Edge, Network};
use crate::powerflow::{make_core, GridCore};

/// One load tied to one unit source by a unit conductance.
pub fn one_load_network() -> Network {
    Network {
        n_loads: 1,
        n_sources: 1,
        edges: vec![Edge { a: 0, b: 1, g: 1.0 }],
        source_voltages: vec![1.0],
    }
}

/// Two loads and one unit source, all three pairs joined by unit lines.
pub fn two_load_network() -> Network {
    Network {
        n_loads: 2,
        n_sources: 1,
        edges: vec![
            Edge { a: 0, b: 1, g: 1.0 },
            Edge { a: 0, b: 2, g: 1.0 },
            Edge { a: 1, b: 2, g: 1.0 },
        ],
        source_voltages: vec![1.0],
    }
}

pub fn core_of(net: &Network) -> GridCore {
    let part = build_kirchhoff(net).expect("reference network is valid");
    make_core(part, nalgebra::DVector::from_vec(net.source_voltages.clone()))
        .expect("reference network has a valid core")
}

/// `Y_LL = [1]`, `I* = V* = 1`, `P_max = 1/4`.
pub fn one_load() -> GridCore {
    core_of(&one_load_network())
}

/// `Y_LL = [[2,-1],[-1,2]]`, `I* = V* = (1,1)`, `P_max = (1/4,1/4)`.
pub fn two_load() -> GridCore {
    core_of(&two_load_network())
}
