//! Feasibility analysis for DC power-flow equations with constant-power loads.
//!
//! A resistive grid with load nodes and fixed-voltage sources is described by
//! its Kirchhoff matrix. Given a vector of constant power demands at the
//! loads, this crate decides whether a positive voltage solution exists,
//! computes the high-voltage operating point by continuation, produces
//! infeasibility certificates and samples the boundary of the feasible set.

pub mod boundary;
pub mod decide;
pub mod error;
pub mod feasibility;
pub mod grids;
pub mod linalg;
pub mod matanalysis;
pub mod network;
pub mod operating_point;
pub mod par;
pub mod powerflow;
pub mod simplex;

pub use error::{Error, Result};
pub use network::{build_kirchhoff, kron_reduce, parse_grid_json, Edge, GridInput, KirchhoffPartition, Network};
pub use par::Execution;
pub use powerflow::{make_core, GridCore};
pub use decide::{decide, DecideOptions, Decision, FeasibilityReport, Method};
pub use operating_point::{solve_desired, SolveOptions, StabilityClass, Verdict};
