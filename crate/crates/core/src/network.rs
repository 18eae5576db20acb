//! Network description, Kirchhoff matrix assembly and Kron reduction.
//!
//! Nodes are numbered loads first: indices `0..n_loads` are loads and
//! `n_loads..n_loads + n_sources` are sources.

use nalgebra::{DMatrix, DVector};
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Factor};
use crate::matanalysis::{self, MTag};

/// Relative tolerance on the zero row sums of the full Kirchhoff matrix.
pub const ROW_SUM_RTOL: f64 = 1e-12;
/// Relative asymmetry accepted (and averaged away) in direct matrix input.
pub const SYMMETRY_RTOL: f64 = 1e-12;

/// An undirected line between nodes `a` and `b` with conductance `g` (siemens).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub n_loads: usize,
    pub n_sources: usize,
    pub edges: Vec<Edge>,
    pub source_voltages: Vec<f64>,
}

/// The Kirchhoff matrix split into load and source blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct KirchhoffPartition {
    pub y_ll: DMatrix<f64>,
    pub y_ls: DMatrix<f64>,
    pub y_sl: DMatrix<f64>,
    pub y_ss: DMatrix<f64>,
}

/// Outcome of every partition check, reported without failing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub row_sum_residual: f64,
    pub row_sum_tolerance: f64,
    pub symmetric: bool,
    pub z_matrix: bool,
    pub connected: bool,
    pub load_block_irreducible: bool,
    pub load_block_perron_root: Option<f64>,
    pub load_block_nonsingular_m: bool,
}

impl InvariantReport {
    pub fn all_hold(&self) -> bool {
        self.row_sum_residual <= self.row_sum_tolerance
            && self.symmetric
            && self.z_matrix
            && self.connected
            && self.load_block_irreducible
            && self.load_block_nonsingular_m
    }
}

impl KirchhoffPartition {
    pub fn n_loads(&self) -> usize {
        self.y_ll.nrows()
    }

    pub fn n_sources(&self) -> usize {
        self.y_ss.nrows()
    }

    /// Reassembled `(n+m) x (n+m)` Kirchhoff matrix.
    pub fn full(&self) -> DMatrix<f64> {
        let (n, m) = (self.n_loads(), self.n_sources());
        let mut y = DMatrix::zeros(n + m, n + m);
        y.view_mut((0, 0), (n, n)).copy_from(&self.y_ll);
        y.view_mut((0, n), (n, m)).copy_from(&self.y_ls);
        y.view_mut((n, 0), (m, n)).copy_from(&self.y_sl);
        y.view_mut((n, n), (m, m)).copy_from(&self.y_ss);
        y
    }

    /// Build a partition from directly supplied blocks.
    ///
    /// `y_ss` may be omitted; it is then taken diagonal (no source-to-source
    /// lines), which only affects dissipation and source power, never load
    /// feasibility.
    pub fn from_blocks(
        y_ll: DMatrix<f64>,
        y_ls: DMatrix<f64>,
        y_ss: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        let n = y_ll.nrows();
        if n == 0 || y_ls.ncols() == 0 {
            return Err(Error::NoLoadsOrNoSources);
        }
        if y_ll.ncols() != n {
            return Err(Error::InvalidNetwork("Y_LL must be square".into()));
        }
        if y_ls.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: y_ls.nrows() });
        }
        let m = y_ls.ncols();
        if y_ll.iter().chain(y_ls.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = linalg::max_abs(&y_ll);
        let asym = linalg::asymmetry(&y_ll);
        if asym > SYMMETRY_RTOL * scale {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let y_ll = linalg::symmetrize(&y_ll);
        let y_sl = y_ls.transpose();
        let y_ss = match y_ss {
            Some(y_ss) => {
                if y_ss.nrows() != m || y_ss.ncols() != m {
                    return Err(Error::DimensionMismatch { expected: m, found: y_ss.nrows() });
                }
                let asym = linalg::asymmetry(&y_ss);
                if asym > SYMMETRY_RTOL * linalg::max_abs(&y_ss).max(scale) {
                    return Err(Error::NotSymmetric { asymmetry: asym });
                }
                linalg::symmetrize(&y_ss)
            }
            None => {
                let d = DVector::from_iterator(m, (0..m).map(|k| -y_sl.row(k).sum()));
                DMatrix::from_diagonal(&d)
            }
        };
        let part = Self { y_ll, y_ls, y_sl, y_ss };
        part.check_invariants()?;
        Ok(part)
    }

    pub fn diagnose(&self) -> InvariantReport {
        let y = self.full();
        let max_diag = y.diagonal().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let row_sum_residual = y
            .row_iter()
            .map(|r| r.sum().abs())
            .fold(0.0_f64, f64::max);
        let symmetric = linalg::asymmetry(&y) <= SYMMETRY_RTOL * linalg::max_abs(&y);
        let z_matrix = matanalysis::is_z_matrix(&y);
        let connected = matanalysis::is_irreducible(&y);
        let load_block_irreducible = matanalysis::is_irreducible(&self.y_ll);
        let class = matanalysis::classify_m(&self.y_ll, None);
        InvariantReport {
            row_sum_residual,
            row_sum_tolerance: ROW_SUM_RTOL * max_diag,
            symmetric,
            z_matrix,
            connected,
            load_block_irreducible,
            load_block_perron_root: class.perron.as_ref().map(|p| p.root),
            load_block_nonsingular_m: class.tag == MTag::NonsingularM,
        }
    }

    /// Verify every partition invariant, reporting the first violation.
    pub fn check_invariants(&self) -> Result<()> {
        let r = self.diagnose();
        if !r.symmetric {
            return Err(Error::NotSymmetric { asymmetry: linalg::asymmetry(&self.full()) });
        }
        if !r.z_matrix {
            return Err(Error::NotZMatrix);
        }
        if r.row_sum_residual > r.row_sum_tolerance {
            return Err(Error::CoreInvariantViolation(format!(
                "Kirchhoff row sums are not zero (residual {:.3e})",
                r.row_sum_residual
            )));
        }
        if !r.connected {
            return Err(Error::DisconnectedGraph);
        }
        if !r.load_block_irreducible {
            return Err(Error::ReducibleLoadBlock);
        }
        if !r.load_block_nonsingular_m {
            return Err(Error::CoreInvariantViolation(
                "Y_LL is not a nonsingular M-matrix".into(),
            ));
        }
        Ok(())
    }
}

/// Assemble the weighted Laplacian of `net` and split it loads-first.
pub fn build_kirchhoff(net: &Network) -> Result<KirchhoffPartition> {
    let (n, m) = (net.n_loads, net.n_sources);
    if n == 0 || m == 0 {
        return Err(Error::NoLoadsOrNoSources);
    }
    let total = n + m;
    let mut y = DMatrix::<f64>::zeros(total, total);
    let mut components = UnionFind::<usize>::new(total);
    for (k, e) in net.edges.iter().enumerate() {
        if e.a >= total || e.b >= total {
            return Err(Error::InvalidNetwork(format!(
                "edge {k} references node outside 0..{total}"
            )));
        }
        if e.a == e.b {
            return Err(Error::InvalidNetwork(format!("edge {k} is a self-loop")));
        }
        if !(e.g > 0.0) || !e.g.is_finite() {
            return Err(Error::NonpositiveConductance { edge: k, g: e.g });
        }
        y[(e.a, e.a)] += e.g;
        y[(e.b, e.b)] += e.g;
        y[(e.a, e.b)] -= e.g;
        y[(e.b, e.a)] -= e.g;
        components.union(e.a, e.b);
    }
    let root = components.find(0);
    if (1..total).any(|i| components.find(i) != root) {
        return Err(Error::DisconnectedGraph);
    }
    let part = KirchhoffPartition {
        y_ll: y.view((0, 0), (n, n)).into_owned(),
        y_ls: y.view((0, n), (n, m)).into_owned(),
        y_sl: y.view((n, 0), (m, n)).into_owned(),
        y_ss: y.view((n, n), (m, m)).into_owned(),
    };
    part.check_invariants()?;
    Ok(part)
}

/// Schur complement of `y_ll` onto the index set `alpha` (0-based).
///
/// Returns `Y[a,a] - Y[a,c] Y[c,c]^-1 Y[c,a]` with `c` the complement of `alpha`;
/// `alpha` covering every index returns `y_ll` unchanged.
pub fn kron_reduce(y_ll: &DMatrix<f64>, alpha: &[usize]) -> Result<DMatrix<f64>> {
    let n = y_ll.nrows();
    let mut keep = vec![false; n];
    for &i in alpha {
        if i >= n || keep[i] {
            return Err(Error::InvalidNetwork(format!(
                "index set must hold distinct indices below {n}"
            )));
        }
        keep[i] = true;
    }
    if alpha.is_empty() {
        return Err(Error::InvalidNetwork("index set must be nonempty".into()));
    }
    let mut a: Vec<usize> = alpha.to_vec();
    a.sort_unstable();
    let c: Vec<usize> = (0..n).filter(|&i| !keep[i]).collect();
    let pick = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| y_ll[(rows[i], cols[j])])
    };
    let y_aa = pick(&a, &a);
    if c.is_empty() {
        return Ok(y_aa);
    }
    let y_ac = pick(&a, &c);
    let y_ca = pick(&c, &a);
    let y_cc = pick(&c, &c);
    let f = Factor::new(&y_cc).ok_or(Error::SingularBlock)?;
    let mut reduced = y_aa;
    for (j, col) in y_ca.column_iter().enumerate() {
        let x = f.solve(&col.into_owned()).ok_or(Error::SingularBlock)?;
        let update = &y_ac * x;
        for i in 0..a.len() {
            reduced[(i, j)] -= update[i];
        }
    }
    Ok(reduced)
}

/// Grid as read from a JSON file: the partition plus source voltages.
#[derive(Debug, Clone, PartialEq)]
pub struct GridInput {
    pub partition: KirchhoffPartition,
    pub source_voltages: DVector<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct EdgeForm {
    loads: usize,
    sources: usize,
    source_voltages: Vec<f64>,
    edges: Vec<Edge>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DirectForm {
    #[serde(rename = "Y_LL")]
    y_ll: Vec<Vec<f64>>,
    #[serde(rename = "Y_LS")]
    y_ls: Vec<Vec<f64>>,
    #[serde(rename = "V_S")]
    v_s: Vec<f64>,
    #[serde(rename = "Y_SS", default)]
    y_ss: Option<Vec<Vec<f64>>>,
}

fn rows_to_matrix(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Parse(format!("{name}: rows have unequal lengths")));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

impl Network {
    pub fn to_json(&self) -> String {
        let form = EdgeForm {
            loads: self.n_loads,
            sources: self.n_sources,
            source_voltages: self.source_voltages.clone(),
            edges: self.edges.clone(),
        };
        serde_json::to_string_pretty(&form).expect("network serializes")
    }
}

/// Parse either the edge-list form or the direct block form of a network file.
pub fn parse_grid_json(text: &str) -> Result<GridInput> {
    let probe: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if probe.get("Y_LL").is_some() {
        let d: DirectForm = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let y_ll = rows_to_matrix("Y_LL", &d.y_ll)?;
        let y_ls = rows_to_matrix("Y_LS", &d.y_ls)?;
        let y_ss = d.y_ss.as_deref().map(|r| rows_to_matrix("Y_SS", r)).transpose()?;
        if d.v_s.len() != y_ls.ncols() {
            return Err(Error::DimensionMismatch { expected: y_ls.ncols(), found: d.v_s.len() });
        }
        let partition = KirchhoffPartition::from_blocks(y_ll, y_ls, y_ss)?;
        Ok(GridInput { partition, source_voltages: DVector::from_vec(d.v_s) })
    } else {
        let f: EdgeForm = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if f.source_voltages.len() != f.sources {
            return Err(Error::DimensionMismatch {
                expected: f.sources,
                found: f.source_voltages.len(),
            });
        }
        let net = Network {
            n_loads: f.loads,
            n_sources: f.sources,
            edges: f.edges,
            source_voltages: f.source_voltages,
        };
        let partition = build_kirchhoff(&net)?;
        Ok(GridInput { partition, source_voltages: DVector::from_vec(net.source_voltages) })
    }
}
