use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use dcpf::boundary::{sweep_boundary, Family};
use dcpf::feasibility::{find_certificate, tight_points};
use dcpf::operating_point::classify;
use dcpf::powerflow::dissipation;
use dcpf::{decide, make_core, parse_grid_json, DecideOptions, Execution, GridCore, Method, SolveOptions};
use nalgebra::DVector;

use crate::report::{
    CertificateReport, CertificateSearchReport, FeasibleReport, GridSummary, OperatingPointReport, RayReport,
    ValidateReport,
};

#[derive(Debug, Parser)]
#[command(name = "dcpf", version, about = "Feasibility of DC power flow with constant-power loads")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    Continuation,
    Nonneg,
    Lmi,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Continuation => Method::Continuation,
            MethodArg::Nonneg => Method::Nonneg,
            MethodArg::Lmi => Method::Lmi,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    Lambda,
    Mu,
    Nu,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Lambda => Family::Lambda,
            FamilyArg::Mu => Family::Mu,
            FamilyArg::Nu => Family::Nu,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network file and print its partition invariants.
    Validate {
        grid: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Decide whether a demand vector is feasible.
    Feasible {
        grid: PathBuf,
        /// Comma-separated demands in watts, or a file holding a JSON array.
        #[arg(allow_hyphen_values = true)]
        demand: String,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
        #[arg(long)]
        json: bool,
        /// Simplex grid subdivisions per edge.
        #[arg(long, default_value_t = 200)]
        resolution: usize,
        /// Certificate search budget in LMI evaluations.
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        /// Hoelder exponent of the ball condition.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Follow the demand ray and report the desired operating point.
    OperatingPoint {
        grid: PathBuf,
        #[arg(allow_hyphen_values = true)]
        demand: String,
        /// Write the continuation path as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Sample the feasibility boundary and write it as CSV.
    Boundary {
        grid: PathBuf,
        #[arg(long, value_enum, default_value = "nu")]
        family: FamilyArg,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Search for an infeasibility certificate.
    Certificate {
        grid: PathBuf,
        #[arg(allow_hyphen_values = true)]
        demand: String,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long)]
        json: bool,
    },
    /// Enumerate the tight points of the inner condition as CSV.
    TightPoints {
        grid: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn load_core(path: &Path) -> Result<GridCore> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let input = parse_grid_json(&text)?;
    Ok(make_core(input.partition, input.source_voltages)?)
}

/// Inline `a,b,c` or a file with a JSON array.
pub fn parse_demand(arg: &str) -> Result<DVector<f64>> {
    let path = Path::new(arg);
    let values: Vec<f64> = if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| dcpf::Error::Parse(format!("{}: {e}", path.display())))?
    } else {
        arg.split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| dcpf::Error::Parse(format!("demand entry {s:?}: {e}")))
            })
            .collect::<std::result::Result<_, _>>()?
    };
    if values.iter().any(|x| !x.is_finite()) {
        return Err(dcpf::Error::NonFinite.into());
    }
    Ok(DVector::from_vec(values))
}

fn check_demand(core: &GridCore, p: &DVector<f64>) -> Result<()> {
    if p.len() != core.n() {
        return Err(dcpf::Error::DimensionMismatch { expected: core.n(), found: p.len() }.into());
    }
    Ok(())
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout()),
    })
}

fn header(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |i| format!("{prefix}{i}"))
}

/// Run a command, print its output and return the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Validate { grid, json } => validate(&grid, json),
        Command::Feasible { grid, demand, method, json, resolution, budget, p } => {
            let core = load_core(&grid)?;
            let demand = parse_demand(&demand)?;
            check_demand(&core, &demand)?;
            let opts = DecideOptions {
                method: method.into(),
                resolution,
                lmi_budget: budget,
                bolognani_p: p,
                ..Default::default()
            };
            let start = Instant::now();
            let r = decide(&core, &demand, &opts)?;
            let name = format!("{method:?}").to_lowercase();
            let report = FeasibleReport::new(&core, &demand, &name, &r, start.elapsed().as_secs_f64() * 1e3);
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.render());
            }
            Ok(report.exit_code)
        }
        Command::OperatingPoint { grid, demand, trace, json } => {
            let core = load_core(&grid)?;
            let demand = parse_demand(&demand)?;
            check_demand(&core, &demand)?;
            let opts = SolveOptions { record_trace: trace.is_some(), ..Default::default() };
            let start = Instant::now();
            let r = dcpf::solve_desired(&core, &demand, &opts)?;
            let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            if let (Some(path), Some(points)) = (&trace, &r.trace) {
                let mut w = csv::Writer::from_writer(sink(&Some(path.clone()))?);
                let mut head = vec!["theta".to_string()];
                head.extend(header("v_", core.n()));
                head.push("perron_root".into());
                w.write_record(&head)?;
                for t in points {
                    let mut row = vec![sci(t.theta)];
                    row.extend(t.v.iter().map(|&x| sci(x)));
                    row.push(sci(t.perron_root));
                    w.write_record(&row)?;
                }
                w.flush()?;
            }
            let (stability, diss) = match &r.v {
                Some(v) => (Some(classify(&core, v)?), Some(dissipation(&core, v)?)),
                None => (None, None),
            };
            let verdict = r.verdict;
            let report = OperatingPointReport {
                grid: GridSummary::of(&core),
                demand: demand.iter().copied().collect(),
                verdict,
                exit_code: dcpf::Decision::from(verdict).exit_code(),
                ray: RayReport::of(&r),
                degenerate_ray: demand.iter().all(|&x| x == 0.0),
                operating_point: r.v.as_ref().map(|v| v.iter().copied().collect()),
                stability,
                dissipation: diss,
                elapsed_ms,
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.render());
            }
            Ok(report.exit_code)
        }
        Command::Boundary { grid, family, samples, out, seed } => {
            if samples < 2 {
                bail!("InvalidArgument: --samples must be at least 2");
            }
            let core = load_core(&grid)?;
            let family: Family = family.into();
            let sweep = sweep_boundary(&core, family, samples, seed, Execution::default());
            let n = core.n();
            let mut w = csv::Writer::from_writer(sink(&out)?);
            let mut head = vec!["family".to_string()];
            head.extend(header("param_", n));
            head.extend(header("v_", n));
            head.extend(header("p_", n));
            head.push("residual".into());
            w.write_record(&head)?;
            for b in &sweep.points {
                let mut row = vec![family.tag().to_string()];
                for x in b.param.iter().chain(b.v.iter()).chain(b.p.iter()) {
                    row.push(sci(*x));
                }
                row.push(sci(b.residual));
                w.write_record(&row)?;
            }
            w.flush()?;
            let worst = sweep.points.iter().map(|b| b.residual).fold(0.0, f64::max);
            eprintln!(
                "{} boundary points ({} skipped), max residual {:.3e}",
                sweep.points.len(),
                sweep.skipped.len(),
                worst
            );
            Ok(0)
        }
        Command::Certificate { grid, demand, budget, json } => {
            let core = load_core(&grid)?;
            let demand = parse_demand(&demand)?;
            check_demand(&core, &demand)?;
            let cert = find_certificate(&core, &demand, budget, &[]);
            let exit_code = if cert.is_some() { 2 } else { 4 };
            let report = CertificateSearchReport {
                demand: demand.iter().copied().collect(),
                budget,
                found: cert.is_some(),
                certificate: cert.map(|c| CertificateReport { nu: c.nu.iter().copied().collect(), min_eigenvalue: c.min_eig }),
                exit_code,
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else if let Some(c) = &report.certificate {
                println!("infeasible: certificate nu = {} (min eigenvalue {:.3e})", crate::report::fmt(&c.nu), c.min_eigenvalue);
            } else {
                println!("no certificate within {budget} evaluations");
            }
            Ok(report.exit_code)
        }
        Command::TightPoints { grid, out } => {
            let core = load_core(&grid)?;
            let points = tight_points(&core, Execution::default())?;
            let mut w = csv::Writer::from_writer(sink(&out)?);
            let mut head = vec!["subset".to_string()];
            head.extend(header("p_", core.n()));
            w.write_record(&head)?;
            for (alpha, p) in points {
                let subset: Vec<String> = alpha.iter().map(|i| i.to_string()).collect();
                let mut row = vec![subset.join(" ")];
                row.extend(p.iter().map(|&x| sci(x)));
                w.write_record(&row)?;
            }
            w.flush()?;
            Ok(0)
        }
    }
}

fn validate(grid: &Path, json: bool) -> Result<i32> {
    let text = std::fs::read_to_string(grid).with_context(|| format!("reading {}", grid.display()))?;
    let report = match parse_grid_json(&text).and_then(|g| {
        let inv = g.partition.diagnose();
        make_core(g.partition, g.source_voltages).map(|c| (inv, c))
    }) {
        Ok((inv, core)) => ValidateReport { valid: true, error: None, invariants: Some(inv), grid: Some(GridSummary::of(&core)) },
        Err(e) => ValidateReport { valid: false, error: Some(format!("{}: {e}", e.kind())), invariants: None, grid: None },
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else if let (Some(inv), Some(g)) = (&report.invariants, &report.grid) {
        println!("valid: {} loads, {} sources", g.n, g.m);
        println!("row sums: residual {:.3e} (tolerance {:.3e})", inv.row_sum_residual, inv.row_sum_tolerance);
        println!("symmetric: {}, Z-matrix: {}, connected: {}", inv.symmetric, inv.z_matrix, inv.connected);
        println!("load block irreducible: {}, nonsingular M-matrix: {}", inv.load_block_irreducible, inv.load_block_nonsingular_m);
        println!("V* = {}", crate::report::fmt(&g.v_star));
        println!("I* = {}", crate::report::fmt(&g.i_star));
        println!("P_max = {}", crate::report::fmt(&g.p_max));
    } else {
        println!("{}", report.error.as_deref().unwrap_or("invalid"));
    }
    Ok(if report.valid { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_demands() {
        assert_eq!(parse_demand("0.1, -0.2,3").unwrap().as_slice(), &[0.1, -0.2, 3.0]);
        assert!(parse_demand("0.1,x").is_err());
        assert!(parse_demand("inf").is_err());
    }

    #[test]
    fn csv_floats_keep_seventeen_digits() {
        let x = 0.1 + 0.2;
        assert_eq!(sci(x).parse::<f64>().unwrap(), x);
        assert_eq!(sci(0.375), "3.7500000000000000e-1");
    }

    #[test]
    fn arguments_accept_negative_demands() {
        let cli = Cli::try_parse_from(["dcpf", "feasible", "g.json", "-0.5,0.2", "--method", "lmi"]).unwrap();
        match cli.command {
            Command::Feasible { demand, method, .. } => {
                assert_eq!(demand, "-0.5,0.2");
                assert!(matches!(method, MethodArg::Lmi));
            }
            _ => panic!("wrong subcommand"),
        }
    }
}
