//! Command-line front end.
//!
//! Every subcommand reads a [`RunConfig`], optionally loaded from a JSON file
//! given with `--config`, with command-line flags taking precedence. Results
//! are written as JSON (and CSV where noted) to `--out` or standard output;
//! one-line summaries go to standard error.
//!
//! Exit codes: 0 pass, 1 inequality violation, 2 unsupported or invalid
//! request, 3 degenerate λ range, 4 solver failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::discrete::{assemble_fd, eigensolve_p2, min_p_rayleigh, RayleighOptions};
use crate::domain::{rasterize, Domain};
use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::exact_spectra::weyl_constant_1d;
use crate::packing::{pack_cubes, partition_cubes, validate_packing, Packing};
use crate::spectrum::{Bc, Exactness, Spectrum};
use crate::sweep::{
    sweep_cutoff, sweep_ddm_boxes, sweep_ddm_intervals, sweep_energy_split, sweep_ndm_intervals,
    sweep_scaling, EnergySplitReport, SweepReport, SWEEP_GRID_POINTS,
};
use crate::weyl::{
    check_constant_equality, check_cutoff_inequality, check_dirichlet_monotonicity,
    check_friedlander_bounds, check_neumann_monotonicity, check_scaling, counting_curve,
    exact_weyl_estimate, log_grid, log_grid_points, sandwich_weyl, ConstantComparison,
    ExactProvider, InequalityReport, SpectrumProvider, Verdict, DEFAULT_PER_DECADE,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_UNSUPPORTED: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

/// Default grid spacing for discrete spectra.
pub const DEFAULT_H: f64 = 1.0 / 32.0;

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Estimation(_) => EXIT_DEGENERATE,
        Error::Solver(_) | Error::Resource(_) => EXIT_SOLVER,
        _ => EXIT_UNSUPPORTED,
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "pweyl",
    version,
    about = "p-Laplacian spectra, counting functions and Weyl-law checks"
)]
pub struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigenvalues of a domain below --lambda-max.
    Spectrum(RunConfig),
    /// Counting curve and Weyl-constant estimate.
    Weyl(RunConfig),
    /// Check one statement on a given instance or on a random sweep.
    Check {
        statement: Statement,
        #[command(flatten)]
        cfg: RunConfig,
    },
    /// Cube packing (--eps) or cube partition (--k) of a box union.
    Pack(RunConfig),
    /// Dirichlet/Neumann bracketing of a box union's counting function.
    Sandwich(RunConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statement {
    Ddm,
    Ndm,
    Scaling,
    Cutoff,
    Friedlander,
    ConstantEquality,
    EnergySplit,
}

/// Parameters shared by all subcommands. Unused fields are ignored.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Domain JSON file.
    #[arg(long)]
    pub domain: Option<PathBuf>,
    /// Packing JSON file (ddm / ndm checks).
    #[arg(long)]
    pub packing: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub bc: Option<Bc>,
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub per_decade: Option<usize>,
    #[arg(long)]
    pub window_fraction: Option<f64>,
    /// Grid spacing for discrete solvers.
    #[arg(long)]
    pub h: Option<f64>,
    /// Solver or comparison tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Compute only the first eigenvalue, variationally when no exact
    /// spectrum is available.
    #[arg(long)]
    pub first_eigenvalue: bool,
    /// Number of random instances.
    #[arg(long)]
    pub sweep: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scale factor for the scaling check, e.g. "2" or "1/3".
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub l1: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    /// Cubes per shortest side for partitions.
    #[arg(long)]
    pub k: Option<u32>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV file (or prefix for sandwich) for counting curves.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            domain: self.domain.or(base.domain),
            packing: self.packing.or(base.packing),
            p: self.p.or(base.p),
            bc: self.bc.or(base.bc),
            lambda_min: self.lambda_min.or(base.lambda_min),
            lambda_max: self.lambda_max.or(base.lambda_max),
            per_decade: self.per_decade.or(base.per_decade),
            window_fraction: self.window_fraction.or(base.window_fraction),
            h: self.h.or(base.h),
            tol: self.tol.or(base.tol),
            first_eigenvalue: self.first_eigenvalue || base.first_eigenvalue,
            sweep: self.sweep.or(base.sweep),
            seed: self.seed.or(base.seed),
            a: self.a.or(base.a),
            eps: self.eps.or(base.eps),
            l1: self.l1.or(base.l1),
            l2: self.l2.or(base.l2),
            k: self.k.or(base.k),
            out: self.out.or(base.out),
            csv: self.csv.or(base.csv),
        }
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    fn p(&self) -> Result<f64> {
        let p = self.p.unwrap_or(2.0);
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Argument(format!("p must lie in (1, inf), got {p}")));
        }
        Ok(p)
    }

    fn lambda_max(&self) -> Result<f64> {
        match self.lambda_max {
            Some(l) if l > 0.0 && l.is_finite() => Ok(l),
            Some(l) => Err(Error::Argument(format!(
                "lambda-max must be positive, got {l}"
            ))),
            None => Err(Error::Argument("--lambda-max is required".into())),
        }
    }

    fn domain(&self) -> Result<Domain> {
        let path = self
            .domain
            .as_ref()
            .ok_or_else(|| Error::Argument("--domain is required".into()))?;
        Domain::from_json(&std::fs::read_to_string(path)?)
    }

    fn domain_or(&self, fallback: Domain) -> Result<Domain> {
        if self.domain.is_some() {
            self.domain()
        } else {
            Ok(fallback)
        }
    }

    fn bc_for(&self, d: &Domain) -> Bc {
        self.bc.unwrap_or(match d {
            Domain::Torus { .. } => Bc::Periodic,
            _ => Bc::Dirichlet,
        })
    }
}

/// Result of a `check` run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub statement: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweeps: Vec<SweepReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<InequalityReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub energy: Vec<EnergySplitReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constants: Vec<ConstantComparison>,
}

impl CheckSummary {
    fn finish(mut self) -> Self {
        self.passed = self.sweeps.iter().all(SweepReport::passed)
            && self.reports.iter().all(InequalityReport::passed)
            && self.energy.iter().all(EnergySplitReport::passed)
            && self.constants.iter().all(|c| c.verdict == Verdict::Pass);
        self
    }
}

/// Output of one command: the payload plus its exit code.
pub struct Outcome {
    pub json: String,
    pub summary: String,
    pub code: i32,
}

fn emit<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Parses `args` and runs the command, writing to the given streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() {
                EXIT_UNSUPPORTED
            } else {
                EXIT_PASS
            };
        }
    };
    match execute(cli) {
        Ok((o, path)) => {
            let written = match path {
                Some(p) => std::fs::write(&p, &o.json).map_err(Error::from),
                None => out.write_all(o.json.as_bytes()).map_err(Error::from),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_UNSUPPORTED;
            }
            let _ = writeln!(err, "{}", o.summary);
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(
        args,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

fn execute(cli: Cli) -> Result<(Outcome, Option<PathBuf>)> {
    let base = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let (outcome, cfg) = match cli.command {
        Command::Spectrum(c) => {
            let cfg = c.over(base);
            (cmd_spectrum(&cfg)?, cfg)
        }
        Command::Weyl(c) => {
            let cfg = c.over(base);
            (cmd_weyl(&cfg)?, cfg)
        }
        Command::Check { statement, cfg: c } => {
            let cfg = c.over(base);
            (cmd_check(statement, &cfg)?, cfg)
        }
        Command::Pack(c) => {
            let cfg = c.over(base);
            (cmd_pack(&cfg)?, cfg)
        }
        Command::Sandwich(c) => {
            let cfg = c.over(base);
            (cmd_sandwich(&cfg)?, cfg)
        }
    };
    Ok((outcome, cfg.out))
}

fn first_only(mut s: Spectrum) -> Spectrum {
    s.eigenvalues.truncate(1);
    s
}

/// Exact first eigenvalue by doubling the search range.
fn exact_first(pv: &ExactProvider, d: &Domain, p: f64, bc: Bc) -> Result<Spectrum> {
    let mut top = 1.0;
    for _ in 0..200 {
        let s = pv.spectrum(d, p, bc, top)?;
        if !s.is_empty() {
            return Ok(first_only(s));
        }
        top *= 4.0;
    }
    Err(Error::Solver("no eigenvalue found".into()))
}

fn discrete_mask(cfg: &RunConfig, d: &Domain) -> Result<crate::domain::GridMask> {
    match d {
        Domain::GridMask(g) => Ok(g.clone()),
        Domain::Interval { .. } | Domain::BoxUnion { .. } => {
            rasterize(d, cfg.h.unwrap_or(DEFAULT_H))
        }
        Domain::Torus { .. } => Err(Error::Unsupported(
            "discrete solvers do not handle tori".into(),
        )),
    }
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.domain()?;
    let p = cfg.p()?;
    let bc = cfg.bc_for(&d);
    let pv = ExactProvider::default();
    let exact = if cfg.first_eigenvalue {
        exact_first(&pv, &d, p, bc)
    } else {
        pv.spectrum(&d, p, bc, cfg.lambda_max()?)
    };
    let s = match exact {
        Ok(s) => s,
        Err(Error::Unsupported(why)) => {
            if p == 2.0 && bc != Bc::Periodic {
                let mask = discrete_mask(cfg, &d)?;
                let full = eigensolve_p2(&assemble_fd(&mask, bc)?)?;
                if cfg.first_eigenvalue {
                    first_only(full)
                } else {
                    let top = cfg.lambda_max()?;
                    let mut s = full;
                    s.eigenvalues.retain(|&(v, _)| v < top);
                    s
                }
            } else if cfg.first_eigenvalue {
                if bc == Bc::Periodic {
                    return Err(Error::Unsupported(why));
                }
                let mask = discrete_mask(cfg, &d)?;
                let tol = cfg.tol.unwrap_or(1e-8);
                let r = min_p_rayleigh(&mask, p, bc, &RayleighOptions::with_tol(tol))?;
                let meta = r.meta(tol);
                let vol = mask.volume_exact().to_f64();
                Spectrum::from_values(vec![r.lambda], p, bc, Exactness::Discrete, mask.dim(), vol)
                    .with_solver(meta)
            } else {
                return Err(Error::Unsupported(format!(
                    "{why}; full spectra for p != 2 exist only on intervals, \
                     rerun with --first-eigenvalue for the variational first eigenvalue"
                )));
            }
        }
        Err(e) => return Err(e),
    };
    Ok(Outcome {
        summary: format!(
            "{} eigenvalues ({} distinct), exactness {:?}",
            s.len(),
            s.eigenvalues.len(),
            s.exactness
        ),
        json: emit(&s)?,
        code: EXIT_PASS,
    })
}

#[derive(Serialize, Deserialize)]
struct WeylOutput {
    estimate: crate::weyl::WeylEstimate,
    n: usize,
    p: f64,
    bc: Bc,
    domain_volume: f64,
}

pub fn cmd_weyl(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.domain()?;
    let p = cfg.p()?;
    let bc = cfg.bc_for(&d);
    let top = cfg.lambda_max()?;
    let lo = cfg.lambda_min.unwrap_or(top / 100.0);
    let frac = cfg.window_fraction.unwrap_or(0.5);
    let (curve, est) = if cfg.per_decade.is_some_and(|k| k != DEFAULT_PER_DECADE) {
        let pv = ExactProvider::default();
        let s = pv.spectrum(&d, p, bc, top * (1.0 + 1e-9))?;
        let c = counting_curve(
            &s,
            &log_grid(lo, top, cfg.per_decade.unwrap_or(DEFAULT_PER_DECADE))?,
        )?;
        let e = crate::weyl::estimate_weyl_constant(&c, frac)?;
        (c, e)
    } else {
        exact_weyl_estimate(&d, p, bc, lo, top, frac, &ExactProvider::default())?
    };
    if let Some(path) = &cfg.csv {
        std::fs::write(path, curve.to_csv())?;
    }
    let summary = format!(
        "c_hat = {} per unit volume, spread {}, window [{}, {}]",
        est.c_hat, est.spread, est.window[0], est.window[1]
    );
    let out = WeylOutput {
        estimate: est,
        n: curve.n,
        p,
        bc,
        domain_volume: curve.domain_volume,
    };
    Ok(Outcome {
        json: emit(&out)?,
        summary,
        code: EXIT_PASS,
    })
}

fn parse_exact(s: &str) -> Result<Exact> {
    let a: Exact = s.parse()?;
    if !a.is_positive() {
        return Err(Error::Argument(format!(
            "scale factor must be positive, got {a}"
        )));
    }
    Ok(a)
}

fn check_grid(cfg: &RunConfig, lo: f64, hi: f64) -> Result<Vec<f64>> {
    log_grid_points(
        cfg.lambda_min.unwrap_or(lo),
        cfg.lambda_max.unwrap_or(hi),
        SWEEP_GRID_POINTS,
    )
}

fn load_packing(cfg: &RunConfig) -> Result<Option<Packing>> {
    match &cfg.packing {
        Some(path) => Ok(Some(Packing::from_json(&std::fs::read_to_string(path)?)?)),
        None => Ok(None),
    }
}

/// Default upper end of the λ range for comparing the two constants: at
/// least `1e8`, and for intervals high enough that the Dirichlet count
/// reaches `1e4`, since the two counts differ by one.
pub fn default_constant_range(d: &Domain, p: f64) -> Result<f64> {
    Ok(match d {
        Domain::Interval { length, .. } => {
            let c = weyl_constant_1d(p)? * length.to_f64();
            (1e4 / c).powf(p).max(1e8)
        }
        _ => 1e8,
    })
}

pub fn cmd_check(statement: Statement, cfg: &RunConfig) -> Result<Outcome> {
    let seed = cfg.seed.unwrap_or(0);
    let pv = ExactProvider::default();
    let mut out = CheckSummary {
        statement: serde_json::to_value(statement)?
            .as_str()
            .unwrap_or_default()
            .to_string(),
        ..CheckSummary::default()
    };
    match statement {
        Statement::Ddm => match load_packing(cfg)? {
            Some(pk) => out.reports.push(check_dirichlet_monotonicity(
                &pk,
                &check_grid(cfg, 1.0, 1e5)?,
                cfg.p()?,
                &pv,
            )?),
            None => {
                let n = cfg.sweep.unwrap_or(100);
                out.sweeps.push(sweep_ddm_boxes(n, seed)?);
                out.sweeps
                    .push(sweep_ddm_intervals(n, seed, &[1.5, 2.0, 3.0])?);
            }
        },
        Statement::Ndm => match load_packing(cfg)? {
            Some(pk) => out.reports.push(check_neumann_monotonicity(
                &pk,
                &check_grid(cfg, 1.0, 1e5)?,
                cfg.p()?,
                &pv,
            )?),
            None => {
                let n = cfg.sweep.unwrap_or(100);
                out.sweeps
                    .push(sweep_ndm_intervals(n, seed, &[1.5, 2.0, 3.0])?);
                let grid = check_grid(cfg, 1.0, 1e5)?;
                for k in [2, 3, 4] {
                    let pk = partition_cubes(&Domain::unit_cube(2), k)?;
                    out.reports
                        .push(check_neumann_monotonicity(&pk, &grid, 2.0, &pv)?);
                }
            }
        },
        Statement::Scaling => match cfg.sweep {
            Some(n) => out.sweeps.push(sweep_scaling(n, seed)?),
            None => {
                let d = cfg.domain_or(Domain::unit_interval())?;
                let a = parse_exact(cfg.a.as_deref().unwrap_or("2"))?;
                let bc = cfg.bc_for(&d);
                out.reports.push(check_scaling(
                    &d,
                    &a,
                    cfg.p()?,
                    bc,
                    &check_grid(cfg, 1.0, 1e4)?,
                    &pv,
                )?);
            }
        },
        Statement::Cutoff => match cfg.sweep {
            Some(n) => out.sweeps.push(sweep_cutoff(n, seed, &[1.5, 2.0, 3.0])?),
            None => {
                let need = |v: Option<f64>, name: &str| {
                    v.ok_or_else(|| {
                        Error::Argument(format!("--{name} is required without --sweep"))
                    })
                };
                let (eps, l1, l2) = (
                    need(cfg.eps, "eps")?,
                    need(cfg.l1, "l1")?,
                    need(cfg.l2, "l2")?,
                );
                out.reports
                    .push(check_cutoff_inequality(1.0, eps, l1, l2, cfg.p()?, &pv)?);
            }
        },
        Statement::Friedlander => {
            let d = cfg.domain_or(Domain::unit_interval())?;
            let top = cfg.lambda_max.unwrap_or(1e6);
            let (curve, _) = exact_weyl_estimate(&d, cfg.p()?, cfg.bc_for(&d), 1.0, top, 0.5, &pv)?;
            let edges: Vec<Option<f64>> = match cfg.lambda_min {
                Some(e) => vec![Some(e)],
                None => vec![None],
            };
            for e in edges {
                out.reports.push(check_friedlander_bounds(&curve, e)?);
            }
        }
        Statement::ConstantEquality => {
            let d = cfg.domain_or(Domain::unit_interval())?;
            let p = cfg.p()?;
            let top = match cfg.lambda_max {
                Some(t) => t,
                None => default_constant_range(&d, p)?,
            };
            let lo = cfg.lambda_min.unwrap_or(top / 100.0);
            let frac = cfg.window_fraction.unwrap_or(0.5);
            let (_, c0) = exact_weyl_estimate(&d, p, Bc::Dirichlet, lo, top, frac, &pv)?;
            let (_, c) = exact_weyl_estimate(&d, p, Bc::Neumann, lo, top, frac, &pv)?;
            out.constants
                .push(check_constant_equality(&c0, &c, cfg.tol.unwrap_or(5e-3)));
        }
        Statement::EnergySplit => {
            let n = cfg.sweep.unwrap_or(1000);
            let ps = match cfg.p {
                Some(_) => vec![cfg.p()?],
                None => vec![1.5, 2.0, 3.0, 4.0],
            };
            for p in ps {
                out.energy.push(sweep_energy_split(n, seed, p)?);
            }
        }
    }
    let out = out.finish();
    Ok(Outcome {
        summary: format!(
            "{}: {}",
            out.statement,
            if out.passed { "pass" } else { "FAIL" }
        ),
        code: if out.passed {
            EXIT_PASS
        } else {
            EXIT_VIOLATION
        },
        json: emit(&out)?,
    })
}

pub fn cmd_pack(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.domain()?;
    let pk = match (cfg.eps, cfg.k) {
        (Some(eps), None) => pack_cubes(&d, eps)?,
        (None, Some(k)) => partition_cubes(&d, k)?,
        _ => return Err(Error::Argument("give exactly one of --eps or --k".into())),
    };
    let rep = validate_packing(&pk);
    Ok(Outcome {
        summary: format!(
            "{} cubes, piece volume {} of {}, valid: {}",
            pk.items.len(),
            rep.piece_volume,
            rep.ambient_volume,
            rep.valid
        ),
        code: if rep.valid { EXIT_PASS } else { EXIT_VIOLATION },
        json: pk.to_json()? + "\n",
    })
}

pub fn cmd_sandwich(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.domain()?;
    if cfg.p.is_some_and(|p| p != 2.0) {
        return Err(Error::Unsupported(
            "sandwich bounds are implemented for p = 2 only".into(),
        ));
    }
    let top = cfg.lambda_max()?;
    let lo = cfg.lambda_min.unwrap_or(top / 1000.0);
    let grid = log_grid(lo, top, cfg.per_decade.unwrap_or(DEFAULT_PER_DECADE))?;
    let sw = sandwich_weyl(&d, &grid, cfg.window_fraction.unwrap_or(0.5))?;
    if let Some(prefix) = &cfg.csv {
        let name = prefix.to_string_lossy();
        std::fs::write(format!("{name}-lower.csv"), sw.lower.to_csv())?;
        std::fs::write(format!("{name}-upper.csv"), sw.upper.to_csv())?;
    }
    let last = sw.lower.len() - 1;
    Ok(Outcome {
        summary: format!(
            "lower f = {}, upper f = {} at λ = {}; c_hat = {} per unit volume; ordered: {}",
            sw.lower.f[last],
            sw.upper.f[last],
            sw.lower.lambda[last],
            sw.estimate.c_hat,
            sw.ordered
        ),
        code: if sw.ordered {
            EXIT_PASS
        } else {
            EXIT_VIOLATION
        },
        json: emit(&sw)?,
    })
}
