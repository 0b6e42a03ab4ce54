//! Command-line front end: `seed`, `build`, `solve`, `report`, `export`.
//!
//! Every job can be described by one JSON config file; command-line flags
//! override its keys. Exit codes are listed in [`exit_code`].

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ambient::{GroupPoint, Params};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::gaussdata::{max_residual, recover_f_sol, GaussData};
use crate::grid::{ComplexGrid, Field};
use crate::heatflow::{flow, harmonic_extension, sol_data, BoundaryValues, FlowConfig, DEFAULT_SINGULAR_MARGIN};
use crate::integrator::{integrate_surface_with, loop_defect, Immersion, IntegrateOptions, DEFAULT_GATE};
use crate::io;
use crate::stencil::StencilOrder;
use crate::targetmetric::{MetricKind, SingularMetric};
use crate::verify::{surface_report, SurfaceReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;
pub const EXIT_NOT_CONVERGED: i32 = 5;
pub const EXIT_THRESHOLD: i32 = 6;
pub const EXIT_RESIDUAL_GATE: i32 = 7;
pub const EXIT_NUMERICAL: i32 = 8;

pub const DEFAULT_THRESHOLD: f64 = 1e-2;

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::InvalidConfig(_) => EXIT_USAGE,
        Error::Parse(_) | Error::Expression(_) => EXIT_PARSE,
        Error::InvalidGrid(_)
        | Error::FieldSize { .. }
        | Error::DomainViolation(_)
        | Error::DivisionAtNode(..)
        | Error::NorthPole
        | Error::SingularSet(..)
        | Error::OnSingularSet { .. }
        | Error::NoTargetMetric { .. }
        | Error::DegenerateData { .. }
        | Error::SingularSetHit { .. } => EXIT_DOMAIN,
        Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
        Error::ResidualTooLarge { .. } => EXIT_RESIDUAL_GATE,
        Error::Overflow(..) | Error::DegenerateNode(..) | Error::DegenerateDenominator => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "solmin",
    version,
    about = "Minimal surfaces in the solvable groups G(mu1, mu2)"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// First structure constant (default 1)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu1: Option<f64>,
    /// Second structure constant (default -1)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu2: Option<f64>,
    /// Rectangular parameter grid: corners and node counts
    #[arg(
        long,
        global = true,
        value_name = "RE0,IM0,RE1,IM1,NRE,NIM",
        allow_hyphen_values = true
    )]
    pub grid: Option<String>,
    /// JSON job description; flags override its keys
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: current directory)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Integrate data that fail the residual gate
    #[arg(long, global = true)]
    pub force: bool,
    /// Residual target of the flow (solve) or residual gate (build)
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SeedName {
    /// f = 1, g = 0: the plane x3 = 0
    VerticalPlane,
    /// f = i / (mu1 (z + zbar)), g = -i: a plane x2 = const
    X2Plane,
    /// g given by an expression in z
    Holomorphic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricArg {
    Kokubu,
    Sol,
}

impl From<MetricArg> for SingularMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Kokubu => SingularMetric::kokubu(),
            MetricArg::Sol => SingularMetric::sol(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write Gauss data (and its boundary trace) for a known example
    Seed {
        name: Option<SeedName>,
        /// Gauss map g(z) for the holomorphic seed
        #[arg(long, allow_hyphen_values = true)]
        expr: Option<String>,
        /// f(z) for the holomorphic seed; for Sol, f is recovered from g when omitted
        #[arg(long, allow_hyphen_values = true)]
        f_expr: Option<String>,
        /// Use the complex conjugate of the expression as g
        #[arg(long)]
        conjugate: bool,
        /// Require the image of g to stay off this metric's singular set
        #[arg(long, value_enum)]
        metric: Option<MetricArg>,
    },
    /// Integrate Gauss data into an immersion and verify it
    Build { data: PathBuf },
    /// Solve the Dirichlet problem for the Gauss map into Sol and build the surface
    Solve {
        boundary: PathBuf,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Verify an immersion, optionally against its Gauss data
    Report {
        immersion: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Write an immersion as an OBJ mesh
    Export { immersion: PathBuf },
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    pub name: Option<SeedName>,
    pub expr: Option<String>,
    pub f_expr: Option<String>,
    pub conjugate: Option<bool>,
    pub metric: Option<MetricArg>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSettings {
    pub dt: Option<f64>,
    pub max_iters: Option<usize>,
    pub singular_margin: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub mean_curvature: f64,
    pub conformal_defect: f64,
    pub gauss_map_mismatch: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            mean_curvature: DEFAULT_THRESHOLD,
            conformal_defect: DEFAULT_THRESHOLD,
            gauss_map_mismatch: DEFAULT_THRESHOLD,
        }
    }
}

/// One job as a JSON document. Keys mirror the command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    /// Same format as `--grid`.
    pub grid: Option<String>,
    pub out: Option<PathBuf>,
    pub force: Option<bool>,
    pub tol: Option<f64>,
    /// Base point `x(z0)` of the integration.
    pub base: Option<[f64; 3]>,
    pub seed: Option<SeedConfig>,
    pub flow: Option<FlowSettings>,
    pub thresholds: Option<Thresholds>,
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::InvalidConfig(m) => Error::InvalidConfig(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: JobConfig = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("mu1", self.mu1), ("mu2", self.mu2), ("tol", self.tol)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::InvalidConfig(format!("{name} must be finite")));
                }
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::InvalidConfig("tol must be positive".into()));
            }
        }
        if let Some(g) = &self.grid {
            parse_grid(g)?;
        }
        if let Some(t) = &self.thresholds {
            if !(t.mean_curvature >= 0.0 && t.conformal_defect >= 0.0 && t.gauss_map_mismatch >= 0.0) {
                return Err(Error::InvalidConfig("thresholds must be non-negative".into()));
            }
        }
        Ok(())
    }
}

/// Parses `re0,im0,re1,im1,nre,nim`.
pub fn parse_grid(spec: &str) -> Result<ComplexGrid> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(Error::InvalidConfig(format!(
            "grid '{spec}' must have the form re0,im0,re1,im1,nre,nim"
        )));
    }
    let mut b = [0.0; 4];
    for (v, p) in b.iter_mut().zip(&parts[..4]) {
        *v = p
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("grid: '{p}' is not a number")))?;
    }
    let mut n = [0usize; 2];
    for (v, p) in n.iter_mut().zip(&parts[4..]) {
        *v = p
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("grid: '{p}' is not a node count")))?;
    }
    ComplexGrid::from_bounds(b[0], b[1], b[2], b[3], n[0], n[1])
        .map_err(|e| Error::InvalidConfig(format!("grid '{spec}': {e}")))
}

/// Config merged with flags.
struct Job {
    mu1: Option<f64>,
    mu2: Option<f64>,
    grid: Option<ComplexGrid>,
    out: PathBuf,
    force: bool,
    tol: Option<f64>,
    base: GroupPoint,
    seed: SeedConfig,
    flow: FlowSettings,
    thresholds: Thresholds,
}

impl Job {
    fn new(common: &CommonArgs) -> Result<Job> {
        let cfg = match &common.config {
            Some(p) => JobConfig::load(p)?,
            None => JobConfig::default(),
        };
        let grid_spec = common.grid.clone().or(cfg.grid);
        let tol = common.tol.or(cfg.tol);
        if let Some(t) = tol {
            if !(t > 0.0) {
                return Err(Error::InvalidConfig("tol must be positive".into()));
            }
        }
        let base = cfg.base.unwrap_or([0.0; 3]);
        Ok(Job {
            mu1: common.mu1.or(cfg.mu1),
            mu2: common.mu2.or(cfg.mu2),
            grid: grid_spec.as_deref().map(parse_grid).transpose()?,
            out: common.out.clone().or(cfg.out).unwrap_or_else(|| PathBuf::from(".")),
            force: common.force || cfg.force.unwrap_or(false),
            tol,
            base: GroupPoint::new(base[0], base[1], base[2]),
            seed: cfg.seed.unwrap_or_default(),
            flow: cfg.flow.unwrap_or_default(),
            thresholds: cfg.thresholds.unwrap_or_default(),
        })
    }

    /// Parameters, with flags and config taking precedence over `fallback`.
    fn params(&self, fallback: Params) -> Result<Params> {
        let p = Params::new(self.mu1.unwrap_or(fallback.mu1), self.mu2.unwrap_or(fallback.mu2));
        if !p.is_finite() {
            return Err(Error::InvalidConfig("mu1 and mu2 must be finite".into()));
        }
        Ok(p)
    }

    fn grid(&self) -> Result<ComplexGrid> {
        self.grid
            .ok_or_else(|| Error::InvalidConfig("a grid is required (--grid or config key \"grid\")".into()))
    }

    fn out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out).map_err(|e| Error::Io(format!("{}: {e}", self.out.display())))?;
        Ok(&self.out)
    }
}

/// Report written by `build`, `solve` and `report`.
#[derive(Debug, Clone, Serialize)]
pub struct JobReport {
    pub mu1: f64,
    pub mu2: f64,
    pub grid: ComplexGrid,
    /// Max-norm residual of the first-order system, when data are known.
    pub residual_max: Option<f64>,
    pub loop_defect_max: Option<f64>,
    #[serde(flatten)]
    pub surface: SurfaceReport,
    pub thresholds: Thresholds,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn check(name: &'static str, value: f64, threshold: f64) -> Check {
    // NaN compares false and so fails
    Check {
        name,
        value,
        threshold,
        pass: value <= threshold,
    }
}

fn job_report(s: &Immersion, d: Option<&GaussData>, thresholds: Thresholds) -> Result<JobReport> {
    let surface = surface_report(s, d)?;
    let mut checks = vec![
        check("mean_curvature", surface.max_mean_curvature, thresholds.mean_curvature),
        check(
            "conformal_defect",
            surface.max_conformal_defect,
            thresholds.conformal_defect,
        ),
    ];
    if let Some(m) = surface.max_gauss_map_mismatch {
        checks.push(check("gauss_map_mismatch", m, thresholds.gauss_map_mismatch));
    }
    let pass = checks.iter().all(|c| c.pass) && surface.branch_nodes.is_empty();
    Ok(JobReport {
        mu1: s.params.mu1,
        mu2: s.params.mu2,
        grid: *s.grid(),
        residual_max: d.map(|d| max_residual(d, s.params, StencilOrder::Second)),
        loop_defect_max: d.map(|d| loop_defect(d, s.params).max()),
        surface,
        thresholds,
        checks,
        pass,
    })
}

/// Writes immersion, mesh, report and mean curvature; returns whether every
/// threshold passed.
fn write_surface(dir: &Path, s: &Immersion, d: Option<&GaussData>, thresholds: Thresholds) -> Result<bool> {
    io::save_immersion(dir, "immersion", s)?;
    io::write_obj(std::io::BufWriter::new(fs::File::create(dir.join("surface.obj"))?), s)?;
    write_report(dir, s, d, thresholds)
}

fn write_report(dir: &Path, s: &Immersion, d: Option<&GaussData>, thresholds: Thresholds) -> Result<bool> {
    let report = job_report(s, d, thresholds)?;
    io::write_json(&dir.join("report.json"), &report)?;
    io::write_mean_curvature_csv(
        fs::File::create(dir.join("mean_curvature.csv"))?,
        &report.surface.mean_curvature_field,
    )?;
    Ok(report.pass)
}

fn eval_field(expr: &Expr, grid: ComplexGrid, conjugate: bool) -> Field<Complex64> {
    Field::from_fn(grid, |_, _, z| {
        let v = expr.eval(z);
        if conjugate {
            v.conj()
        } else {
            v
        }
    })
}

fn cmd_seed(job: &Job, name: SeedName) -> Result<bool> {
    let grid = job.grid()?;
    let p = job.params(Params::SOL)?;
    let seed = &job.seed;
    let data = match name {
        SeedName::VerticalPlane => GaussData::from_fn(grid, |_| (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)))?,
        SeedName::X2Plane => {
            if p.mu1 == 0.0 {
                return Err(Error::DomainViolation("x2_plane needs mu1 != 0".into()));
            }
            let (re0, re1) = (grid.z0.re, grid.z1().re);
            if re0 <= 0.0 && re1 >= 0.0 {
                return Err(Error::DomainViolation(format!(
                    "x2_plane needs Re z bounded away from 0, grid spans [{re0}, {re1}]"
                )));
            }
            let i = Complex64::i();
            GaussData::from_fn(grid, |z| (i / (p.mu1 * (z + z.conj())), -i))?
        }
        SeedName::Holomorphic => {
            let src = seed
                .expr
                .as_deref()
                .ok_or_else(|| Error::InvalidConfig("the holomorphic seed needs --expr".into()))?;
            let g = eval_field(&Expr::parse(src)?, grid, seed.conjugate.unwrap_or(false));
            if let Some((j, k)) = g.first_non_finite() {
                return Err(Error::DomainViolation(format!("g is not finite at node ({j}, {k})")));
            }
            if let Some(m) = seed.metric {
                let metric = SingularMetric::from(m);
                let margin = job.flow.singular_margin.unwrap_or(DEFAULT_SINGULAR_MARGIN);
                for (j, k) in grid.nodes() {
                    let w = g.at(j, k);
                    if !(metric.distance_to_singular_set(w) >= margin) {
                        return Err(Error::DomainViolation(format!(
                            "g({}) = {w} lies within {margin} of the singular set",
                            grid.node(j, k)
                        )));
                    }
                }
            }
            let f = match (&seed.f_expr, SingularMetric::for_params(p)) {
                (Some(src), _) => eval_field(&Expr::parse(src)?, grid, false),
                (None, Ok(m)) if m.kind == MetricKind::Sol => recover_f_sol(&g)?,
                (None, _) => Field::constant(grid, Complex64::new(1.0, 0.0)),
            };
            if let Some((j, k)) = f.first_non_finite() {
                return Err(Error::DomainViolation(format!("f is not finite at node ({j}, {k})")));
            }
            GaussData::new(f, g)?
        }
    };
    let dir = job.out_dir()?;
    io::save_gauss(dir, "gauss", &data, p)?;
    io::write_boundary_csv(
        fs::File::create(dir.join("boundary.csv"))?,
        &BoundaryValues::from_field(&data.g)?,
    )?;
    Ok(true)
}

fn cmd_build(job: &Job, data_path: &Path) -> Result<bool> {
    let (d, header_params) = io::load_gauss(data_path)?;
    let p = job.params(header_params)?;
    let opts = IntegrateOptions {
        base: job.base,
        gate: job.tol.unwrap_or(DEFAULT_GATE),
        force: job.force,
        ..Default::default()
    };
    let s = integrate_surface_with(&d, p, &opts)?;
    write_surface(job.out_dir()?, &s, Some(&d), job.thresholds)
}

fn cmd_solve(job: &Job, boundary_path: &Path, max_iters: Option<usize>) -> Result<bool> {
    let p = job.params(Params::SOL)?;
    if p != Params::SOL {
        return Err(Error::InvalidConfig(
            "solve builds surfaces in Sol and needs mu1 = 1, mu2 = -1".into(),
        ));
    }
    let grid = job.grid()?;
    let file = fs::File::open(boundary_path).map_err(|e| Error::Io(format!("{}: {e}", boundary_path.display())))?;
    let boundary = io::read_boundary_csv(file, grid)?;
    let mut cfg = FlowConfig::for_grid(SingularMetric::sol(), &grid);
    if let Some(dt) = job.flow.dt {
        cfg.dt = dt;
    }
    if let Some(n) = max_iters.or(job.flow.max_iters) {
        cfg.max_iters = n;
    }
    if let Some(m) = job.flow.singular_margin {
        cfg.singular_margin = m;
    }
    if let Some(t) = job.tol {
        cfg.tol = t;
    }
    let dir = job.out_dir()?;
    let result = flow(&harmonic_extension(&boundary), &boundary, &cfg)?;
    io::write_json(
        &dir.join("convergence.json"),
        &io::ConvergenceReport::new(&result, &cfg),
    )?;
    result.ensure_converged()?;
    let data = sol_data(&result.g)?;
    io::save_gauss(dir, "gauss", &data, p)?;
    let opts = IntegrateOptions {
        base: job.base,
        force: job.force,
        ..Default::default()
    };
    let s = integrate_surface_with(&data, p, &opts)?;
    write_surface(dir, &s, Some(&data), job.thresholds)
}

fn cmd_report(job: &Job, immersion: &Path, data: Option<&Path>) -> Result<bool> {
    let s = io::load_immersion(immersion)?;
    let d = match data {
        Some(path) => {
            let (d, _) = io::load_gauss(path)?;
            if d.grid() != s.grid() {
                return Err(Error::InvalidGrid("immersion and data live on different grids".into()));
            }
            Some(d)
        }
        None => None,
    };
    write_report(job.out_dir()?, &s, d.as_ref(), job.thresholds)
}

fn cmd_export(job: &Job, immersion: &Path) -> Result<bool> {
    let s = io::load_immersion(immersion)?;
    io::write_obj(
        std::io::BufWriter::new(fs::File::create(job.out_dir()?.join("surface.obj"))?),
        &s,
    )?;
    Ok(true)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = Job::new(&cli.common).and_then(|mut job| match cli.command {
        Command::Seed {
            name,
            expr,
            f_expr,
            conjugate,
            metric,
        } => {
            let seed = &mut job.seed;
            seed.expr = expr.or(seed.expr.take());
            seed.f_expr = f_expr.or(seed.f_expr.take());
            if conjugate {
                seed.conjugate = Some(true);
            }
            seed.metric = metric.or(seed.metric);
            let name = name
                .or(seed.name)
                .ok_or_else(|| Error::InvalidConfig("seed needs a name (argument or config seed.name)".into()))?;
            cmd_seed(&job, name)
        }
        Command::Build { data } => cmd_build(&job, &data),
        Command::Solve { boundary, max_iters } => cmd_solve(&job, &boundary, max_iters),
        Command::Report { immersion, data } => cmd_report(&job, &immersion, data.as_deref()),
        Command::Export { immersion } => cmd_export(&job, &immersion),
    });
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("solmin: one or more report thresholds failed (see report.json)");
            EXIT_THRESHOLD
        }
        Err(e) => {
            eprintln!("solmin: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
