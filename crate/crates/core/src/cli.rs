//! Command-line front end: `solve` and `diagnose` over a flat `key = value` config.

use crate::discrete_ops::{assemble, design_model, Integrator};
use crate::error::{Error, Result};
use crate::gain::{PoleLayout, PoleSpec};
use crate::grid::{build_grid, RectGrid};
use crate::observer::{self, Acceleration, GainMethod, ObserverConfig, ObserverProblem};
use crate::reference::{bottom_trace, make_cauchy_data, Kind, Parity, ReferenceSolution, Term};
use crate::spectral::{self, ModeSet};
use clap::{Parser, Subcommand};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

const GRAM_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "cauchy-observer",
    version,
    about = "Observer-based recovery of missing boundary data for the Laplace equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the observer sweeps and write boundary, history and gain CSVs.
    Solve(Invocation),
    /// Check the continuous spectral model and write spectral and observability CSVs.
    Diagnose(Invocation),
}

#[derive(Debug, clap::Args)]
struct Invocation {
    #[arg(long)]
    config: Option<PathBuf>,
    /// `--key value` pairs overriding entries of the config file.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Example {
    Neumann,
    Dirichlet,
    Combo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub example: Example,
    pub terms: Vec<Term>,
    pub a: f64,
    pub b: f64,
    pub nx: usize,
    pub ny: usize,
    pub gain_method: GainMethod,
    pub pole_layout: PoleLayout,
    pub pole_min: f64,
    pub pole_max: f64,
    pub integrator: Integrator,
    pub acceleration: Acceleration,
    /// `None` selects `1/dx`.
    pub memory_gain: Option<f64>,
    pub max_sweeps: usize,
    /// `None` selects `1e-6·‖f‖`.
    pub tol: Option<f64>,
    pub output_dir: PathBuf,
    pub modes: Vec<i64>,
    pub quadrature: usize,
    pub obs_x: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            example: Example::Neumann,
            terms: vec![Term { k: 1, coeff: 1.0, parity: Parity::Cos }, Term { k: 1, coeff: 0.5, parity: Parity::Sin }],
            a: 2.0 * std::f64::consts::PI,
            b: 0.5,
            nx: 65,
            ny: 5,
            gain_method: GainMethod::Ackermann,
            pole_layout: PoleLayout::Ring,
            pole_min: 0.3,
            pole_max: 0.8,
            integrator: Integrator::SymplecticEuler,
            acceleration: Acceleration::Anderson { depth: 120 },
            memory_gain: None,
            max_sweeps: 300,
            tol: None,
            output_dir: PathBuf::from("out"),
            modes: (-4..=8).collect(),
            quadrature: 2001,
            obs_x: vec![0.0, 0.1, 0.5],
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("invalid value for `{key}`: `{value}`"))
}

/// Parses a float; a trailing `pi` multiplies by π (`2pi`, `pi`).
fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let v = value.trim();
    let parsed = match v.strip_suffix("pi") {
        Some("") => Some(std::f64::consts::PI),
        Some(m) => m.trim_end_matches('*').parse::<f64>().ok().map(|m| m * std::f64::consts::PI),
        None => v.parse::<f64>().ok(),
    };
    parsed.filter(|x| x.is_finite()).ok_or_else(|| bad(key, value))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.trim().parse().map_err(|_| bad(key, value))
}

fn parse_list<T>(key: &str, value: &str, item: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| item(s).ok_or_else(|| bad(key, value))).collect()
}

/// `coeff:cos|sin:k` entries separated by commas.
fn parse_terms(value: &str) -> Result<Vec<Term>> {
    parse_list("terms", value, |s| {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return None;
        }
        let coeff = parts[0].parse().ok()?;
        let parity = match parts[1] {
            "cos" => Parity::Cos,
            "sin" => Parity::Sin,
            _ => return None,
        };
        Some(Term { k: parts[2].parse().ok()?, coeff, parity })
    })
}

/// Either `lo..hi` (inclusive) or a comma list.
fn parse_modes(value: &str) -> Result<Vec<i64>> {
    if let Some((lo, hi)) = value.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| bad("modes", value))?;
        let hi: i64 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad("modes", value))?;
        return Ok((lo..=hi).collect());
    }
    parse_list("modes", value, |s| s.parse().ok())
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "example" => {
                self.example = match v {
                    "neumann" => Example::Neumann,
                    "dirichlet" => Example::Dirichlet,
                    "combo" => Example::Combo,
                    _ => return Err(bad(key, value)),
                }
            }
            "terms" => self.terms = parse_terms(v)?,
            "a" => self.a = parse_f64(key, v)?,
            "b" => self.b = parse_f64(key, v)?,
            "nx" => self.nx = parse_usize(key, v)?,
            "ny" => self.ny = parse_usize(key, v)?,
            "gain_method" => {
                self.gain_method = match v {
                    "ackermann" => GainMethod::Ackermann,
                    "tuned" => GainMethod::Tuned,
                    _ => return Err(bad(key, value)),
                }
            }
            "pole_layout" => {
                self.pole_layout = match v {
                    "uniform" => PoleLayout::Uniform,
                    "ring" => PoleLayout::Ring,
                    _ => return Err(bad(key, value)),
                }
            }
            "pole_min" => self.pole_min = parse_f64(key, v)?,
            "pole_max" => self.pole_max = parse_f64(key, v)?,
            "integrator" => {
                self.integrator = match v {
                    "symplectic" => Integrator::SymplecticEuler,
                    "forward" => Integrator::ForwardEuler,
                    _ => return Err(bad(key, value)),
                }
            }
            "acceleration" => {
                self.acceleration = match (v, self.acceleration) {
                    ("none", _) => Acceleration::None,
                    ("anderson", Acceleration::Anderson { depth }) => Acceleration::Anderson { depth },
                    ("anderson", Acceleration::None) => Acceleration::Anderson { depth: 120 },
                    _ => return Err(bad(key, value)),
                }
            }
            "anderson_depth" => {
                let depth = parse_usize(key, v)?;
                if let Acceleration::Anderson { .. } = self.acceleration {
                    self.acceleration = Acceleration::Anderson { depth };
                }
            }
            "memory_gain" => self.memory_gain = if v == "auto" { None } else { Some(parse_f64(key, v)?) },
            "max_sweeps" => self.max_sweeps = parse_usize(key, v)?,
            "tol" => self.tol = if v == "auto" { None } else { Some(parse_f64(key, v)?) },
            "output_dir" => self.output_dir = PathBuf::from(v),
            "modes" => self.modes = parse_modes(v)?,
            "quadrature" => self.quadrature = parse_usize(key, v)?,
            "obs_x" => self.obs_x = parse_list(key, v, |s| s.parse().ok())?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, args: &[String]) -> Result<()> {
        let mut it = args.iter();
        while let Some(flag) = it.next() {
            let key =
                flag.strip_prefix("--").ok_or_else(|| Error::Config(format!("expected `--key`, got `{flag}`")))?;
            let (key, value) = match key.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it.next().ok_or_else(|| Error::Config(format!("missing value for `--{key}`")))?;
                    (key.to_string(), v.clone())
                }
            };
            self.set(&key.replace('-', "_"), &value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        build_grid(self.a, self.b, self.nx, self.ny)?;
        if !(self.pole_min >= 0.0 && self.pole_min < self.pole_max && self.pole_max < 1.0) {
            return Err(Error::Config(format!(
                "need 0 <= pole_min < pole_max < 1, got {} and {}",
                self.pole_min, self.pole_max
            )));
        }
        if let Some(k) = self.memory_gain {
            if !k.is_finite() {
                return Err(Error::Config("memory_gain must be finite".into()));
            }
        }
        if self.max_sweeps < 1 {
            return Err(Error::Config("max_sweeps must be at least 1".into()));
        }
        if matches!(self.tol, Some(t) if t < 0.0) {
            return Err(Error::Config("tol must be nonnegative".into()));
        }
        if matches!(self.acceleration, Acceleration::Anderson { depth: 0 }) {
            return Err(Error::Config("anderson_depth must be at least 1".into()));
        }
        ModeSet::new(self.modes.clone(), self.quadrature)?;
        if self.obs_x.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Config("obs_x entries must be nonnegative".into()));
        }
        self.solution()?;
        Ok(())
    }

    pub fn solution(&self) -> Result<ReferenceSolution> {
        Ok(match self.example {
            Example::Neumann => ReferenceSolution::example1(self.a, self.b),
            Example::Dirichlet => ReferenceSolution::example2(self.a, self.b),
            Example::Combo => ReferenceSolution::new(Kind::FourierCombo, self.terms.clone(), self.a, self.b)?,
        })
    }

    pub fn grid(&self) -> Result<RectGrid> {
        build_grid(self.a, self.b, self.nx, self.ny)
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<()> {
    std::fs::write(dir.join(name), body).map_err(|e| Error::Config(format!("cannot write {name}: {e}")))
}

fn method_name(m: GainMethod) -> &'static str {
    match m {
        GainMethod::Ackermann => "ackermann",
        GainMethod::Tuned => "tuned",
    }
}

const PLOT_SCRIPT: &str = "set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 900,600
set output 'boundary.png'
set xlabel 'x'
plot 'boundary.csv' using 1:2 with lines, '' using 1:3 with points pt 7 ps 0.6
set output 'history.png'
set logscale y
set xlabel 'sweep'
plot 'history.csv' using 1:2 with lines, '' using 1:3 with lines
";

pub struct SolveOutcome {
    pub converged: bool,
    pub sweeps: usize,
    pub final_error: f64,
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveOutcome> {
    let grid = cfg.grid()?;
    let sol = cfg.solution()?;
    let mats = assemble(&grid, cfg.integrator);
    let dim = design_model(&mats).dim();
    let poles = PoleSpec::layout(cfg.pole_layout, dim, cfg.pole_min, cfg.pole_max)?;
    let memory_gain = cfg.memory_gain.unwrap_or(1.0 / grid.dx);
    let design = observer::design_gain(&mats, cfg.gain_method, &poles, memory_gain)?;

    if !(design.spectral_radius < 1.0) {
        eprintln!("warning: gain leaves spectral radius {:.6} >= 1", design.spectral_radius);
    }
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", cfg.output_dir.display())))?;
    let dir = cfg.output_dir.as_path();
    let gain_row = vec![
        method_name(design.method).to_string(),
        fmt_num(design.pole_min),
        fmt_num(design.pole_max),
        fmt_num(design.spectral_radius),
        fmt_num(design.obs_condition),
    ];
    let header = ["method", "pole_min", "pole_max", "spectral_radius", "obs_matrix_condition"];
    write_file(dir, "gain.csv", &csv(&header, [gain_row]))?;

    let data = make_cauchy_data(&sol, &grid);
    let truth = bottom_trace(&sol, &grid);
    let problem = ObserverProblem::new(grid.clone(), data, mats, design.gain.clone())?;
    let oc = ObserverConfig {
        max_sweeps: cfg.max_sweeps,
        tol: cfg.tol,
        initial_guess: None,
        acceleration: cfg.acceleration,
    };
    let (field, report) = observer::run(&problem, &oc, Some(&truth))?;
    let estimate = observer::estimated_bottom(&field);

    let boundary = (0..grid.nx).map(|i| vec![fmt_num(grid.x_nodes()[i]), fmt_num(truth[i]), fmt_num(estimate[i])]);
    write_file(dir, "boundary.csv", &csv(&["x", "exact_bottom", "estimated_bottom"], boundary))?;
    let history = report
        .top_residual
        .iter()
        .zip(&report.bottom_error)
        .enumerate()
        .map(|(m, (r, e))| vec![(m + 1).to_string(), fmt_num(*r), fmt_num(*e)]);
    write_file(dir, "history.csv", &csv(&["sweep", "top_residual", "bottom_error"], history))?;
    write_file(dir, "plot.gp", PLOT_SCRIPT)?;

    Ok(SolveOutcome {
        converged: report.converged_at.is_some(),
        sweeps: report.sweeps(),
        final_error: report.bottom_error.last().copied().unwrap_or(f64::NAN),
    })
}

pub struct DiagnoseOutcome {
    pub max_gram_err: f64,
    pub min_bound: f64,
}

impl DiagnoseOutcome {
    pub fn passed(&self) -> bool {
        self.max_gram_err <= GRAM_TOL && self.min_bound > 0.0
    }
}

pub fn cmd_diagnose(cfg: &RunConfig) -> Result<DiagnoseOutcome> {
    let modes = ModeSet::new(cfg.modes.clone(), cfg.quadrature)?;
    let gram = spectral::gram_matrix(&modes);
    let mut rows = Vec::new();
    let mut max_gram_err: f64 = 0.0;
    for (i, mode) in modes.modes().enumerate() {
        let err =
            gram[i].iter().enumerate().map(|(j, g)| (g - if i == j { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);
        max_gram_err = max_gram_err.max(err);
        let residual = spectral::eigen_residual(&mode, cfg.quadrature)?;
        rows.push(vec![mode.n.to_string(), fmt_num(mode.lambda), fmt_num(mode.rho), fmt_num(err), fmt_num(residual)]);
    }
    let mut bounds = Vec::new();
    let mut min_bound = f64::INFINITY;
    for &x in &cfg.obs_x {
        let lb = spectral::observability_lower_bound(&modes, x)?;
        min_bound = min_bound.min(lb);
        bounds.push(vec![fmt_num(x), fmt_num(lb)]);
    }

    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", cfg.output_dir.display())))?;
    let dir = cfg.output_dir.as_path();
    write_file(dir, "spectral.csv", &csv(&["n", "lambda", "rho", "gram_err", "eigen_residual"], rows))?;
    write_file(dir, "observability.csv", &csv(&["x", "lower_bound"], bounds))?;
    Ok(DiagnoseOutcome { max_gram_err, min_bound })
}

fn load(inv: &Invocation) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &inv.config {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    cfg.apply_overrides(&inv.overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the CLI on explicit arguments (first element is the program name).
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (inv, solve) = match &cli.command {
        Command::Solve(inv) => (inv, true),
        Command::Diagnose(inv) => (inv, false),
    };
    let cfg = match load(inv) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if solve {
        match cmd_solve(&cfg) {
            Ok(o) => {
                let mut msg = String::new();
                let _ = write!(msg, "sweeps {} bottom_error {}", o.sweeps, fmt_num(o.final_error));
                if o.converged {
                    println!("converged: {msg}");
                    EXIT_OK
                } else {
                    println!("not converged: {msg}");
                    EXIT_NOT_CONVERGED
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_RUNTIME
            }
        }
    } else {
        match cmd_diagnose(&cfg) {
            Ok(o) => {
                println!("max gram_err {} min lower_bound {}", fmt_num(o.max_gram_err), fmt_num(o.min_bound));
                if o.passed() {
                    EXIT_OK
                } else {
                    println!("diagnose checks failed");
                    EXIT_NOT_CONVERGED
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_RUNTIME
            }
        }
    }
}

pub fn main_entry() -> i32 {
    run_with_args(std::env::args_os())
}
