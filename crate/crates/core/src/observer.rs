//! Iterated marching observer. Each sweep marches the line states from the
//! left edge to the right edge, correcting with the top-edge innovation; the
//! next sweep starts from the last line of the previous one and reads the
//! bottom `u_x` values of the previous sweep through the fictitious point.

use crate::anderson::Anderson;
use crate::discrete_ops::{closure_inputs, design_model, fictitious_point, step_line, StateVector, SystemMatrices};
use crate::error::{Error, Result};
use crate::gain::{ackermann_gain, spectral_radius, tuned_injection_gain, PoleSpec};
use crate::grid::RectGrid;
use crate::reference::CauchyData;
use nalgebra::{DMatrix, DVector};

pub const DIVERGENCE_GUARD: f64 = 1e12;

pub type Field = Vec<StateVector>;

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverProblem {
    pub grid: RectGrid,
    pub cauchy: CauchyData,
    pub mats: SystemMatrices,
    pub gain: DVector<f64>,
}

impl ObserverProblem {
    pub fn new(grid: RectGrid, cauchy: CauchyData, mats: SystemMatrices, gain: DVector<f64>) -> Result<Self> {
        if cauchy.f.len() != grid.nx || cauchy.g.len() != grid.nx {
            return Err(Error::DimensionMismatch { expected: grid.nx, got: cauchy.f.len().min(cauchy.g.len()) });
        }
        if mats.ny != grid.ny {
            return Err(Error::DimensionMismatch { expected: grid.ny, got: mats.ny });
        }
        if gain.len() != mats.dim() {
            return Err(Error::DimensionMismatch { expected: mats.dim(), got: gain.len() });
        }
        Ok(Self { grid, cauchy, mats, gain })
    }

    /// `F - K C`.
    pub fn closed_loop(&self) -> DMatrix<f64> {
        &self.mats.f - &self.gain * &self.mats.c_row
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainMethod {
    Ackermann,
    Tuned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainDesign {
    pub method: GainMethod,
    pub gain: DVector<f64>,
    pub pole_min: f64,
    pub pole_max: f64,
    /// Spectral radius of the one-step error map of the design model.
    pub spectral_radius: f64,
    pub obs_condition: f64,
}

/// Designs the injection gain on the observable one-step model and places
/// `memory_gain` on the bottom `u_x` entry when that entry is dropped.
pub fn design_gain(
    mats: &SystemMatrices,
    method: GainMethod,
    poles: &PoleSpec,
    memory_gain: f64,
) -> Result<GainDesign> {
    let model = design_model(mats);
    let o = crate::gain::observability_matrix(&model.f, &model.c_row);
    match method {
        GainMethod::Ackermann => {
            let p = ackermann_gain(&model.f, &model.c_row, poles)?;
            Ok(GainDesign {
                method,
                gain: model.lift(&p.gain, memory_gain)?,
                pole_min: poles.min_modulus(),
                pole_max: poles.max_modulus(),
                spectral_radius: p.spectral_radius,
                obs_condition: p.obs_condition,
            })
        }
        GainMethod::Tuned => {
            let grid: Vec<f64> = (1..=400).map(|j| j as f64 * 0.01).collect();
            let t = tuned_injection_gain(&model.f, &model.c_row, &grid)?;
            Ok(GainDesign {
                method,
                gain: model.lift(&t.gain, memory_gain)?,
                pole_min: f64::NAN,
                pole_max: f64::NAN,
                spectral_radius: t.spectral_radius,
                obs_condition: crate::gain::condition_number(&o),
            })
        }
    }
}

/// One-step error map the sweeps actually run with: the fictitious point
/// rebuilds the bottom `u_x` entry, so that row of `F` drops out.
pub fn marching_matrix(mats: &SystemMatrices, gain: &DVector<f64>) -> DMatrix<f64> {
    let mut f = mats.f.clone();
    f.row_mut(mats.ny).fill(0.0);
    f - gain * &mats.c_row
}

pub fn marching_radius(mats: &SystemMatrices, gain: &DVector<f64>) -> Result<f64> {
    spectral_radius(&marching_matrix(mats, gain))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceleration {
    None,
    Anderson { depth: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverConfig {
    pub max_sweeps: usize,
    /// Absolute threshold on the top residual; `None` means `1e-6·‖f‖`.
    pub tol: Option<f64>,
    pub initial_guess: Option<Field>,
    pub acceleration: Acceleration,
}

impl Default for ObserverConfig {
    fn default() -> Self {
        Self { max_sweeps: 500, tol: None, initial_guess: None, acceleration: Acceleration::Anderson { depth: 120 } }
    }
}

impl ObserverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps < 1 {
            return Err(Error::Config("max_sweeps must be at least 1".into()));
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0) {
                return Err(Error::Config(format!("tol must be nonnegative, got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    pub top_residual: Vec<f64>,
    pub bottom_error: Vec<f64>,
    pub converged_at: Option<usize>,
    pub tol: f64,
    /// Set when the reference trace has zero norm and the bottom error is absolute.
    pub absolute_error: bool,
}

impl SweepReport {
    pub fn sweeps(&self) -> usize {
        self.top_residual.len()
    }
}

fn l2(grid: &RectGrid, v: impl Iterator<Item = f64>) -> f64 {
    grid.x_weights().iter().zip(v).map(|(w, e)| w * e * e).sum::<f64>().sqrt()
}

pub fn top_residual(grid: &RectGrid, field: &[StateVector], f: &[f64]) -> Result<f64> {
    if field.len() != grid.nx || f.len() != grid.nx {
        return Err(Error::DimensionMismatch { expected: grid.nx, got: field.len().min(f.len()) });
    }
    let top = grid.ny - 1;
    Ok(l2(grid, field.iter().zip(f).map(|(s, v)| s.xi1()[top] - v)))
}

/// Relative discrete L² error of the bottom trace; absolute (and flagged) when
/// the reference vanishes.
pub fn error_bottom(grid: &RectGrid, field: &[StateVector], reference: &[f64]) -> Result<(f64, bool)> {
    let estimate: Vec<f64> = field.iter().map(|s| s.xi1()[0]).collect();
    trace_error(grid, &estimate, reference)
}

pub fn trace_error(grid: &RectGrid, estimate: &[f64], reference: &[f64]) -> Result<(f64, bool)> {
    if estimate.len() != grid.nx || reference.len() != grid.nx {
        return Err(Error::DimensionMismatch { expected: grid.nx, got: estimate.len().min(reference.len()) });
    }
    let err = l2(grid, estimate.iter().zip(reference).map(|(a, b)| a - b));
    let norm = l2(grid, reference.iter().copied());
    if norm == 0.0 {
        Ok((err, true))
    } else {
        Ok((err / norm, false))
    }
}

pub fn estimated_bottom(field: &[StateVector]) -> Vec<f64> {
    field.iter().map(|s| s.xi1()[0]).collect()
}

/// Everything one sweep reads from its predecessor: the last line state and the
/// bottom `u_x` value at every x-node.
fn sweep_input(field: &[StateVector]) -> DVector<f64> {
    let last = field.last().expect("nonempty field").as_vector();
    let n = last.len();
    let mut z = DVector::zeros(n + field.len());
    z.rows_mut(0, n).copy_from(last);
    for (j, s) in field.iter().enumerate() {
        z[n + j] = s.xi2()[0];
    }
    z
}

pub fn sweep(problem: &ObserverProblem, start: &StateVector, memory: &[f64], index: usize) -> Result<Field> {
    let grid = &problem.grid;
    let mats = &problem.mats;
    let mut field = Vec::with_capacity(grid.nx);
    field.push(start.clone());
    for n in 0..grid.nx - 1 {
        let s = &field[n];
        let (u0, u1) = closure_inputs(s, mats);
        let ghost = fictitious_point(u0, u1, memory[n + 1], s.xi2()[0], mats.dy, mats.dx);
        let next = step_line(s, mats, &problem.gain, problem.cauchy.f[n], problem.cauchy.g[n], ghost)?;
        let norm = next.norm();
        if !(norm <= DIVERGENCE_GUARD) {
            return Err(Error::NonFiniteState { sweep: index, node: n + 1, norm });
        }
        field.push(next);
    }
    Ok(field)
}

fn sweep_from_input(problem: &ObserverProblem, z: &DVector<f64>, index: usize) -> Result<Field> {
    let n = problem.mats.dim();
    let start = StateVector::from_vector(z.rows(0, n).into_owned())?;
    sweep(problem, &start, &z.as_slice()[n..], index)
}

pub fn run(
    problem: &ObserverProblem,
    config: &ObserverConfig,
    reference: Option<&[f64]>,
) -> Result<(Field, SweepReport)> {
    config.validate()?;
    let grid = &problem.grid;
    let ny = grid.ny;
    let initial = match &config.initial_guess {
        Some(g) => {
            if g.len() != grid.nx || g.iter().any(|s| s.ny() != ny) {
                return Err(Error::DimensionMismatch { expected: grid.nx, got: g.len() });
            }
            g.clone()
        }
        None => vec![StateVector::zeros(ny); grid.nx],
    };
    let tol = config.tol.unwrap_or_else(|| 1e-6 * l2(grid, problem.cauchy.f.iter().copied()));
    let mut report = SweepReport { tol, ..Default::default() };
    let mut accel = match config.acceleration {
        Acceleration::None => None,
        Acceleration::Anderson { depth } => Some(Anderson::new(depth)),
    };

    let mut z = sweep_input(&initial);
    let mut field = initial;
    for m in 1..=config.max_sweeps {
        field = sweep_from_input(problem, &z, m)?;
        let r = top_residual(grid, &field, &problem.cauchy.f)?;
        report.top_residual.push(r);
        if let Some(reference) = reference {
            let (e, abs) = error_bottom(grid, &field, reference)?;
            report.bottom_error.push(e);
            report.absolute_error = abs;
        }
        if r < tol {
            report.converged_at = Some(m);
            break;
        }
        let image = sweep_input(&field);
        z = match accel.as_mut() {
            Some(a) => a.next(&z, &image),
            None => image,
        };
    }
    Ok((field, report))
}
