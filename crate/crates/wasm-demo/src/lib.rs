//! wasm-bindgen entry points for the static demo page in `www/`.

use cauchy_observer::discrete_ops::{assemble, design_model, Integrator};
use cauchy_observer::gain::{eigenvalues, PoleLayout, PoleSpec};
use cauchy_observer::grid::build_grid;
use cauchy_observer::observer::{self, GainMethod, ObserverConfig, ObserverProblem};
use cauchy_observer::reference::{bottom_trace, make_cauchy_data, ReferenceSolution};
use cauchy_observer::spectral::{self, ModeSet};
use cauchy_observer::{Error, Result};
use std::f64::consts::PI;
use wasm_bindgen::prelude::*;

const A: f64 = 2.0 * PI;
const B: f64 = 0.5;

fn js_err(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn layout(name: &str) -> Result<PoleLayout> {
    match name {
        "ring" => Ok(PoleLayout::Ring),
        "uniform" => Ok(PoleLayout::Uniform),
        _ => Err(Error::Config(format!("unknown pole layout `{name}`"))),
    }
}

#[wasm_bindgen]
pub struct Recovery {
    x: Vec<f64>,
    exact: Vec<f64>,
    estimate: Vec<f64>,
    residuals: Vec<f64>,
    errors: Vec<f64>,
    converged: bool,
}

#[wasm_bindgen]
impl Recovery {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> Vec<f64> {
        self.exact.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn estimate(&self) -> Vec<f64> {
        self.estimate.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn residuals(&self) -> Vec<f64> {
        self.residuals.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn errors(&self) -> Vec<f64> {
        self.errors.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn converged(&self) -> bool {
        self.converged
    }
}

/// Recovers the bottom trace of one of the built-in examples.
#[wasm_bindgen]
pub fn recover_bottom(
    example: &str,
    nx: usize,
    ny: usize,
    pole_layout: &str,
    pole_max: f64,
    max_sweeps: usize,
) -> std::result::Result<Recovery, JsError> {
    recover(example, nx, ny, pole_layout, pole_max, max_sweeps).map_err(js_err)
}

pub fn recover(
    example: &str,
    nx: usize,
    ny: usize,
    pole_layout: &str,
    pole_max: f64,
    max_sweeps: usize,
) -> Result<Recovery> {
    let sol = match example {
        "neumann" => ReferenceSolution::example1(A, B),
        "dirichlet" => ReferenceSolution::example2(A, B),
        "combo" => ReferenceSolution::example3(A, B),
        _ => return Err(Error::Config(format!("unknown example `{example}`"))),
    };
    let grid = build_grid(A, B, nx, ny)?;
    let mats = assemble(&grid, Integrator::SymplecticEuler);
    let poles = PoleSpec::layout(layout(pole_layout)?, design_model(&mats).dim(), 0.3, pole_max)?;
    let design = observer::design_gain(&mats, GainMethod::Ackermann, &poles, 1.0 / grid.dx)?;
    let truth = bottom_trace(&sol, &grid);
    let problem = ObserverProblem::new(grid.clone(), make_cauchy_data(&sol, &grid), mats, design.gain)?;
    let cfg = ObserverConfig { max_sweeps, ..Default::default() };
    let (field, report) = observer::run(&problem, &cfg, Some(&truth))?;
    Ok(Recovery {
        x: grid.x_nodes().to_vec(),
        exact: truth,
        estimate: observer::estimated_bottom(&field),
        residuals: report.top_residual,
        errors: report.bottom_error,
        converged: report.converged_at.is_some(),
    })
}

/// Rows of `[n, lambda, rho, gram_err, eigen_residual]`, flattened.
#[wasm_bindgen]
pub fn spectral_table(n_min: i32, n_max: i32, quadrature: usize) -> std::result::Result<Vec<f64>, JsError> {
    spectral_rows(n_min, n_max, quadrature).map_err(js_err)
}

pub fn spectral_rows(n_min: i32, n_max: i32, quadrature: usize) -> Result<Vec<f64>> {
    let modes = ModeSet::new((n_min as i64..=n_max as i64).collect(), quadrature)?;
    let gram = spectral::gram_matrix(&modes);
    let mut out = Vec::new();
    for (i, mode) in modes.modes().enumerate() {
        let err =
            gram[i].iter().enumerate().map(|(j, g)| (g - if i == j { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);
        let residual = spectral::eigen_residual(&mode, quadrature)?;
        out.extend([mode.n as f64, mode.lambda, mode.rho, err, residual]);
    }
    Ok(out)
}

/// Closed-loop eigenvalues of the design model as `[re0, im0, re1, im1, ...]`,
/// followed by the observability condition number.
#[wasm_bindgen]
pub fn gain_spectrum(ny: usize, pole_layout: &str, pole_max: f64) -> std::result::Result<Vec<f64>, JsError> {
    closed_loop_spectrum(ny, pole_layout, pole_max).map_err(js_err)
}

pub fn closed_loop_spectrum(ny: usize, pole_layout: &str, pole_max: f64) -> Result<Vec<f64>> {
    let grid = build_grid(A, B, 65, ny)?;
    let mats = assemble(&grid, Integrator::SymplecticEuler);
    let model = design_model(&mats);
    let poles = PoleSpec::layout(layout(pole_layout)?, model.dim(), 0.3, pole_max)?;
    let design = observer::design_gain(&mats, GainMethod::Ackermann, &poles, 1.0 / grid.dx)?;
    let closed = observer::marching_matrix(&mats, &design.gain);
    let mut out = Vec::new();
    for z in eigenvalues(&closed)? {
        out.extend([z.re, z.im]);
    }
    out.push(design.obs_condition);
    Ok(out)
}
