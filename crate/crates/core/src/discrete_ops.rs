//! Line-by-line marching operator in x for the first-order system
//! `u_x = v`, `v_x = -u_yy`, with the top Neumann closure and the bottom
//! fictitious point.

use crate::error::{Error, Result};
use crate::grid::RectGrid;
use nalgebra::{DMatrix, DVector, RowDVector};

/// Stacked `(u, u_x)` samples along one vertical grid line, bottom to top.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    data: DVector<f64>,
    ny: usize,
}

impl StateVector {
    pub fn zeros(ny: usize) -> Self {
        Self { data: DVector::zeros(2 * ny), ny }
    }

    pub fn from_parts(xi1: &[f64], xi2: &[f64]) -> Result<Self> {
        if xi1.len() != xi2.len() {
            return Err(Error::DimensionMismatch { expected: xi1.len(), got: xi2.len() });
        }
        let ny = xi1.len();
        let data = DVector::from_iterator(2 * ny, xi1.iter().chain(xi2).copied());
        Ok(Self { data, ny })
    }

    pub fn from_vector(data: DVector<f64>) -> Result<Self> {
        if !data.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch { expected: data.len() + 1, got: data.len() });
        }
        let ny = data.len() / 2;
        Ok(Self { data, ny })
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn xi1(&self) -> &[f64] {
        &self.data.as_slice()[..self.ny]
    }

    pub fn xi2(&self) -> &[f64] {
        &self.data.as_slice()[self.ny..]
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.data
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// `ξ^{n+1} = (I + dx A) ξ^n`.
    ForwardEuler,
    /// Position first, then velocity from the updated position.
    SymplecticEuler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a_d: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub c_row: RowDVector<f64>,
    pub d_yy: DMatrix<f64>,
    pub integrator: Integrator,
    pub dx: f64,
    pub dy: f64,
    pub ny: usize,
}

impl SystemMatrices {
    pub fn dim(&self) -> usize {
        2 * self.ny
    }

    pub fn top(&self) -> usize {
        self.ny - 1
    }
}

/// Second-difference matrix in y. The bottom row keeps only the in-grid part
/// of its stencil; the top row folds in the mirror node.
pub fn second_difference(ny: usize, dy: f64) -> DMatrix<f64> {
    let s = 1.0 / (dy * dy);
    let mut d = DMatrix::zeros(ny, ny);
    d[(0, 0)] = -2.0 * s;
    d[(0, 1)] = s;
    for i in 1..ny - 1 {
        d[(i, i - 1)] = s;
        d[(i, i)] = -2.0 * s;
        d[(i, i + 1)] = s;
    }
    d[(ny - 1, ny - 2)] = 2.0 * s;
    d[(ny - 1, ny - 1)] = -2.0 * s;
    d
}

pub fn assemble(grid: &RectGrid, integrator: Integrator) -> SystemMatrices {
    let ny = grid.ny;
    let (dx, dy) = (grid.dx, grid.dy);
    let d_yy = second_difference(ny, dy);
    let eye = DMatrix::<f64>::identity(ny, ny);

    let mut a_d = DMatrix::zeros(2 * ny, 2 * ny);
    a_d.view_mut((0, ny), (ny, ny)).copy_from(&eye);
    a_d.view_mut((ny, 0), (ny, ny)).copy_from(&(-&d_yy));

    let mut f = DMatrix::identity(2 * ny, 2 * ny) + &a_d * dx;
    if integrator == Integrator::SymplecticEuler {
        let coupling = &d_yy * (-dx * dx);
        let mut block = f.view_mut((ny, ny), (ny, ny));
        block += coupling;
    }

    let mut c_row = RowDVector::zeros(2 * ny);
    c_row[ny - 1] = 1.0;

    SystemMatrices { a_d, f, c_row, d_yy, integrator, dx, dy, ny }
}

pub fn fictitious_point(xi1_1: f64, xi1_2: f64, xi2_1_next: f64, xi2_1_cur: f64, dy: f64, dx: f64) -> f64 {
    2.0 * xi1_1 - xi1_2 - (dy * dy / dx) * (xi2_1_next - xi2_1_cur)
}

/// The two bottom `u` values the fictitious point is built from: the current
/// line for forward Euler, the position update for symplectic Euler.
pub fn closure_inputs(state: &StateVector, mats: &SystemMatrices) -> (f64, f64) {
    let (u, v) = (state.xi1(), state.xi2());
    match mats.integrator {
        Integrator::ForwardEuler => (u[0], u[1]),
        Integrator::SymplecticEuler => (u[0] + mats.dx * v[0], u[1] + mats.dx * v[1]),
    }
}

pub fn step_line(
    state: &StateVector,
    mats: &SystemMatrices,
    k: &DVector<f64>,
    f_meas: f64,
    g_meas: f64,
    ghost: f64,
) -> Result<StateVector> {
    let n = mats.dim();
    if state.as_vector().len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: state.as_vector().len() });
    }
    if k.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: k.len() });
    }
    let x = state.as_vector();
    let innovation = x[mats.top()] - f_meas;
    let mut next = &mats.f * x - k * innovation;
    let ny = mats.ny;
    next[ny] -= mats.dx * ghost / (mats.dy * mats.dy);
    next[2 * ny - 1] -= mats.dx * 2.0 * g_meas / mats.dy;
    Ok(StateVector { data: next, ny })
}

/// Observable one-step model used for gain design when the bottom `u_x`
/// entry of every line is overwritten through the fictitious point.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignModel {
    pub f: DMatrix<f64>,
    pub c_row: RowDVector<f64>,
    keep: Vec<usize>,
    ny: usize,
    dx: f64,
    reduced: bool,
}

impl DesignModel {
    pub fn dim(&self) -> usize {
        self.f.nrows()
    }

    /// Embeds a gain for the design model into the full state, with
    /// `memory_gain` on the bottom `u_x` entry.
    pub fn lift(&self, k: &DVector<f64>, memory_gain: f64) -> Result<DVector<f64>> {
        if k.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: k.len() });
        }
        let mut full = DVector::zeros(2 * self.ny);
        for (j, &i) in self.keep.iter().enumerate() {
            full[i] = k[j];
        }
        if self.reduced {
            full[self.ny] = memory_gain;
            full[0] -= self.dx * memory_gain;
        }
        Ok(full)
    }
}

/// Forward Euler keeps all `2ny` coordinates. Symplectic Euler drops the
/// bottom `u_x` entry, which only reaches the rest of the line through
/// `u_0 + dx·(u_x)_0` and is otherwise unobservable.
pub fn design_model(mats: &SystemMatrices) -> DesignModel {
    let n = mats.dim();
    let ny = mats.ny;
    let mut f = mats.f.clone();
    f.row_mut(ny).fill(0.0);
    let reduced = mats.integrator == Integrator::SymplecticEuler;
    let keep: Vec<usize> = (0..n).filter(|&i| !(reduced && i == ny)).collect();
    let m = keep.len();
    let fr = DMatrix::from_fn(m, m, |r, c| f[(keep[r], keep[c])]);
    let cr = RowDVector::from_fn(m, |_, c| mats.c_row[keep[c]]);
    DesignModel { f: fr, c_row: cr, keep, ny, dx: mats.dx, reduced }
}
