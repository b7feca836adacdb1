//! Closed-form harmonic fields with homogeneous Neumann data on the top edge.

use crate::error::{Error, Result};
use crate::grid::RectGrid;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// cos terms only: u_x = 0 on the side edges.
    NeumannSides,
    /// sin terms only: u = 0 on the side edges.
    DirichletSides,
    FourierCombo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub k: u32,
    pub coeff: f64,
    pub parity: Parity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub kind: Kind,
    pub terms: Vec<Term>,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl CauchyData {
    pub fn new(f: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if f.len() != g.len() {
            return Err(Error::DimensionMismatch { expected: f.len(), got: g.len() });
        }
        if f.iter().chain(&g).any(|v| !v.is_finite()) {
            return Err(Error::Config("Cauchy data must be finite".into()));
        }
        Ok(Self { f, g })
    }

    pub fn zeros(n: usize) -> Self {
        Self { f: vec![0.0; n], g: vec![0.0; n] }
    }
}

impl ReferenceSolution {
    pub fn new(kind: Kind, terms: Vec<Term>, a: f64, b: f64) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Config("reference solution needs at least one term".into()));
        }
        if terms.iter().any(|t| t.k == 0 || !t.coeff.is_finite()) {
            return Err(Error::Config("terms need k >= 1 and finite coefficients".into()));
        }
        Ok(Self { kind, terms, a, b })
    }

    /// cos(4πx/a) profile, u_y = 0 on top.
    pub fn example1(a: f64, b: f64) -> Self {
        let t = Term { k: 1, coeff: 1.0, parity: Parity::Cos };
        Self { kind: Kind::NeumannSides, terms: vec![t], a, b }
    }

    /// sin(4πx/a) profile, u_y = 0 on top.
    pub fn example2(a: f64, b: f64) -> Self {
        let t = Term { k: 1, coeff: 1.0, parity: Parity::Sin };
        Self { kind: Kind::DirichletSides, terms: vec![t], a, b }
    }

    /// 1.0·cos + 0.5·sin, both with k = 1.
    pub fn example3(a: f64, b: f64) -> Self {
        let terms =
            vec![Term { k: 1, coeff: 1.0, parity: Parity::Cos }, Term { k: 1, coeff: 0.5, parity: Parity::Sin }];
        Self { kind: Kind::FourierCombo, terms, a, b }
    }

    fn wavenumber(&self, k: u32) -> f64 {
        4.0 * PI * k as f64 / self.a
    }

    fn vertical(&self, w: f64, y: f64) -> f64 {
        (w * (y - self.b)).cosh() / (w * self.b).cosh()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let w = self.wavenumber(t.k);
                t.coeff * self.vertical(w, y) * trig(t.parity, w * x)
            })
            .sum()
    }

    pub fn eval_dx(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let w = self.wavenumber(t.k);
                let d = match t.parity {
                    Parity::Cos => -(w * x).sin(),
                    Parity::Sin => (w * x).cos(),
                };
                t.coeff * self.vertical(w, y) * w * d
            })
            .sum()
    }

    pub fn eval_dy(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let w = self.wavenumber(t.k);
                let v = w * (w * (y - self.b)).sinh() / (w * self.b).cosh();
                t.coeff * v * trig(t.parity, w * x)
            })
            .sum()
    }
}

fn trig(p: Parity, arg: f64) -> f64 {
    match p {
        Parity::Cos => arg.cos(),
        Parity::Sin => arg.sin(),
    }
}

pub fn make_cauchy_data(sol: &ReferenceSolution, grid: &RectGrid) -> CauchyData {
    let f = grid.x_nodes().iter().map(|&x| sol.eval(x, grid.b)).collect();
    let g = grid.x_nodes().iter().map(|&x| sol.eval_dy(x, grid.b)).collect();
    CauchyData { f, g }
}

pub fn bottom_trace(sol: &ReferenceSolution, grid: &RectGrid) -> Vec<f64> {
    grid.x_nodes().iter().map(|&x| sol.eval(x, 0.0)).collect()
}
