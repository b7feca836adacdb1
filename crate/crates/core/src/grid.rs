//! Uniform node-centered discretization of the rectangle (0,a)×(0,b).
//!
//! Node `i = 0` sits on the bottom edge and node `i = ny-1` on the top edge.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RectGrid {
    pub a: f64,
    pub b: f64,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl RectGrid {
    pub fn new(a: f64, b: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) || !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidGrid(format!("extents must be positive, got a={a}, b={b}")));
        }
        if nx < 3 {
            return Err(Error::InvalidGrid(format!("insufficient x nodes: nx={nx}, need at least 3")));
        }
        if ny < 3 {
            return Err(Error::InvalidGrid(format!("insufficient y nodes: ny={ny}, need at least 3")));
        }
        let dx = a / (nx - 1) as f64;
        let dy = b / (ny - 1) as f64;
        Ok(Self { a, b, nx, ny, dx, dy, x: nodes(a, nx), y: nodes(b, ny) })
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn y_nodes(&self) -> &[f64] {
        &self.y
    }

    /// Trapezoid weights for the discrete L² norm along x.
    pub fn x_weights(&self) -> Vec<f64> {
        let mut w = vec![self.dx; self.nx];
        w[0] *= 0.5;
        w[self.nx - 1] *= 0.5;
        w
    }
}

pub fn build_grid(a: f64, b: f64, nx: usize, ny: usize) -> Result<RectGrid> {
    RectGrid::new(a, b, nx, ny)
}

fn nodes(len: f64, n: usize) -> Vec<f64> {
    let h = len / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    v[n - 1] = len;
    v
}
