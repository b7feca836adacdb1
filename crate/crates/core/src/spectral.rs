//! Cosine eigenbasis of the marching generator on the analysis interval [0, π/4],
//! with a trapezoid H¹×L² inner product, a truncated semigroup and an
//! observability bound.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

pub const INTERVAL: f64 = FRAC_PI_4;

/// Amplitude of the cosine profiles, `-sqrt(8/π)`.
pub fn amplitude() -> f64 {
    -(8.0 / PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenMode {
    pub n: i64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub c1: f64,
}

impl EigenMode {
    pub fn new(n: i64) -> Self {
        let lambda = (6 - 8 * n) as f64;
        Self { n, lambda, alpha: 1.0, beta: lambda, rho: 1.0 / (SQRT_2 * lambda), c1: amplitude() }
    }

    fn profile(&self, y: f64) -> f64 {
        self.c1 * (self.lambda * y).cos()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub indices: Vec<i64>,
    pub quadrature: usize,
}

impl ModeSet {
    pub fn new(mut indices: Vec<i64>, quadrature: usize) -> Result<Self> {
        if quadrature < 5 {
            return Err(Error::Config(format!("quadrature needs at least 5 nodes, got {quadrature}")));
        }
        indices.sort_unstable();
        let before = indices.len();
        indices.dedup();
        if indices.len() != before {
            return Err(Error::Config("mode indices must be distinct".into()));
        }
        Ok(Self { indices, quadrature })
    }

    pub fn modes(&self) -> impl Iterator<Item = EigenMode> + '_ {
        self.indices.iter().map(|&n| EigenMode::new(n))
    }
}

impl Default for ModeSet {
    fn default() -> Self {
        Self { indices: (-4..=8).collect(), quadrature: 2001 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionPair {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

impl FunctionPair {
    pub fn new(p1: Vec<f64>, p2: Vec<f64>) -> Result<Self> {
        if p1.len() != p2.len() {
            return Err(Error::DimensionMismatch { expected: p1.len(), got: p2.len() });
        }
        if p1.len() < 3 {
            return Err(Error::Config("a sampled pair needs at least 3 nodes".into()));
        }
        Ok(Self { p1, p2 })
    }

    pub fn zeros(nodes: usize) -> Self {
        Self { p1: vec![0.0; nodes], p2: vec![0.0; nodes] }
    }

    pub fn nodes(&self) -> usize {
        self.p1.len()
    }

    pub fn sample(nodes: usize, f1: impl Fn(f64) -> f64, f2: impl Fn(f64) -> f64) -> Self {
        let y = quadrature_nodes(nodes);
        Self { p1: y.iter().map(|&s| f1(s)).collect(), p2: y.iter().map(|&s| f2(s)).collect() }
    }

    pub fn axpy(&mut self, alpha: f64, other: &FunctionPair) {
        for (a, b) in self.p1.iter_mut().zip(&other.p1) {
            *a += alpha * b;
        }
        for (a, b) in self.p2.iter_mut().zip(&other.p2) {
            *a += alpha * b;
        }
    }

    pub fn max_abs_diff(&self, other: &FunctionPair) -> f64 {
        self.p1
            .iter()
            .zip(&other.p1)
            .chain(self.p2.iter().zip(&other.p2))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn quadrature_nodes(nodes: usize) -> Vec<f64> {
    let h = INTERVAL / (nodes - 1) as f64;
    let mut y: Vec<f64> = (0..nodes).map(|j| j as f64 * h).collect();
    y[nodes - 1] = INTERVAL;
    y
}

pub fn eval_mode(mode: &EigenMode, y: f64) -> (f64, f64) {
    let phi = mode.profile(y);
    (mode.rho * mode.alpha * phi, mode.rho * mode.beta * phi)
}

pub fn sample_mode(mode: &EigenMode, nodes: usize) -> FunctionPair {
    FunctionPair::sample(nodes, |y| eval_mode(mode, y).0, |y| eval_mode(mode, y).1)
}

/// Unnormalized eigenvector `(α φ, β φ)`.
fn sample_eigenvector(mode: &EigenMode, nodes: usize) -> FunctionPair {
    FunctionPair::sample(nodes, |y| mode.alpha * mode.profile(y), |y| mode.beta * mode.profile(y))
}

fn derivative(p: &[f64], h: f64) -> Vec<f64> {
    let n = p.len();
    let mut d = vec![0.0; n];
    for j in 1..n - 1 {
        d[j] = (p[j + 1] - p[j - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * h);
    d[n - 1] = (3.0 * p[n - 1] - 4.0 * p[n - 2] + p[n - 3]) / (2.0 * h);
    d
}

fn trapezoid(v: impl Iterator<Item = f64>, n: usize, h: f64) -> f64 {
    let mut s = 0.0;
    for (j, x) in v.enumerate() {
        s += if j == 0 || j == n - 1 { 0.5 * x } else { x };
    }
    s * h
}

/// `∫ q1' p1' + ∫ q1 p1 + ∫ q2 p2` on [0, π/4].
pub fn inner_product(p: &FunctionPair, q: &FunctionPair) -> Result<f64> {
    let n = p.nodes();
    if q.nodes() != n {
        return Err(Error::DimensionMismatch { expected: n, got: q.nodes() });
    }
    let h = INTERVAL / (n - 1) as f64;
    let dp = derivative(&p.p1, h);
    let dq = derivative(&q.p1, h);
    let grad = trapezoid(dp.iter().zip(&dq).map(|(a, b)| a * b), n, h);
    let first = trapezoid(p.p1.iter().zip(&q.p1).map(|(a, b)| a * b), n, h);
    let second = trapezoid(p.p2.iter().zip(&q.p2).map(|(a, b)| a * b), n, h);
    Ok(grad + first + second)
}

/// Gram matrix of the sampled basis over `modes`, row-major.
pub fn gram_matrix(modes: &ModeSet) -> Vec<Vec<f64>> {
    let samples: Vec<FunctionPair> = modes.modes().map(|m| sample_mode(&m, modes.quadrature)).collect();
    samples.iter().map(|p| samples.iter().map(|q| inner_product(p, q).expect("same sampling")).collect()).collect()
}

/// Truncated series `Σ e^{λ_n x} c_n Φ_n`, where `c` solves the Gram system
/// `G c = (⟨f, Φ_m⟩)_m`, so the map is exact on the span of the modes.
pub fn semigroup_apply(f: &FunctionPair, x: f64, modes: &ModeSet) -> Result<FunctionPair> {
    if !(x >= 0.0) {
        return Err(Error::Config(format!("semigroup argument must be nonnegative, got {x}")));
    }
    let nodes = f.nodes();
    let basis: Vec<(EigenMode, FunctionPair)> = modes.modes().map(|m| (m, sample_mode(&m, nodes))).collect();
    let n = basis.len();
    let mut gram = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for (i, (_, p)) in basis.iter().enumerate() {
        rhs[i] = inner_product(f, p)?;
        for (j, (_, q)) in basis.iter().enumerate() {
            gram[(i, j)] = inner_product(p, q)?;
        }
    }
    let c = gram.lu().solve(&rhs).ok_or(Error::EigenSolve)?;
    let mut out = FunctionPair::zeros(nodes);
    for (i, (mode, phi)) in basis.iter().enumerate() {
        out.axpy((mode.lambda * x).exp() * c[i], phi);
    }
    Ok(out)
}

/// First component at y = 0.
pub fn observation(f: &FunctionPair) -> f64 {
    f.p1[0]
}

/// `Σ (e^{λ_n x} ρ_n² ‖φ_n‖²)²` with `φ_n = (α_n φ, β_n φ)`.
pub fn observability_lower_bound(modes: &ModeSet, x: f64) -> Result<f64> {
    if modes.indices.is_empty() {
        return Err(Error::Config("observability bound needs a nonempty mode set".into()));
    }
    let mut total = 0.0;
    for mode in modes.modes() {
        let v = sample_eigenvector(&mode, modes.quadrature);
        let norm2 = inner_product(&v, &v)?;
        let term = (mode.lambda * x).exp() * mode.rho * mode.rho * norm2;
        total += term * term;
    }
    Ok(total)
}

/// Sup-norm of `AΦ - λΦ` over interior nodes, with the second derivative
/// replaced by a centered difference.
pub fn eigen_residual(mode: &EigenMode, quadrature: usize) -> Result<f64> {
    if quadrature < 5 {
        return Err(Error::Config(format!("quadrature needs at least 5 nodes, got {quadrature}")));
    }
    let s = sample_mode(mode, quadrature);
    let h = INTERVAL / (quadrature - 1) as f64;
    let mut worst: f64 = 0.0;
    for j in 1..quadrature - 1 {
        let d2 = (s.p1[j + 1] - 2.0 * s.p1[j] + s.p1[j - 1]) / (h * h);
        let r1 = s.p2[j] - mode.lambda * s.p1[j];
        let r2 = -d2 - mode.lambda * s.p2[j];
        worst = worst.max(r1.abs()).max(r2.abs());
    }
    Ok(worst)
}
