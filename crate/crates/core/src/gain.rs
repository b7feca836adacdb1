//! Observer gain design by pole placement and spectral-radius certificates.

use crate::error::{Error, Result};
use nalgebra::{Complex, DMatrix, DVector, RowDVector};

pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct PoleSpec {
    poles: Vec<Complex<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleLayout {
    /// Distinct real poles evenly spaced on `[min, max]`.
    Uniform,
    /// Conjugate pairs on the circle of radius `max`, spread over the upper
    /// half plane.
    Ring,
}

impl PoleSpec {
    pub fn new(poles: Vec<Complex<f64>>) -> Result<Self> {
        if poles.is_empty() {
            return Err(Error::InvalidPoles("no poles given".into()));
        }
        if let Some(p) = poles.iter().find(|p| !(p.norm() < 1.0)) {
            return Err(Error::InvalidPoles(format!("pole {p} is not inside the unit circle")));
        }
        let scale = poles.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let conj: Vec<Complex<f64>> = poles.iter().map(|p| p.conj()).collect();
        if matching_error(&poles, &conj) > 1e-12 * scale {
            return Err(Error::InvalidPoles("poles are not closed under conjugation".into()));
        }
        Ok(Self { poles })
    }

    pub fn real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex::new(v, 0.0)).collect())
    }

    pub fn uniform(n: usize, min: f64, max: f64) -> Result<Self> {
        if n == 1 {
            return Self::real(&[0.5 * (min + max)]);
        }
        let h = (max - min) / (n - 1) as f64;
        let v: Vec<f64> = (0..n).map(|j| if j + 1 == n { max } else { min + h * j as f64 }).collect();
        Self::real(&v)
    }

    pub fn ring(n: usize, radius: f64) -> Result<Self> {
        let mut poles = Vec::with_capacity(n);
        for j in 0..n / 2 {
            let theta = std::f64::consts::PI * (2 * j + 1) as f64 / n as f64;
            let p = Complex::from_polar(radius, theta);
            poles.push(p);
            poles.push(p.conj());
        }
        if n % 2 == 1 {
            poles.push(Complex::new(-radius, 0.0));
        }
        Self::new(poles)
    }

    pub fn layout(layout: PoleLayout, n: usize, min: f64, max: f64) -> Result<Self> {
        match layout {
            PoleLayout::Uniform => Self::uniform(n, min, max),
            PoleLayout::Ring => Self::ring(n, max),
        }
    }

    pub fn poles(&self) -> &[Complex<f64>] {
        &self.poles
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn max_modulus(&self) -> f64 {
        self.poles.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        self.poles.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Rows `C, CF, CF², …, CF^{n-1}`.
pub fn observability_matrix(f: &DMatrix<f64>, c_row: &RowDVector<f64>) -> DMatrix<f64> {
    let n = f.nrows();
    let mut o = DMatrix::zeros(n, n);
    let mut row = c_row.clone();
    for k in 0..n {
        o.set_row(k, &row);
        row = &row * f;
    }
    o
}

pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = m.singular_values();
    let max = s.max();
    let min = s.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Monic polynomial with the given roots, evaluated at `f`. Conjugate pairs are
/// multiplied as real quadratics.
fn characteristic_polynomial(f: &DMatrix<f64>, poles: &[Complex<f64>]) -> DMatrix<f64> {
    let n = f.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut q = eye.clone();
    let mut used = vec![false; poles.len()];
    for i in 0..poles.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let p = poles[i];
        if p.im == 0.0 {
            q = &q * (f - &eye * p.re);
            continue;
        }
        let partner = (0..poles.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (poles[a] - p.conj()).norm().total_cmp(&(poles[b] - p.conj()).norm()))
            .expect("conjugate partner exists");
        used[partner] = true;
        let quad = f * f - f * (2.0 * p.re) + &eye * p.norm_sqr();
        q = &q * quad;
    }
    q
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub gain: DVector<f64>,
    pub obs_condition: f64,
    pub mismatch: f64,
    pub spectral_radius: f64,
}

pub fn ackermann_gain(f: &DMatrix<f64>, c_row: &RowDVector<f64>, spec: &PoleSpec) -> Result<Placement> {
    ackermann_gain_capped(f, c_row, spec, DEFAULT_CONDITION_CAP)
}

pub fn ackermann_gain_capped(
    f: &DMatrix<f64>,
    c_row: &RowDVector<f64>,
    spec: &PoleSpec,
    cap: f64,
) -> Result<Placement> {
    let n = f.nrows();
    if f.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.ncols() });
    }
    if c_row.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: c_row.len() });
    }
    if spec.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: spec.len() });
    }
    let o = observability_matrix(f, c_row);
    let obs_condition = condition_number(&o);
    if !(obs_condition <= cap) {
        return Err(Error::ObservabilityDeficient { condition: obs_condition, cap });
    }
    let mut e_last = DVector::zeros(n);
    e_last[n - 1] = 1.0;
    let w = o.lu().solve(&e_last).ok_or(Error::ObservabilityDeficient { condition: f64::INFINITY, cap })?;
    let gain = characteristic_polynomial(f, spec.poles()) * w;

    let closed = f - &gain * c_row;
    let eig = eigenvalues(&closed)?;
    let mismatch = matching_error(&eig, spec.poles());
    let tolerance = 1e-6 * (1.0 + spec.max_modulus());
    let spectral_radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(mismatch <= tolerance) {
        return Err(Error::PlacementFailed { mismatch, tolerance });
    }
    Ok(Placement { gain, obs_condition, mismatch, spectral_radius })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunedGain {
    pub gain: DVector<f64>,
    pub kappa: f64,
    pub spectral_radius: f64,
    pub stable: bool,
}

/// Scalar injection at the observed node, chosen by exhaustive search over
/// `search_grid` (with `κ = 0` always included).
pub fn tuned_injection_gain(f: &DMatrix<f64>, c_row: &RowDVector<f64>, search_grid: &[f64]) -> Result<TunedGain> {
    let n = f.nrows();
    let pattern = DVector::from_iterator(n, c_row.iter().copied());
    let mut best: Option<(f64, f64)> = None;
    for &kappa in std::iter::once(&0.0).chain(search_grid) {
        let r = spectral_radius(&(f - &pattern * c_row * kappa))?;
        if best.is_none_or(|(_, b)| r < b) {
            best = Some((kappa, r));
        }
    }
    let (kappa, spectral_radius) = best.expect("grid includes zero");
    Ok(TunedGain { gain: pattern * kappa, kappa, spectral_radius, stable: spectral_radius < 1.0 })
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 100_000).ok_or(Error::EigenSolve)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    match eigenvalues(m) {
        Ok(e) => Ok(e.iter().map(|z| z.norm()).fold(0.0, f64::max)),
        Err(_) => power_iteration(m, 1e-10, 100_000),
    }
}

/// Growth rate of `‖M^k v‖` averaged over a sliding window of steps.
pub fn power_iteration(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<f64> {
    const WINDOW: usize = 16;
    let n = m.nrows();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.7).sin() * 0.5);
    v /= v.norm();
    let mut logs = std::collections::VecDeque::with_capacity(WINDOW);
    let mut last = f64::NAN;
    for _ in 0..max_iter {
        let w = m * &v;
        let nw = w.norm();
        if nw == 0.0 {
            return Ok(0.0);
        }
        v = w / nw;
        if logs.len() == WINDOW {
            logs.pop_front();
        }
        logs.push_back(nw.ln());
        if logs.len() < WINDOW {
            continue;
        }
        let est = (logs.iter().sum::<f64>() / WINDOW as f64).exp();
        if (est - last).abs() <= tol * est.max(1.0) {
            return Ok(est);
        }
        last = est;
    }
    Err(Error::EigenSolve)
}

/// Largest pairwise distance under the assignment minimizing the total
/// distance between two equally sized point sets.
pub fn matching_error(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    let assign = min_cost_assignment(&cost);
    assign.iter().enumerate().map(|(i, &j)| cost[i][j]).fold(0.0, f64::max)
}

/// Hungarian algorithm on a square cost matrix; returns column per row.
fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}
