//! Anderson mixing for fixed-point maps `z = G(z)`.

use nalgebra::{DMatrix, DVector};
use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct Anderson {
    depth: usize,
    dg: VecDeque<DVector<f64>>,
    dr: VecDeque<DVector<f64>>,
    last: Option<(DVector<f64>, DVector<f64>)>,
}

impl Anderson {
    pub fn new(depth: usize) -> Self {
        Self { depth, dg: VecDeque::new(), dr: VecDeque::new(), last: None }
    }

    /// Next iterate from the current input `z` and its image `g = G(z)`.
    pub fn next(&mut self, z: &DVector<f64>, g: &DVector<f64>) -> DVector<f64> {
        let r = g - z;
        if let Some((g_prev, r_prev)) = self.last.take() {
            self.dg.push_back(g - g_prev);
            self.dr.push_back(&r - r_prev);
            if self.dg.len() > self.depth {
                self.dg.pop_front();
                self.dr.pop_front();
            }
        }
        self.last = Some((g.clone(), r.clone()));
        if self.dr.is_empty() || self.depth == 0 {
            return g.clone();
        }
        let m = self.dr.len();
        let dr = DMatrix::from_columns(&self.dr.iter().cloned().collect::<Vec<_>>());
        let svd = dr.svd(true, true);
        let eps = svd.singular_values.max() * 1e-13;
        let gamma = match svd.solve(&r, eps) {
            Ok(x) => x,
            Err(_) => return g.clone(),
        };
        let mut out = g.clone();
        for j in 0..m {
            out -= &self.dg[j] * gamma[j];
        }
        out
    }
}
