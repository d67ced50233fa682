//! Adaptive Gauss-Legendre integration of vector-valued integrands.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};
use crate::qcore::Complex;

const MAX_DEPTH: u32 = 30;

/// Panel-adaptive integrator: a panel is accepted when the rule on the panel and
/// on its two halves agree within the panel's share of the tolerance.
pub(crate) struct AdaptiveRule {
    pairs: Vec<(f64, f64)>,
    abs_tol: f64,
}

impl AdaptiveRule {
    pub(crate) fn new(degree: usize, abs_tol: f64) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(degree.max(1)).expect("degree is positive"));
        AdaptiveRule { pairs: rule.as_node_weight_pairs().to_vec(), abs_tol }
    }

    fn panel<F>(&self, f: &F, a: f64, b: f64) -> Result<Vec<Complex>>
    where
        F: Fn(f64) -> Result<Vec<Complex>>,
    {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc: Vec<Complex> = Vec::new();
        for &(x, w) in &self.pairs {
            let v = f(mid + half * x)?;
            if acc.is_empty() {
                acc = vec![Complex::new(0.0, 0.0); v.len()];
            }
            for (s, fv) in acc.iter_mut().zip(v) {
                *s += w * half * fv;
            }
        }
        Ok(acc)
    }

    fn refine<F>(&self, f: &F, a: f64, b: f64, whole: Vec<Complex>, tol: f64, depth: u32) -> Result<Vec<Complex>>
    where
        F: Fn(f64) -> Result<Vec<Complex>>,
    {
        let m = 0.5 * (a + b);
        let left = self.panel(f, a, m)?;
        let right = self.panel(f, m, b)?;
        let err = whole
            .iter()
            .zip(left.iter().zip(&right))
            .map(|(w, (l, r))| (w - l - r).norm())
            .fold(0.0, f64::max);
        if err <= tol {
            return Ok(left.iter().zip(&right).map(|(l, r)| l + r).collect());
        }
        if depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailure(format!(
                "panel [{a}, {b}] not resolved after {MAX_DEPTH} bisections (error {err:e})"
            )));
        }
        let l = self.refine(f, a, m, left, 0.5 * tol, depth + 1)?;
        let r = self.refine(f, m, b, right, 0.5 * tol, depth + 1)?;
        Ok(l.iter().zip(&r).map(|(x, y)| x + y).collect())
    }

    /// Integral over consecutive `edges`; the tolerance is split in proportion to
    /// panel length.
    pub(crate) fn integrate<F>(&self, f: &F, edges: &[f64]) -> Result<Vec<Complex>>
    where
        F: Fn(f64) -> Result<Vec<Complex>>,
    {
        let total = edges.last().copied().unwrap_or(0.0) - edges.first().copied().unwrap_or(0.0);
        let mut sum: Vec<Complex> = Vec::new();
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let whole = self.panel(f, a, b)?;
            let part = self.refine(f, a, b, whole, self.abs_tol * (b - a) / total, 0)?;
            if sum.is_empty() {
                sum = part;
            } else {
                for (s, p) in sum.iter_mut().zip(part) {
                    *s += p;
                }
            }
        }
        Ok(sum)
    }
}

/// Panel edges on `[0, π]` refined geometrically toward both endpoints.
pub(crate) fn endpoint_graded_edges(levels: i32) -> Vec<f64> {
    use std::f64::consts::PI;
    let mut e = vec![0.0];
    for j in (1..=levels).rev() {
        e.push(0.5 * PI * 2f64.powi(-j));
    }
    e.push(0.5 * PI);
    for j in 1..=levels {
        e.push(PI - 0.5 * PI * 2f64.powi(-j));
    }
    e.push(PI);
    e
}
