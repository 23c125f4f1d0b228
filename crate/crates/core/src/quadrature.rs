//! One-dimensional Gaussian rules and weighted point sets.

use std::num::NonZeroUsize;

use gauss_quad::{GaussHermite, GaussLegendre};

use crate::error::{Error, Result};

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn gaussian_density(t: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * t * t).exp()
}

/// Lower limit used in place of `-∞` for the standard normal on a half-line;
/// the Gaussian mass below it is about 1e-33.
pub const NORMAL_CUTOFF: f64 = 12.0;

fn nz(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n.max(1)).unwrap()
}

/// Gauss–Hermite rule for the standard normal law: `Σ w_k g(t_k) ≈ ∫ g dγ`.
pub fn gauss_hermite_normal(order: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussHermite::new(nz(order));
    let scale = std::f64::consts::PI.sqrt().recip();
    let mut pairs: Vec<(f64, f64)> = rule
        .iter()
        .map(|(x, w)| (x * std::f64::consts::SQRT_2, w * scale))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(nz(order));
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut pairs: Vec<(f64, f64)> = rule
        .iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Composite Gauss–Legendre on `[a, b]` with panels no longer than `panel`.
pub fn composite_legendre(order: usize, a: f64, b: f64, panel: f64) -> (Vec<f64>, Vec<f64>) {
    let panels = ((b - a) / panel).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let (x, w) = gauss_legendre(order, a + p as f64 * h, a + (p + 1) as f64 * h);
        nodes.extend(x);
        weights.extend(w);
    }
    (nodes, weights)
}

/// Rule for `∫_{(-∞, upper]} g dγ` with the Gaussian density folded into the weights.
pub fn normal_below(upper: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let lower = (-NORMAL_CUTOFF).min(upper - 1.0);
    let (x, w) = composite_legendre(order, lower, upper, 2.0);
    let w = x.iter().zip(&w).map(|(t, wi)| wi * gaussian_density(*t)).collect();
    (x, w)
}

/// Rule for `∫_{[lower, ∞)} g dγ`.
pub fn normal_above(lower: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = normal_below(-lower, order);
    let mut pairs: Vec<(f64, f64)> = x.into_iter().map(|t| -t).zip(w).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// One-dimensional rule for the standard normal law on the whole line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisRule {
    Hermite(usize),
    /// Composite Gauss–Legendre on `[−half_width, half_width]` with the density
    /// folded into the weights; suited to weights that decay faster than Gaussian.
    Truncated {
        half_width: f64,
        panel: f64,
        order: usize,
    },
}

impl AxisRule {
    pub fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        match *self {
            AxisRule::Hermite(order) => gauss_hermite_normal(order),
            AxisRule::Truncated {
                half_width,
                panel,
                order,
            } => {
                let (x, w) = composite_legendre(order, -half_width, half_width, panel);
                let w = x.iter().zip(&w).map(|(t, wi)| wi * gaussian_density(*t)).collect();
                (x, w)
            }
        }
    }

    /// Same rule restricted to `(−∞, upper]`.
    pub fn below(&self, upper: f64, normal_order: usize) -> (Vec<f64>, Vec<f64>) {
        match *self {
            AxisRule::Hermite(_) => normal_below(upper, normal_order),
            AxisRule::Truncated {
                half_width,
                panel,
                order,
            } => {
                let lower = (-half_width).min(upper - panel);
                let (x, w) = composite_legendre(order, lower, upper, panel);
                let w = x.iter().zip(&w).map(|(t, wi)| wi * gaussian_density(*t)).collect();
                (x, w)
            }
        }
    }

    /// Same rule restricted to `[lower, ∞)`.
    pub fn above(&self, lower: f64, normal_order: usize) -> (Vec<f64>, Vec<f64>) {
        let (x, w) = self.below(-lower, normal_order);
        let mut pairs: Vec<(f64, f64)> = x.into_iter().map(|t| -t).zip(w).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.into_iter().unzip()
    }
}

/// Weighted point set in ambient coordinates, stored row-major.
#[derive(Debug, Clone)]
pub struct PointRule {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl PointRule {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            points: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn push(&mut self, x: &[f64], w: f64) {
        debug_assert_eq!(x.len(), self.dim);
        self.points.extend_from_slice(x);
        self.weights.push(w);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        (0..self.len()).map(|k| (self.point(k), self.weights[k]))
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ w_k g(x_k)`; a non-finite sample is an error.
    pub fn integrate(&self, mut g: impl FnMut(&[f64]) -> f64) -> Result<f64> {
        let mut s = 0.0;
        for (k, (x, w)) in self.iter().enumerate() {
            let v = g(x);
            if !v.is_finite() {
                return Err(Error::NonIntegrableSample { node: k });
            }
            s += w * v;
        }
        Ok(s)
    }

    /// Several integrals in one sweep: `g` fills `out` with the integrands at a node.
    pub fn integrate_many(
        &self,
        count: usize,
        mut g: impl FnMut(&[f64], &mut [f64]),
    ) -> Result<Vec<f64>> {
        let mut sums = vec![0.0; count];
        let mut buf = vec![0.0; count];
        for (k, (x, w)) in self.iter().enumerate() {
            g(x, &mut buf);
            for (s, v) in sums.iter_mut().zip(&buf) {
                if !v.is_finite() {
                    return Err(Error::NonIntegrableSample { node: k });
                }
                *s += w * v;
            }
        }
        Ok(sums)
    }

    /// Tensor product of per-axis rules given in ambient coordinates.
    pub fn tensor(axes: &[(Vec<f64>, Vec<f64>)]) -> Self {
        let dim = axes.len();
        let mut rule = PointRule::new(dim);
        let sizes: Vec<usize> = axes.iter().map(|a| a.0.len()).collect();
        let total: usize = sizes.iter().product();
        let mut idx = vec![0usize; dim];
        let mut x = vec![0.0; dim];
        for _ in 0..total {
            let mut w = 1.0;
            for d in 0..dim {
                x[d] = axes[d].0[idx[d]];
                w *= axes[d].1[idx[d]];
            }
            rule.push(&x, w);
            for d in (0..dim).rev() {
                idx[d] += 1;
                if idx[d] < sizes[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        rule
    }

    /// Maps every point through `f`, keeping weights.
    pub fn map_points(&self, dim: usize, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> PointRule {
        let mut out = PointRule::new(dim);
        for (x, w) in self.iter() {
            out.push(&f(x), w);
        }
        out
    }

    pub fn scale_weights(&self, mut f: impl FnMut(&[f64]) -> f64) -> PointRule {
        let mut out = self.clone();
        for k in 0..out.len() {
            let s = f(self.point(k));
            out.weights[k] *= s;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_weights_are_normalized() {
        for order in [2, 5, 40] {
            let (_, w) = gauss_hermite_normal(order);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn half_line_rule_integrates_normal_moments() {
        // ∫_{-∞}^0 dγ = 1/2, ∫_{-∞}^0 t dγ = -γ(0)
        let (x, w) = normal_below(0.0, 20);
        let m0: f64 = w.iter().sum();
        let m1: f64 = x.iter().zip(&w).map(|(t, w)| t * w).sum();
        assert!((m0 - 0.5).abs() < 1e-14);
        assert!((m1 + gaussian_density(0.0)).abs() < 1e-14);
        let (x, w) = normal_above(0.0, 20);
        let m1: f64 = x.iter().zip(&w).map(|(t, w)| t * w).sum();
        assert!((m1 - gaussian_density(0.0)).abs() < 1e-14);
    }
}
