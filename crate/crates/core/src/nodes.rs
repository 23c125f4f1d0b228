//! Quadrature nodes with the weight `U` and its derivatives evaluated once.
//!
//! Every weighted integral in the crate runs over a [`PreparedRegion`]: the
//! bulk nodes carry `w_k e^{−U(x_k)}`, `∇_H U` and `∇²_H U`, and the boundary
//! nodes additionally carry the unit normal `∇_H G/|∇_H G|_H`.

use crate::domain::{LevelSetDomain, Region};
use crate::error::{Error, Result};
use crate::function::ScalarField;
use crate::gaussian::GaussianModel;
use crate::moreau::Weight;
use crate::quadrature::{AxisRule, PointRule, NORMAL_CUTOFF};

pub const TRUNCATED_PANEL: f64 = 1.0;
pub const TRUNCATED_ORDER: usize = 10;
/// Nodes whose weight is below this fraction of the largest one are dropped.
pub const PRUNE_REL: f64 = 1e-22;

#[derive(Debug, Clone)]
pub struct WeightedNodes {
    dim: usize,
    points: Vec<f64>,
    z: Vec<f64>,
    weights: Vec<f64>,
    grad_u: Vec<f64>,
    hess_u: Vec<f64>,
    normals: Vec<f64>,
}

impl WeightedNodes {
    /// Evaluates `U` on every node of `rule`; `normals_of` attaches boundary normals.
    pub fn new(
        rule: &PointRule,
        model: &GaussianModel,
        weight: &dyn ScalarField,
        weight_is_zero: bool,
        normals_of: Option<&LevelSetDomain>,
    ) -> Result<Self> {
        let n = rule.dim();
        model.check_dim(n)?;
        let s = model.sqrt_spectrum();
        let mut raw: Vec<(usize, f64)> = Vec::with_capacity(rule.len());
        let mut jets = Vec::with_capacity(rule.len());
        for (k, (x, w)) in rule.iter().enumerate() {
            if weight_is_zero {
                raw.push((k, w));
                jets.push(None);
                continue;
            }
            let j = weight.jet(x);
            if !j.value.is_finite() {
                return Err(Error::NonIntegrableSample { node: k });
            }
            raw.push((k, w * (-j.value).exp()));
            jets.push(Some(j));
        }
        let wmax = raw.iter().map(|(_, w)| w.abs()).fold(0.0, f64::max);
        let mut out = Self {
            dim: n,
            points: Vec::new(),
            z: Vec::new(),
            weights: Vec::new(),
            grad_u: Vec::new(),
            hess_u: Vec::new(),
            normals: Vec::new(),
        };
        for (k, w) in raw {
            if w.abs() < PRUNE_REL * wmax {
                continue;
            }
            let x = rule.point(k);
            out.points.extend_from_slice(x);
            out.z.extend(x.iter().zip(s.iter()).map(|(xi, si)| xi / si));
            out.weights.push(w);
            match &jets[k] {
                Some(j) => {
                    out.grad_u.extend(j.gradient.iter());
                    for r in 0..n {
                        for c in 0..n {
                            out.hess_u.push(j.hessian[(r, c)]);
                        }
                    }
                }
                None => {
                    out.grad_u.extend(std::iter::repeat_n(0.0, n));
                    out.hess_u.extend(std::iter::repeat_n(0.0, n * n));
                }
            }
            if let Some(d) = normals_of {
                let g = d.g().gradient(x);
                let norm = g.norm();
                if !(norm > 0.0) {
                    return Err(Error::InvalidParameter(
                        "∇_H G vanishes on the boundary".into(),
                    ));
                }
                out.normals.extend(g.iter().map(|v| v / norm));
            }
        }
        Ok(out)
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

    /// Ambient coordinates of node `k`.
    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    /// Standardized coordinates `ĥ_i(x_k)`.
    pub fn z(&self, k: usize) -> &[f64] {
        &self.z[k * self.dim..(k + 1) * self.dim]
    }

    /// Quadrature weight times `e^{−U(x_k)}`.
    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn grad_u(&self, k: usize) -> &[f64] {
        &self.grad_u[k * self.dim..(k + 1) * self.dim]
    }

    /// Row-major `∇²_H U(x_k)`.
    pub fn hess_u(&self, k: usize) -> &[f64] {
        let m = self.dim * self.dim;
        &self.hess_u[k * m..(k + 1) * m]
    }

    pub fn normal(&self, k: usize) -> Option<&[f64]> {
        if self.normals.is_empty() {
            None
        } else {
            Some(&self.normals[k * self.dim..(k + 1) * self.dim])
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ_k weight_k · g(k)`; a non-finite sample is an error.
    pub fn integrate(&self, mut g: impl FnMut(usize) -> f64) -> Result<f64> {
        let mut s = 0.0;
        for k in 0..self.len() {
            let v = g(k);
            if !v.is_finite() {
                return Err(Error::NonIntegrableSample { node: k });
            }
            s += self.weights[k] * v;
        }
        Ok(s)
    }

    /// Several integrals in one sweep; `g(k, out)` fills the integrands at node `k`.
    pub fn integrate_many(&self, count: usize, mut g: impl FnMut(usize, &mut [f64])) -> Result<Vec<f64>> {
        let mut sums = vec![0.0; count];
        let mut buf = vec![0.0; count];
        for k in 0..self.len() {
            buf.iter_mut().for_each(|b| *b = 0.0);
            g(k, &mut buf);
            for (s, v) in sums.iter_mut().zip(&buf) {
                if !v.is_finite() {
                    return Err(Error::NonIntegrableSample { node: k });
                }
                *s += self.weights[k] * v;
            }
        }
        Ok(sums)
    }
}

/// A region with its bulk (ν) and, for domains, boundary (`e^{−U}ρ`) nodes.
#[derive(Debug, Clone)]
pub struct PreparedRegion<'a> {
    region: Region<'a>,
    pub bulk: WeightedNodes,
    pub boundary: Option<WeightedNodes>,
}

impl<'a> PreparedRegion<'a> {
    pub fn region(&self) -> Region<'a> {
        self.region
    }

    pub fn model(&self) -> &'a GaussianModel {
        self.region.model()
    }

    pub fn domain(&self) -> Option<&'a LevelSetDomain> {
        self.region.domain()
    }

    pub fn boundary(&self) -> Result<&WeightedNodes> {
        self.boundary.as_ref().ok_or(Error::NoSurfaceRule)
    }
}

/// Axis rule matched to the decay of the weight.
pub fn axis_rule_for(model: &GaussianModel, weight: &Weight) -> AxisRule {
    match weight.support_radius() {
        Some(r) => {
            let smin = model.sqrt_spectrum().iter().copied().fold(f64::INFINITY, f64::min);
            AxisRule::Truncated {
                half_width: (r / smin).min(NORMAL_CUTOFF),
                panel: TRUNCATED_PANEL,
                order: TRUNCATED_ORDER,
            }
        }
        None => AxisRule::Hermite(model.quad_order()),
    }
}

impl<'a> Region<'a> {
    /// Caches `U` on the quadrature nodes of the region.
    pub fn prepare(&self, weight: &Weight) -> Result<PreparedRegion<'a>> {
        self.prepare_with(weight, weight.is_zero(), axis_rule_for(self.model(), weight))
    }

    /// As [`Region::prepare`] for an arbitrary weight field and axis rule.
    pub fn prepare_with(
        &self,
        weight: &dyn ScalarField,
        weight_is_zero: bool,
        axis: AxisRule,
    ) -> Result<PreparedRegion<'a>> {
        let model = self.model();
        model.check_dim(weight.dim())?;
        let (bulk, boundary) = match self {
            Region::Whole(m) => {
                let rule = match axis {
                    AxisRule::Hermite(q) if q == m.quad_order() => m.grid()?.rule.clone(),
                    _ => m.grid_with(axis)?,
                };
                (WeightedNodes::new(&rule, model, weight, weight_is_zero, None)?, None)
            }
            Region::Domain(d) => {
                let (bulk, boundary) = match (d.bulk_rule(), d.boundary_rule()) {
                    (Ok(_), Ok(_)) => {
                        let (b, s) = d.rules_with(axis)?;
                        (b, Some(s))
                    }
                    (Ok(b), Err(_)) => (b.clone(), None),
                    (Err(e), _) => return Err(e),
                };
                let bulk = WeightedNodes::new(&bulk, model, weight, weight_is_zero, None)?;
                let boundary = match boundary {
                    Some(s) => Some(WeightedNodes::new(&s, model, weight, weight_is_zero, Some(d))?),
                    None => None,
                };
                (bulk, boundary)
            }
        };
        Ok(PreparedRegion {
            region: *self,
            bulk,
            boundary,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gaussian_density;

    #[test]
    fn quartic_mass_agrees_between_rules() {
        // ∫ e^{−x⁴/2} dγ by a fine 1-D composite rule
        let (x, w) = crate::quadrature::composite_legendre(30, -6.0, 6.0, 0.25);
        let oracle: f64 = x
            .iter()
            .zip(&w)
            .map(|(t, wi)| wi * gaussian_density(*t) * (-0.5 * t.powi(4)).exp())
            .sum();
        let m = GaussianModel::standard(1, 40).unwrap();
        let p = Region::Whole(&m).prepare(&Weight::radial_quartic(&m)).unwrap();
        assert!((p.bulk.total_weight() - oracle).abs() < 1e-13);
    }

    #[test]
    fn boundary_normals_are_unit() {
        let m = GaussianModel::new(vec![1.0, 3.0], 12).unwrap();
        let d = LevelSetDomain::half_space(&m, &[1.0, 1.0], 0.5).unwrap();
        let p = Region::Domain(&d).prepare(&Weight::zero(&m)).unwrap();
        let b = p.boundary().unwrap();
        for k in 0..b.len() {
            let nn: f64 = b.normal(k).unwrap().iter().map(|v| v * v).sum();
            assert!((nn - 1.0).abs() < 1e-14);
        }
    }
}
