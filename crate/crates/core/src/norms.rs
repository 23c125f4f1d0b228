//! Weighted Sobolev norms `W^{k,2}(Ω, e^{−U}μ)` by quadrature.

use crate::nodes::PreparedRegion;
use crate::error::Result;
use crate::function::ScalarField;

/// Squared pieces of the `W²²_U` norm; the norm itself is Hilbertian
/// (square root of the sum of the pieces).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevNorms {
    pub l2_sq: f64,
    pub grad_sq: f64,
    pub hess_sq: f64,
    /// `∫ ⟨∇²_H U ∇_H u, ∇_H u⟩_H dν`.
    pub weight_form: f64,
}

impl SobolevNorms {
    pub fn l2(&self) -> f64 {
        self.l2_sq.sqrt()
    }

    pub fn grad(&self) -> f64 {
        self.grad_sq.sqrt()
    }

    pub fn w12(&self) -> f64 {
        (self.l2_sq + self.grad_sq).sqrt()
    }

    pub fn w22(&self) -> f64 {
        (self.l2_sq + self.grad_sq + self.hess_sq).sqrt()
    }

    pub fn w22_u(&self) -> f64 {
        (self.l2_sq + self.grad_sq + self.hess_sq + self.weight_form).sqrt()
    }
}

/// Norms of `u` in `L²(region, e^{−U}μ)` over prepared nodes.
pub fn sobolev_norms(u: &dyn ScalarField, prep: &PreparedRegion<'_>) -> Result<SobolevNorms> {
    let n = prep.model().dim();
    let nodes = &prep.bulk;
    let v = nodes.integrate_many(4, |k, out| {
        let j = u.jet(nodes.point(k));
        let hu = nodes.hess_u(k);
        let mut form = 0.0;
        for a in 0..n {
            for b in 0..n {
                form += hu[a * n + b] * j.gradient[a] * j.gradient[b];
            }
        }
        out[0] = j.value * j.value;
        out[1] = j.gradient.norm_squared();
        out[2] = j.hessian.norm_squared();
        out[3] = form;
    })?;
    Ok(SobolevNorms {
        l2_sq: v[0],
        grad_sq: v[1],
        hess_sq: v[2],
        weight_form: v[3],
    })
}

/// `∫ f² dν` over prepared nodes.
pub fn l2_sq(f: impl Fn(&[f64]) -> f64, prep: &PreparedRegion<'_>) -> Result<f64> {
    prep.bulk.integrate(|k| {
        let v = f(prep.bulk.point(k));
        v * v
    })
}
