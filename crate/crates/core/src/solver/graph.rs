//! Graph norm versus the weighted second-order Sobolev norm.

use serde::Serialize;

use super::apply_l;
use crate::error::{Error, Result};
use crate::function::{CylFunction, ScalarField};
use crate::moreau::Weight;
use crate::nodes::PreparedRegion;
use crate::norms::sobolev_norms;

pub const GRAPH_SLACK: f64 = 1e-8;
pub const NEUMANN_TOL: f64 = 1e-8;
/// The constant `2√2`.
pub const GRAPH_CONSTANT: f64 = 2.828_427_124_746_190_3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphNormReport {
    /// `(‖u‖² + ‖Lu‖²)^{1/2}`
    pub graph_norm: f64,
    pub w22_u: f64,
    /// `‖u‖_{W²²_U}/‖u‖_{D(L)}`, expected in `[1, 2√2]`.
    pub ratio: f64,
    pub neumann_residual: f64,
}

impl GraphNormReport {
    pub fn lower_holds(&self) -> bool {
        self.graph_norm <= self.w22_u + GRAPH_SLACK
    }

    pub fn upper_holds(&self) -> bool {
        self.w22_u <= GRAPH_CONSTANT * self.graph_norm + GRAPH_SLACK
    }
}

/// Compares both norms of `u` on the prepared region; on a domain `u` must
/// satisfy `⟨∇_H u, ∇_H G⟩_H = 0` at the boundary nodes.
pub fn graph_norm_check(u: &CylFunction, w: &Weight, prep: &PreparedRegion<'_>) -> Result<GraphNormReport> {
    let mut neumann = 0.0_f64;
    if prep.domain().is_some() {
        let b = prep.boundary()?;
        for k in 0..b.len() {
            let g = u.gradient(b.point(k));
            let nu = b.normal(k).expect("boundary normals");
            let d: f64 = g.iter().zip(nu).map(|(a, c)| a * c).sum();
            neumann = neumann.max(d.abs());
        }
        if neumann > NEUMANN_TOL {
            return Err(Error::NeumannViolated { residual: neumann });
        }
    }
    let lu = apply_l(u, w)?;
    let nodes = &prep.bulk;
    let v = nodes.integrate_many(2, |k, out| {
        let x = nodes.point(k);
        let a = u.value(x);
        let b = lu.value(x);
        out[0] = a * a;
        out[1] = b * b;
    })?;
    let graph_norm = (v[0] + v[1]).sqrt();
    let w22_u = sobolev_norms(u, prep)?.w22_u();
    Ok(GraphNormReport {
        graph_norm,
        w22_u,
        ratio: if graph_norm > 0.0 { w22_u / graph_norm } else { 1.0 },
        neumann_residual: neumann,
    })
}
