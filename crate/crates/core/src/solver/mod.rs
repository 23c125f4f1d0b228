//! Weak solutions of `λu − L_{ν,Ω}u = f`: spectral Hermite–Galerkin on the
//! whole space, finite volumes in the normal coordinate times tangential
//! Hermite–Galerkin on half-spaces, the penalization driver and the reports
//! built on top of them.

pub mod basis;
pub mod graph;
pub mod penalize;
pub mod slab;
pub mod spectral;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{CylFunction, ScalarField};
use crate::moreau::Weight;
use crate::norms::SobolevNorms;
use crate::poly::Poly;

pub use graph::{graph_norm_check, GraphNormReport};
pub use penalize::{penalization_sweep, PenaltyRow, PenaltyTable};
pub use slab::{SlabOptions, SlabSolution, SlabSolver};
pub use spectral::SpectralSolver;

/// Slack on the sharp a-priori estimates granted to the discretizations.
pub const ESTIMATE_TOL: f64 = 5e-3;

/// `L_ν u = Σ_i (∂_ii u − ∂_i u ∂_i U − ∂_i u ĥ_i)` over the active coordinates of `u`.
pub fn apply_l(u: &CylFunction, w: &Weight) -> Result<CylFunction> {
    let n = u.dim();
    if w.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.dim(),
        });
    }
    let sqrt = u.sqrt_spectrum().clone();
    let mut acc = CylFunction::from_poly(sqrt.clone(), Poly::zero(n));
    for i in u.active_coords() {
        let di = u.partial(i);
        let hat = CylFunction::from_poly(sqrt.clone(), Poly::variable(n, i));
        let mut term = &di.partial(i) - &(&di * &hat);
        if !w.is_zero() {
            term = &term - &(&di * &w.u().partial(i));
        }
        acc = &acc + &term;
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub enum Solution {
    /// `u = Σ c_a H_a` in the tensor Hermite basis.
    Spectral { u: CylFunction, coeffs: Vec<f64> },
    Slab(SlabSolution),
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub lambda: f64,
    /// Norms of `u` in `L²(Ω, ν)`.
    pub norms: SobolevNorms,
    pub f_norm_sq: f64,
    /// Relative residual of the assembled linear system.
    pub system_residual: f64,
    /// `|∂_ν u|` on the boundary by a one-sided second-order difference (domain solves).
    pub neumann_residual: Option<f64>,
    /// Density of `‖u‖²_{L²(ν)}` per unit normal length at the left cutoff (domain solves).
    pub cutoff_mass: Option<f64>,
    pub solution: Solution,
}

impl SolveResult {
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.solution {
            Solution::Spectral { u, .. } => u.value(x),
            Solution::Slab(s) => s.value(x),
        }
    }

    pub fn estimate_report(&self) -> EstimateReport {
        EstimateReport::new(self.lambda, &self.norms, self.f_norm_sq, 1.0 + ESTIMATE_TOL)
    }
}

/// The three a-priori ratios; each must stay below `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateReport {
    /// `λ‖u‖/‖f‖`
    pub resolvent: f64,
    /// `√λ‖∇_H u‖/‖f‖`
    pub gradient: f64,
    /// `(‖∇²_H u‖² + ∫⟨∇²_H U ∇_H u, ∇_H u⟩_H dν)/(2‖f‖²)`
    pub hessian: f64,
    pub threshold: f64,
}

impl EstimateReport {
    pub fn new(lambda: f64, norms: &SobolevNorms, f_norm_sq: f64, threshold: f64) -> Self {
        let f = f_norm_sq.sqrt();
        if f == 0.0 {
            return Self {
                resolvent: 0.0,
                gradient: 0.0,
                hessian: 0.0,
                threshold,
            };
        }
        Self {
            resolvent: lambda * norms.l2() / f,
            gradient: lambda.sqrt() * norms.grad() / f,
            hessian: (norms.hess_sq + norms.weight_form) / (2.0 * f_norm_sq),
            threshold,
        }
    }

    pub fn worst(&self) -> f64 {
        self.resolvent.max(self.gradient).max(self.hessian)
    }

    pub fn passes(&self) -> bool {
        self.worst() <= self.threshold
    }
}
