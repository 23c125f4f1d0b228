//! Penalization: the whole-space problem with `V_α` against the domain problem.

use serde::Serialize;

use super::slab::{SlabOptions, SlabSolver};
use super::{EstimateReport, Solution};
use crate::domain::LevelSetDomain;
use crate::error::{Error, Result};
use crate::function::ScalarField;
use crate::moreau::{PenalizedWeight, Weight};

/// Mesh cells per `√α` enforced on the penalized slab.
pub const CELLS_PER_LAYER: f64 = 10.0;

pub const DEFAULT_ALPHAS: [f64; 5] = [0.5, 0.2, 0.1, 0.05, 0.02];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyRow {
    pub alpha: f64,
    pub h: f64,
    /// `‖u_α − u_Ω‖_{L²(Ω,ν)}`
    pub error: f64,
    /// `‖u_Ω‖_{L²(Ω,ν)}` on the same mesh.
    pub reference_l2: f64,
    pub estimates: EstimateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltyTable {
    pub rows: Vec<PenaltyRow>,
}

impl PenaltyTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }

    /// Final error relative to `‖u_Ω‖`.
    pub fn final_relative_error(&self) -> f64 {
        self.rows
            .last()
            .map(|r| if r.reference_l2 > 0.0 { r.error / r.reference_l2 } else { r.error })
            .unwrap_or(0.0)
    }
}

/// Solves with `V_α` for every `α` (decreasing, in `(0, 1]`) and compares with the domain solve.
pub fn penalization_sweep(
    d: &LevelSetDomain,
    weight: &Weight,
    f: &dyn ScalarField,
    lambda: f64,
    alphas: &[f64],
    opts: SlabOptions,
) -> Result<PenaltyTable> {
    if alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("α schedule must be decreasing".into()));
    }
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let h = opts.h.min(alpha.sqrt() / CELLS_PER_LAYER);
        let o = SlabOptions { h, ..opts };
        let domain = SlabSolver::half_space(d, weight, o)?;
        let reference = domain.solve(f, lambda)?;
        let pw = PenalizedWeight::new(weight, d, alpha)?;
        let pen = SlabSolver::penalized(&pw, o)?.solve(f, lambda)?;
        let (Solution::Slab(a), Solution::Slab(b)) = (&pen.solution, &reference.solution) else {
            unreachable!("slab solves return slab solutions")
        };
        rows.push(PenaltyRow {
            alpha,
            h,
            error: domain.l2_distance_on_domain(a, b)?,
            reference_l2: reference.norms.l2(),
            estimates: pen.estimate_report(),
        });
    }
    Ok(PenaltyTable { rows })
}
