//! Neumann-compatible cylindrical functions on the unit ball of ℝ².
//!
//! On the unit circle the Neumann condition for `u = φ(x₁, x₂)` reads
//! `√λ₁ξ₁∂₁φ + √λ₂ξ₂∂₂φ = 0`, whose solutions are
//! `φ(ξ) = g(ξ₁^{√λ₂} ξ₂^{−√λ₁})`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{CylFunction, ScalarField, ScalarMap};
use crate::gaussian::GaussianModel;

/// Radii used to approach the origin.
pub const APPROACH_RADII: [f64; 4] = [1e-3, 1e-4, 1e-5, 1e-6];

fn integer_root(l: f64) -> Option<i32> {
    let s = l.sqrt();
    let k = s.round();
    ((s - k).abs() < 1e-12 && k >= 1.0).then_some(k as i32)
}

/// `ξ₁^{√λ₂} ξ₂^{−√λ₁}`. Integer roots give a function on `{ξ₂ ≠ 0}`;
/// otherwise it is defined on the open first quadrant only.
pub fn invariant(model: &GaussianModel) -> Result<CylFunction> {
    if model.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: model.dim() });
    }
    let (l1, l2) = (model.spectrum()[0], model.spectrum()[1]);
    let x1 = model.ambient_coordinate(0);
    let x2 = model.ambient_coordinate(1);
    Ok(match (integer_root(l1), integer_root(l2)) {
        (Some(q), Some(p)) => &x1.powi(p as u32) * &x2.map(ScalarMap::Powi(-q)),
        _ => &x1.map(ScalarMap::Powf(l2.sqrt())) * &x2.map(ScalarMap::Powf(-l1.sqrt())),
    })
}

/// `φ = g ∘ invariant`.
pub fn invariant_solution(model: &GaussianModel, g: ScalarMap) -> Result<CylFunction> {
    Ok(invariant(model)?.map(g))
}

/// `Σ_i √λ_i ξ_i ∂_iφ(ξ)`; with H-derivatives this is `Σ_i x_i (∇_Hφ)_i`.
pub fn ode_residual(phi: &dyn ScalarField, x: &[f64]) -> f64 {
    let g = phi.gradient(x);
    x.iter().zip(g.iter()).map(|(xi, gi)| xi * gi).sum()
}

/// Polar grid of the unit disc with `|ξ₂| ≥ margin` (and `ξ₁ > 0` when `positive`).
pub fn disc_grid(radii: usize, angles: usize, margin: f64, positive: bool) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for i in 1..=radii {
        let rho = i as f64 / radii as f64;
        for k in 0..angles {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / angles as f64;
            let p = [rho * th.cos(), rho * th.sin()];
            if p[1].abs() >= margin && (!positive || p[0] > 0.0) {
                out.push(p);
            }
        }
    }
    out
}

/// Values along a path into the origin, the last one and its change from the previous.
#[derive(Debug, Clone, Serialize)]
pub struct PathLimit {
    pub label: String,
    pub values: Vec<f64>,
    pub limit: f64,
    pub tolerance: f64,
}

fn path_limit(label: String, values: Vec<f64>) -> PathLimit {
    let n = values.len();
    PathLimit {
        label,
        limit: values[n - 1],
        tolerance: (values[n - 1] - values[n - 2]).abs(),
        values,
    }
}

/// `φ(ρ cos θ, ρ sin θ)` for `ρ` in [`APPROACH_RADII`].
pub fn ray_limit(phi: &dyn ScalarField, theta: f64) -> PathLimit {
    let values = APPROACH_RADII
        .iter()
        .map(|rho| phi.value(&[rho * theta.cos(), rho * theta.sin()]))
        .collect();
    path_limit(format!("ray theta={theta:.6}"), values)
}

/// `φ` along the characteristic `ξ₁^{√λ₂} ξ₂^{−√λ₁} = level` in the first quadrant.
pub fn characteristic_limit(phi: &dyn ScalarField, model: &GaussianModel, level: f64) -> PathLimit {
    let (s1, s2) = (model.spectrum()[0].sqrt(), model.spectrum()[1].sqrt());
    let values = APPROACH_RADII
        .iter()
        .map(|t| {
            let x2 = (t.powf(s2) / level).powf(1.0 / s1);
            phi.value(&[*t, x2])
        })
        .collect();
    path_limit(format!("characteristic level={level}"), values)
}

#[derive(Debug, Clone, Serialize)]
pub struct BallOdeReport {
    pub grid_points: usize,
    pub max_residual: f64,
    pub rays: Vec<PathLimit>,
    /// `|limit₁ − limit₂|` over the two rays.
    pub ray_gap: f64,
    pub ray_tolerance: f64,
    pub characteristics: Vec<PathLimit>,
    pub characteristic_gap: f64,
    pub characteristic_tolerance: f64,
}

impl BallOdeReport {
    pub fn rays_separate(&self) -> bool {
        self.ray_gap > 10.0 * self.ray_tolerance
    }

    pub fn characteristics_separate(&self) -> bool {
        self.characteristic_gap > 10.0 * self.characteristic_tolerance
    }
}

/// Residual on a disc grid and limits along two rays and two characteristics.
pub fn ball_ode_demo(
    model: &GaussianModel,
    g: ScalarMap,
    thetas: [f64; 2],
    levels: [f64; 2],
) -> Result<BallOdeReport> {
    let phi = invariant_solution(model, g)?;
    let positive = model.spectrum().iter().any(|l| integer_root(*l).is_none());
    let grid = disc_grid(40, 64, 0.05, positive);
    let max_residual = grid.iter().map(|p| ode_residual(&phi, p).abs()).fold(0.0, f64::max);
    let rays: Vec<PathLimit> = thetas.iter().map(|t| ray_limit(&phi, *t)).collect();
    let chars: Vec<PathLimit> = levels.iter().map(|c| characteristic_limit(&phi, model, *c)).collect();
    Ok(BallOdeReport {
        grid_points: grid.len(),
        max_residual,
        ray_gap: (rays[0].limit - rays[1].limit).abs(),
        ray_tolerance: rays[0].tolerance.max(rays[1].tolerance),
        rays,
        characteristic_gap: (chars[0].limit - chars[1].limit).abs(),
        characteristic_tolerance: chars[0].tolerance.max(chars[1].tolerance),
        characteristics: chars,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariant_is_constant_along_the_flow() {
        // the flow of √λ₁ξ₁∂₁ + √λ₂ξ₂∂₂ is (ξ₁e^{t}, ξ₂e^{2t}) for λ = (1, 4)
        let m = GaussianModel::new(vec![1.0, 4.0], 8).unwrap();
        let s = invariant(&m).unwrap();
        let p = [0.3, -0.2];
        for t in [-1.0f64, 0.5, 2.0] {
            let q = [p[0] * t.exp(), p[1] * (2.0 * t).exp()];
            assert!((s.value(&q) - s.value(&p)).abs() < 1e-12);
        }
        assert!((s.value(&p) - 0.09 / -0.2).abs() < 1e-15);
    }

    #[test]
    fn non_integer_roots_use_the_quadrant() {
        let m = GaussianModel::new(vec![1.0, 2.0], 8).unwrap();
        let phi = invariant_solution(&m, ScalarMap::Sin).unwrap();
        for p in disc_grid(10, 16, 0.05, true) {
            assert!(ode_residual(&phi, &p).abs() < 1e-10);
        }
    }
}
