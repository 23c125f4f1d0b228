//! Finite-dimensional centered Gaussian measure with diagonal covariance.
//!
//! The covariance has eigenvalues `λ_i` along the ambient axes `e_i`; the
//! Cameron–Martin space is ℝⁿ with `⟨h,k⟩_H = Σ h_i k_i/λ_i` and H-orthonormal
//! basis `{√λ_i e_i}`. Throughout the crate `∂_i` is the derivative along
//! `√λ_i e_i` and H-vectors returned by gradient routines are expressed in that
//! basis ("H-coordinates"). Ambient and H-coordinates are related by
//! `x_i = √λ_i · z_i`.

use std::sync::{Arc, OnceLock};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::function::{CylFunction, ScalarField, ScalarMap};
use crate::poly::Poly;
use crate::quadrature::{gauss_hermite_normal, AxisRule, PointRule};

pub const DEFAULT_QUAD_ORDER: usize = 40;
/// Largest dimension for which tensor grids are built.
pub const MAX_TENSOR_DIM: usize = 4;

#[derive(Debug, Clone)]
pub struct GaussianModel {
    spectrum: Arc<[f64]>,
    sqrt_spectrum: Arc<[f64]>,
    quad_order: usize,
    grid: Arc<OnceLock<Arc<QuadratureGrid>>>,
}

/// Tensor Gauss–Hermite nodes (ambient coordinates) with product weights.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub rule: PointRule,
    pub order: usize,
}

impl GaussianModel {
    pub fn new(spectrum: Vec<f64>, quad_order: usize) -> Result<Self> {
        if spectrum.is_empty() {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        if let Some(l) = spectrum.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "covariance eigenvalues must be positive, got {l}"
            )));
        }
        if quad_order < 2 {
            return Err(Error::InvalidModel(format!(
                "quad_order must be at least 2, got {quad_order}"
            )));
        }
        let sqrt: Vec<f64> = spectrum.iter().map(|l| l.sqrt()).collect();
        Ok(Self {
            spectrum: spectrum.into(),
            sqrt_spectrum: sqrt.into(),
            quad_order,
            grid: Arc::new(OnceLock::new()),
        })
    }

    /// Standard Gaussian on ℝⁿ.
    pub fn standard(dim: usize, quad_order: usize) -> Result<Self> {
        Self::new(vec![1.0; dim], quad_order)
    }

    pub fn with_quad_order(&self, quad_order: usize) -> Result<Self> {
        Self::new(self.spectrum.to_vec(), quad_order)
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn sqrt_spectrum(&self) -> &Arc<[f64]> {
        &self.sqrt_spectrum
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    /// Tensor grid; rejected beyond [`MAX_TENSOR_DIM`].
    pub fn grid(&self) -> Result<Arc<QuadratureGrid>> {
        if self.dim() > MAX_TENSOR_DIM {
            return Err(Error::Unsupported(format!(
                "tensor quadrature limited to n ≤ {MAX_TENSOR_DIM}, got n = {}",
                self.dim()
            )));
        }
        Ok(self
            .grid
            .get_or_init(|| {
                let (t, w) = gauss_hermite_normal(self.quad_order);
                let axes: Vec<(Vec<f64>, Vec<f64>)> = self
                    .sqrt_spectrum
                    .iter()
                    .map(|s| (t.iter().map(|ti| ti * s).collect(), w.clone()))
                    .collect();
                Arc::new(QuadratureGrid {
                    rule: PointRule::tensor(&axes),
                    order: self.quad_order,
                })
            })
            .clone())
    }

    /// Tensor grid built from an arbitrary axis rule (scaled by `√λ_i`).
    pub fn grid_with(&self, axis: AxisRule) -> Result<PointRule> {
        if self.dim() > MAX_TENSOR_DIM {
            return Err(Error::Unsupported(format!(
                "tensor quadrature limited to n ≤ {MAX_TENSOR_DIM}, got n = {}",
                self.dim()
            )));
        }
        let (t, w) = axis.nodes();
        let axes: Vec<(Vec<f64>, Vec<f64>)> = self
            .sqrt_spectrum
            .iter()
            .map(|s| (t.iter().map(|ti| ti * s).collect(), w.clone()))
            .collect();
        Ok(PointRule::tensor(&axes))
    }

    pub fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// Cameron–Martin inner product of two vectors given in ambient coordinates.
    pub fn cm_inner(&self, h: &[f64], k: &[f64]) -> Result<f64> {
        self.check_dim(h.len())?;
        self.check_dim(k.len())?;
        Ok(h.iter()
            .zip(k)
            .zip(self.spectrum.iter())
            .map(|((a, b), l)| a * b / l)
            .sum())
    }

    /// Ambient vector → H-coordinates.
    pub fn to_h_coords(&self, ambient: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            ambient.iter().zip(self.sqrt_spectrum.iter()).map(|(a, s)| a / s),
        )
    }

    /// H-coordinates → ambient vector.
    pub fn to_ambient(&self, h: &DVector<f64>) -> Vec<f64> {
        h.iter().zip(self.sqrt_spectrum.iter()).map(|(a, s)| a * s).collect()
    }

    /// Standardized coordinates `z_i = ĥ_i(x)` of an ambient point.
    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.sqrt_spectrum.iter()).map(|(a, s)| a / s).collect()
    }

    pub fn poly(&self, p: Poly) -> CylFunction {
        CylFunction::from_poly(self.sqrt_spectrum.clone(), p)
    }

    pub fn constant(&self, c: f64) -> CylFunction {
        self.poly(Poly::constant(self.dim(), c))
    }

    /// `ĥ_i(x) = x_i/√λ_i` (zero-based `i`).
    pub fn h_hat(&self, i: usize) -> CylFunction {
        self.poly(Poly::variable(self.dim(), i))
    }

    /// The ambient coordinate `x_i = √λ_i ĥ_i`.
    pub fn ambient_coordinate(&self, i: usize) -> CylFunction {
        self.poly(Poly::variable(self.dim(), i).scale(self.sqrt_spectrum[i]))
    }

    /// `x ↦ Σ a_i x_i`.
    pub fn linear_functional(&self, a: &[f64]) -> Result<CylFunction> {
        self.check_dim(a.len())?;
        let p = Poly::from_terms(
            self.dim(),
            (0..self.dim()).map(|i| {
                let mut e = vec![0; self.dim()];
                e[i] = 1;
                (a[i] * self.sqrt_spectrum[i], e)
            }),
        );
        Ok(self.poly(p))
    }

    /// `‖x‖²_X = Σ x_i²`.
    pub fn x_norm_sq(&self) -> CylFunction {
        let p = Poly::from_terms(
            self.dim(),
            (0..self.dim()).map(|i| {
                let mut e = vec![0; self.dim()];
                e[i] = 2;
                (self.spectrum[i], e)
            }),
        );
        self.poly(p)
    }

    /// `‖x‖²_H / 2 = Σ ĥ_i²/2`.
    pub fn half_h_norm_sq(&self) -> CylFunction {
        let p = Poly::from_terms(
            self.dim(),
            (0..self.dim()).map(|i| {
                let mut e = vec![0; self.dim()];
                e[i] = 2;
                (0.5, e)
            }),
        );
        self.poly(p)
    }

    /// Tensor Hermite polynomial orthonormal in `L²(μ)`; `index[i]` is the degree in `ĥ_i`.
    pub fn hermite_fn(&self, index: &[u32]) -> Result<CylFunction> {
        self.check_dim(index.len())?;
        Ok(self.poly(Poly::hermite(index)))
    }

    pub fn compose(&self, f: &CylFunction, outer: ScalarMap) -> CylFunction {
        f.map(outer)
    }

    /// `∫ f dμ` on the tensor grid.
    pub fn integrate_mu(&self, f: &dyn ScalarField) -> Result<f64> {
        self.check_dim(f.dim())?;
        self.grid()?.rule.integrate(|x| f.value(x))
    }

    /// `∫ g dμ` for an arbitrary closure.
    pub fn integrate_mu_with(&self, g: impl FnMut(&[f64]) -> f64) -> Result<f64> {
        self.grid()?.rule.integrate(g)
    }

    /// Gaussian density of μ at a standardized point (density of `z`).
    pub fn standard_density(z: &[f64]) -> f64 {
        let r2: f64 = z.iter().map(|t| t * t).sum();
        (2.0 * std::f64::consts::PI).powf(-(z.len() as f64) / 2.0) * (-0.5 * r2).exp()
    }
}

/// Closed-form `E[x^k]` for `x ~ N(0, λ)`.
pub fn gaussian_moment(lambda: f64, k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let double_factorial: f64 = (1..k).step_by(2).map(|m| m as f64).product();
    double_factorial * lambda.powi((k / 2) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_models() {
        assert!(GaussianModel::new(vec![], 10).is_err());
        assert!(GaussianModel::new(vec![1.0, 0.0], 10).is_err());
        assert!(GaussianModel::new(vec![1.0], 1).is_err());
        let big = GaussianModel::standard(5, 3).unwrap();
        assert!(matches!(big.grid(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn total_weight_is_one() {
        let m = GaussianModel::new(vec![1.0, 2.5, 0.3], 12).unwrap();
        let g = m.grid().unwrap();
        assert!((g.rule.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integrate_mu_examples() {
        let m = GaussianModel::new(vec![2.0], DEFAULT_QUAD_ORDER).unwrap();
        assert!((m.integrate_mu(&m.constant(1.0)).unwrap() - 1.0).abs() < 1e-13);
        let h = m.h_hat(0);
        assert!((m.integrate_mu(&(&h * &h)).unwrap() - 1.0).abs() < 1e-12);
        let x4 = m.ambient_coordinate(0).powi(4);
        assert!((m.integrate_mu(&x4).unwrap() - 12.0).abs() < 1e-10);
    }

    #[test]
    fn non_finite_sample_is_an_error() {
        let m = GaussianModel::standard(1, 4).unwrap();
        let f = m.h_hat(0).map(ScalarMap::Powi(-1));
        // Gauss–Hermite with an even order never hits 0, so force a NaN instead.
        let bad = f.map(ScalarMap::Ln).map(ScalarMap::Ln);
        assert!(matches!(
            m.integrate_mu(&bad),
            Err(Error::NonIntegrableSample { .. })
        ));
    }

    #[test]
    fn cm_inner_examples() {
        let m = GaussianModel::new(vec![1.0, 4.0], 4).unwrap();
        let e1 = [1.0, 0.0];
        let e2 = [0.0, 2.0];
        assert!((m.cm_inner(&e1, &e1).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(m.cm_inner(&e1, &e2).unwrap(), 0.0);
        assert!((m.cm_inner(&[1.0, 1.0], &[1.0, 1.0]).unwrap() - 1.25).abs() < 1e-15);
        assert!(matches!(
            m.cm_inner(&[1.0], &e1),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
