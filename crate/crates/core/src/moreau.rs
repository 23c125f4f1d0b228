//! Convex weights, the Moreau–Yosida approximation along H and the penalized
//! weight `V_α = U_α + d_H²(·, Ω)/(2α)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::domain::{convexity_defect, LevelSetDomain};
use crate::error::{Error, Result};
use crate::function::{CylFunction, Jet, ScalarField};
use crate::gaussian::GaussianModel;
use crate::poly::Poly;
use crate::rng::Lcg64;

pub const PROX_MAX_ITER: usize = 500;
pub const PROX_TOL: f64 = 1e-9;
/// Step (in H-units) for the finite-difference Hessian of `V_α`.
pub const PENALTY_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightPreset {
    /// `U ≡ 0`.
    Zero,
    /// `U(x) = Φ(‖x‖²_X)` with `Φ(s) = s²/2`.
    RadialQuartic,
    /// `U(x) = Σ c_i x_i`.
    Linear,
}

impl WeightPreset {
    pub fn name(self) -> &'static str {
        match self {
            WeightPreset::Zero => "zero",
            WeightPreset::RadialQuartic => "radial_quartic",
            WeightPreset::Linear => "linear",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "zero" => Ok(WeightPreset::Zero),
            "radial_quartic" => Ok(WeightPreset::RadialQuartic),
            "linear" => Ok(WeightPreset::Linear),
            other => Err(Error::InvalidParameter(format!("unknown weight preset `{other}`"))),
        }
    }
}

/// A convex weight `U`; the reference measure is `ν = e^{−U}μ`.
#[derive(Debug, Clone)]
pub struct Weight {
    u: CylFunction,
    name: String,
    is_zero: bool,
    gradient_lipschitz: Option<f64>,
    support_radius: Option<f64>,
}

/// Ambient radius beyond which `e^{−‖x‖⁴/2}` is below 1e−32.
pub const QUARTIC_SUPPORT_RADIUS: f64 = 3.5;

impl Weight {
    pub fn zero(model: &GaussianModel) -> Self {
        Self {
            u: model.constant(0.0),
            name: "zero".into(),
            is_zero: true,
            gradient_lipschitz: Some(0.0),
            support_radius: None,
        }
    }

    /// `U = ‖x‖⁴_X / 2`.
    pub fn radial_quartic(model: &GaussianModel) -> Self {
        let s = model.x_norm_sq();
        Self {
            u: (&s * &s).scale(0.5),
            name: "radial_quartic".into(),
            is_zero: false,
            gradient_lipschitz: None,
            support_radius: Some(QUARTIC_SUPPORT_RADIUS),
        }
    }

    /// `U = Σ c_i x_i` (ambient covector `c`).
    pub fn linear(model: &GaussianModel, c: &[f64]) -> Result<Self> {
        Ok(Self {
            u: model.linear_functional(c)?,
            name: "linear".into(),
            is_zero: c.iter().all(|v| *v == 0.0),
            gradient_lipschitz: Some(0.0),
            support_radius: None,
        })
    }

    /// Wraps a convex cylindrical function; convexity is checked by [`Weight::convexity_defect`].
    pub fn custom(u: CylFunction, name: &str) -> Self {
        let is_zero = u.as_poly().is_some_and(Poly::is_zero);
        Self {
            u,
            name: name.into(),
            is_zero,
            gradient_lipschitz: None,
            support_radius: None,
        }
    }

    /// Preset by name. `linear` takes its covector from `params` (default all `0.5`).
    pub fn preset(model: &GaussianModel, preset: WeightPreset, params: Option<&[f64]>) -> Result<Self> {
        match preset {
            WeightPreset::Zero => Ok(Self::zero(model)),
            WeightPreset::RadialQuartic => Ok(Self::radial_quartic(model)),
            WeightPreset::Linear => {
                let default = vec![0.5; model.dim()];
                Self::linear(model, params.unwrap_or(&default))
            }
        }
    }

    pub fn u(&self) -> &CylFunction {
        &self.u
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    pub fn gradient_lipschitz(&self) -> Option<f64> {
        self.gradient_lipschitz
    }

    /// Ambient radius outside which `e^{−U}` is negligible, when known.
    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    /// `e^{−U(x)}`.
    pub fn density(&self, x: &[f64]) -> f64 {
        if self.is_zero {
            1.0
        } else {
            (-self.u.value(x)).exp()
        }
    }

    pub fn convexity_defect(&self, rng: &mut Lcg64, pairs: usize) -> f64 {
        convexity_defect(&self.u, self.u.sqrt_spectrum(), rng, pairs)
    }

    /// Most negative `⟨∇²_H U(x) h, h⟩_H` over random unit `h` and points `x`.
    pub fn min_hessian_form(&self, rng: &mut Lcg64, samples: usize) -> f64 {
        let n = self.u.dim();
        let s = self.u.sqrt_spectrum().clone();
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let x: Vec<f64> = (0..n).map(|i| 3.0 * rng.symmetric() * s[i]).collect();
            let h = DVector::from_iterator(n, (0..n).map(|_| rng.symmetric()));
            let h = &h / h.norm().max(1e-300);
            worst = worst.min((self.u.hessian(&x) * &h).dot(&h));
        }
        worst
    }
}

impl ScalarField for Weight {
    fn dim(&self) -> usize {
        self.u.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.u.value(x)
    }
    fn jet(&self, x: &[f64]) -> Jet {
        self.u.jet(x)
    }
}

#[derive(Debug, Clone)]
pub struct ProxResult {
    /// `P(x, α)` in H-coordinates.
    pub p: DVector<f64>,
    /// `f_α(x)`.
    pub value: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
}

fn shifted(x: &[f64], h: &DVector<f64>, sqrt_spectrum: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(h.iter())
        .zip(sqrt_spectrum)
        .map(|((xi, hi), s)| xi + hi * s)
        .collect()
}

/// Minimizes `h ↦ f(x+h) + |h|²_H/(2α)` by damped Newton.
pub fn prox(f: &dyn ScalarField, sqrt_spectrum: &[f64], x: &[f64], alpha: f64) -> Result<ProxResult> {
    let n = x.len();
    if f.dim() != n || sqrt_spectrum.len() != n {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: n,
        });
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("α must be positive, got {alpha}")));
    }
    let objective = |h: &DVector<f64>| f.value(&shifted(x, h, sqrt_spectrum)) + h.norm_squared() / (2.0 * alpha);
    let mut h = DVector::zeros(n);
    let mut fh = objective(&h);
    if !fh.is_finite() {
        return Err(Error::InvalidParameter("f is not finite at x".into()));
    }
    let mut residual = f64::INFINITY;
    for it in 0..PROX_MAX_ITER {
        let jet = f.jet(&shifted(x, &h, sqrt_spectrum));
        let grad = &jet.gradient + &h / alpha;
        residual = grad.norm();
        if residual <= PROX_TOL * 1e-3 {
            return Ok(ProxResult {
                value: fh,
                p: h,
                iterations: it,
                kkt_residual: residual,
            });
        }
        let a = &jet.hessian;
        let scale = 1.0 + a.amax();
        let hess = a + DMatrix::identity(n, n) / alpha;
        let dir = match hess.clone().cholesky() {
            Some(ch) => -ch.solve(&grad),
            None => -grad.clone(),
        };
        let curvature = (a * &dir).dot(&dir);
        if curvature < -1e-8 * scale * dir.norm_squared() {
            return Err(Error::ConvexityViolated { curvature });
        }
        let slope = grad.dot(&dir);
        if -slope <= 1e-10 * (1.0 + fh.abs()) {
            // the decrease is at rounding level: plain Newton step
            h += &dir;
            fh = objective(&h);
            continue;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &h + &dir * t;
            let fc = objective(&cand);
            if fc <= fh + 1e-4 * t * slope {
                h = cand;
                fh = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let jet = f.jet(&shifted(x, &h, sqrt_spectrum));
    let final_res = (&jet.gradient + &h / alpha).norm();
    residual = residual.min(final_res);
    if final_res <= PROX_TOL {
        return Ok(ProxResult {
            value: fh,
            p: h,
            iterations: PROX_MAX_ITER,
            kkt_residual: final_res,
        });
    }
    Err(Error::ProxNonConvergent {
        iterations: PROX_MAX_ITER,
        residual,
    })
}

/// `∇_H f_α = −P(x,α)/α`.
pub fn my_gradient(prox: &ProxResult, alpha: f64) -> DVector<f64> {
    -&prox.p / alpha
}

/// `∇²_H f_α(x) = (I + αA)⁻¹A` with `A = ∇²_H f(x + P)`.
pub fn my_hessian(
    f: &dyn ScalarField,
    sqrt_spectrum: &[f64],
    x: &[f64],
    alpha: f64,
    prox: &ProxResult,
) -> Result<DMatrix<f64>> {
    let n = x.len();
    let a = f.hessian(&shifted(x, &prox.p, sqrt_spectrum));
    let m = DMatrix::identity(n, n) + &a * alpha;
    let lu = m.lu();
    if !lu.is_invertible() {
        return Err(Error::HessianSystemSingular);
    }
    let sol = lu.solve(&a).ok_or(Error::HessianSystemSingular)?;
    Ok((&sol + sol.transpose()) * 0.5)
}

/// The envelope `f_α` as a scalar field. Failed prox solves evaluate to NaN.
#[derive(Clone)]
pub struct MoreauEnvelope {
    f: Arc<dyn ScalarField>,
    sqrt_spectrum: Arc<[f64]>,
    alpha: f64,
}

impl MoreauEnvelope {
    pub fn new(f: Arc<dyn ScalarField>, sqrt_spectrum: Arc<[f64]>, alpha: f64) -> Self {
        Self {
            f,
            sqrt_spectrum,
            alpha,
        }
    }

    pub fn prox(&self, x: &[f64]) -> Result<ProxResult> {
        prox(self.f.as_ref(), &self.sqrt_spectrum, x, self.alpha)
    }

    pub fn try_jet(&self, x: &[f64]) -> Result<Jet> {
        let p = self.prox(x)?;
        let hessian = my_hessian(self.f.as_ref(), &self.sqrt_spectrum, x, self.alpha, &p)?;
        Ok(Jet {
            value: p.value,
            gradient: my_gradient(&p, self.alpha),
            hessian,
        })
    }
}

impl ScalarField for MoreauEnvelope {
    fn dim(&self) -> usize {
        self.f.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.prox(x).map_or(f64::NAN, |p| p.value)
    }
    fn jet(&self, x: &[f64]) -> Jet {
        self.try_jet(x).unwrap_or_else(|_| {
            let mut j = Jet::zeros(x.len());
            j.value = f64::NAN;
            j
        })
    }
}

/// `V_α = U_α + d_H²(·,Ω)/(2α)` with `∇_H V_α = −P/α + h*/α`.
#[derive(Clone)]
pub struct PenalizedWeight {
    alpha: f64,
    weight: Weight,
    domain: LevelSetDomain,
    envelope: MoreauEnvelope,
}

impl PenalizedWeight {
    pub fn new(weight: &Weight, domain: &LevelSetDomain, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("α must lie in (0, 1], got {alpha}")));
        }
        domain.model().check_dim(weight.dim())?;
        Ok(Self {
            alpha,
            envelope: MoreauEnvelope::new(
                Arc::new(weight.u().clone()),
                weight.u().sqrt_spectrum().clone(),
                alpha,
            ),
            weight: weight.clone(),
            domain: domain.clone(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn domain(&self) -> &LevelSetDomain {
        &self.domain
    }

    /// `U_α(x)`.
    pub fn envelope_value(&self, x: &[f64]) -> Result<f64> {
        if self.weight.is_zero() {
            return Ok(0.0);
        }
        Ok(self.envelope.prox(x)?.value)
    }

    pub fn try_value(&self, x: &[f64]) -> Result<f64> {
        let d = self.domain.dh_distance(x)?;
        Ok(self.envelope_value(x)? + d * d / (2.0 * self.alpha))
    }

    pub fn try_gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        let proj = self.domain.dh_project(x)?;
        let mut g = &proj.h / self.alpha;
        if !self.weight.is_zero() {
            g += my_gradient(&self.envelope.prox(x)?, self.alpha);
        }
        Ok(g)
    }

    /// `e^{−V_α(x)}`.
    pub fn density(&self, x: &[f64]) -> f64 {
        self.try_value(x).map_or(f64::NAN, |v| (-v).exp())
    }
}

impl ScalarField for PenalizedWeight {
    fn dim(&self) -> usize {
        self.weight.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.try_value(x).unwrap_or(f64::NAN)
    }

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        self.try_gradient(x)
            .unwrap_or_else(|_| DVector::from_element(x.len(), f64::NAN))
    }

    fn jet(&self, x: &[f64]) -> Jet {
        let n = x.len();
        let s = self.weight.u().sqrt_spectrum().clone();
        let mut hessian = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += PENALTY_FD_STEP * s[j];
            xm[j] -= PENALTY_FD_STEP * s[j];
            let d = (self.gradient(&xp) - self.gradient(&xm)) / (2.0 * PENALTY_FD_STEP);
            hessian.set_column(j, &d);
        }
        Jet {
            value: self.value(x),
            gradient: self.gradient(x),
            hessian: (&hessian + hessian.transpose()) * 0.5,
        }
    }
}

/// Random smooth convex polynomial: `½zᵀMz + Σ w_k (v_k·z)⁴ + b·z` with `M ⪰ 0.1 I`.
pub fn random_convex_poly(model: &GaussianModel, rng: &mut Lcg64) -> CylFunction {
    let n = model.dim();
    let b = DMatrix::from_fn(n, n, |_, _| rng.symmetric());
    let m = b.transpose() * &b + DMatrix::identity(n, n) * 0.1;
    let mut p = Poly::zero(n);
    for i in 0..n {
        for j in 0..n {
            let mut e = vec![0; n];
            e[i] += 1;
            e[j] += 1;
            p = p.add(&Poly::monomial(n, e, 0.5 * m[(i, j)]));
        }
        p = p.add(&Poly::variable(n, i).scale(rng.symmetric()));
    }
    for _ in 0..2 {
        let w = 0.1 * (rng.next_f64() + 0.1);
        let v: Vec<f64> = (0..n).map(|_| rng.symmetric()).collect();
        let lin = Poly::from_terms(
            n,
            (0..n).map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                (v[i], e)
            }),
        );
        p = p.add(&lin.powi(4).scale(w));
    }
    model.poly(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_prox_closed_form() {
        let m = GaussianModel::new(vec![1.0, 2.0], 8).unwrap();
        let f = m.half_h_norm_sq();
        let x = [0.7, -1.3];
        let z = m.standardize(&x);
        for alpha in [0.1, 1.0, 3.0] {
            let p = prox(&f, m.sqrt_spectrum(), &x, alpha).unwrap();
            for i in 0..2 {
                assert!((p.p[i] + alpha * z[i] / (1.0 + alpha)).abs() < 1e-12);
            }
            let zn2: f64 = z.iter().map(|v| v * v).sum();
            assert!((p.value - zn2 / (2.0 * (1.0 + alpha))).abs() < 1e-12);
            let h = my_hessian(&f, m.sqrt_spectrum(), &x, alpha, &p).unwrap();
            assert!((h - DMatrix::identity(2, 2) / (1.0 + alpha)).amax() < 1e-12);
        }
    }

    #[test]
    fn linear_prox_closed_form() {
        let m = GaussianModel::new(vec![1.0, 4.0], 8).unwrap();
        let c = [0.3, -0.5];
        let f = m.linear_functional(&c).unwrap();
        let x = [1.0, 2.0];
        let alpha = 0.5;
        let p = prox(&f, m.sqrt_spectrum(), &x, alpha).unwrap();
        // h_{x*} in H-coordinates is (√λ_i c_i); |h|² = Σλ_i c_i²
        let h_norm2 = 0.09 + 4.0 * 0.25;
        assert!((p.p[0] + alpha * 0.3).abs() < 1e-12);
        assert!((p.p[1] + alpha * 2.0 * -0.5).abs() < 1e-12);
        assert!((p.value - (f.value(&x) - alpha * h_norm2 / 2.0)).abs() < 1e-12);
        assert!(my_hessian(&f, m.sqrt_spectrum(), &x, alpha, &p).unwrap().amax() < 1e-15);
    }

    #[test]
    fn nonconvex_input_is_detected() {
        let m = GaussianModel::standard(1, 8).unwrap();
        let f = m.h_hat(0).powi(2).scale(-1.0);
        assert!(matches!(
            prox(&f, m.sqrt_spectrum(), &[0.5], 2.0),
            Err(Error::ConvexityViolated { .. })
        ));
    }

    #[test]
    fn penalized_weight_examples() {
        let m = GaussianModel::standard(1, 8).unwrap();
        let d = LevelSetDomain::half_space(&m, &[1.0], 0.0).unwrap();
        let w = Weight::zero(&m);
        let v = PenalizedWeight::new(&w, &d, 0.25).unwrap();
        assert_eq!(v.value(&[-0.3]), 0.0);
        assert!((v.value(&[1.0]) - 2.0).abs() < 1e-15);
        assert!((v.gradient(&[1.0])[0] - 4.0).abs() < 1e-15);
        assert!(PenalizedWeight::new(&w, &d, 1.5).is_err());
    }

    #[test]
    fn presets_by_name() {
        for p in [WeightPreset::Zero, WeightPreset::RadialQuartic, WeightPreset::Linear] {
            assert_eq!(WeightPreset::from_name(p.name()).unwrap(), p);
        }
        assert!(WeightPreset::from_name("cubic").is_err());
    }
}
