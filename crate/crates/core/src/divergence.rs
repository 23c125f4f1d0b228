//! Cylindrical H-valued fields, the weighted divergence on a domain and the
//! boundary identities behind it.

use nalgebra::{DMatrix, DVector};

use crate::domain::{LevelSetDomain, Region};
use crate::error::{Error, Result};
use crate::function::{CylFunction, ScalarField};
use crate::gaussian::GaussianModel;
use crate::moreau::Weight;
use crate::nodes::PreparedRegion;
use crate::poly::Poly;
use crate::rng::Lcg64;

/// Relative tangency tolerance for fields on a domain.
pub const TANGENCY_TOL: f64 = 1e-8;

/// `Φ = Σ φ_i h_i` with `h_i = √λ_i e_i`; stored as one component per H-basis vector.
#[derive(Debug, Clone)]
pub struct CylVectorField {
    components: Vec<CylFunction>,
    tangent: bool,
}

impl CylVectorField {
    /// From `(φ, direction)` pairs with distinct directions.
    pub fn from_terms(model: &GaussianModel, terms: Vec<(CylFunction, usize)>) -> Result<Self> {
        let n = model.dim();
        let mut components: Vec<Option<CylFunction>> = vec![None; n];
        for (phi, i) in terms {
            model.check_dim(phi.dim())?;
            if i >= n {
                return Err(Error::InvalidParameter(format!("direction {i} out of range")));
            }
            if components[i].is_some() {
                return Err(Error::InvalidParameter(format!("direction {i} repeated")));
            }
            components[i] = Some(phi);
        }
        Ok(Self {
            components: components
                .into_iter()
                .map(|c| c.unwrap_or_else(|| model.constant(0.0)))
                .collect(),
            tangent: false,
        })
    }

    pub fn from_components(model: &GaussianModel, components: Vec<CylFunction>) -> Result<Self> {
        model.check_dim(components.len())?;
        Self::from_terms(model, components.into_iter().enumerate().map(|(i, c)| (c, i)).collect())
    }

    /// `∇_H u` as a field.
    pub fn gradient_of(model: &GaussianModel, u: &CylFunction) -> Result<Self> {
        Self::from_components(model, (0..model.dim()).map(|i| u.partial(i)).collect())
    }

    /// Verifies `⟨Φ, ∇_H G⟩_H = 0` on the boundary nodes of `d` and records the claim.
    pub fn claim_tangent(mut self, d: &LevelSetDomain) -> Result<Self> {
        let (defect, node) = self.tangency_defect(d)?;
        if defect > TANGENCY_TOL {
            return Err(Error::FieldNotTangent { defect, node });
        }
        self.tangent = true;
        Ok(self)
    }

    pub fn is_tangent(&self) -> bool {
        self.tangent
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[CylFunction] {
        &self.components
    }

    pub fn eval(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.components.iter().map(|c| c.value(x)))
    }

    /// Value and `∇_H Φ` with `J[(i, k)] = ∂_k φ_i`.
    pub fn eval_jacobian(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.dim();
        let mut v = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, n);
        for (i, c) in self.components.iter().enumerate() {
            let jet = c.jet(x);
            v[i] = jet.value;
            j.set_row(i, &jet.gradient.transpose());
        }
        (v, j)
    }

    /// Largest `|⟨Φ,∇G⟩_H| / (|∇G|_H (1 + |Φ|_H))` over boundary nodes, with its node index.
    pub fn tangency_defect(&self, d: &LevelSetDomain) -> Result<(f64, usize)> {
        let rule = d.boundary_rule()?;
        let mut worst = (0.0, 0);
        for (k, (x, _)) in rule.iter().enumerate() {
            let phi = self.eval(x);
            let g = d.g().gradient(x);
            let r = phi.dot(&g).abs() / (g.norm() * (1.0 + phi.norm()));
            if r > worst.0 {
                worst = (r, k);
            }
        }
        Ok(worst)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
            tangent: self.tangent && other.tangent,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.scale(s)).collect(),
            tangent: self.tangent,
        }
    }
}

/// The rotation field `Φ_{ij} = −ĥ_i h_j/√λ_j + ĥ_j h_i/√λ_i`, written in the
/// H-basis. It is tangent to the unit sphere only when `λ_i = λ_j`.
pub fn rotation_field(model: &GaussianModel, i: usize, j: usize) -> Result<CylVectorField> {
    let n = model.dim();
    if i >= n || j >= n || i == j {
        return Err(Error::InvalidParameter("rotation needs two distinct directions".into()));
    }
    let s = model.sqrt_spectrum();
    CylVectorField::from_terms(
        model,
        vec![
            (model.h_hat(j).scale(1.0 / s[i]), i),
            (model.h_hat(i).scale(-1.0 / s[j]), j),
        ],
    )
}

/// `ψ (∂_j G h_i − ∂_i G h_j)`, tangent to every level set of `G`.
pub fn tangent_field(d: &LevelSetDomain, i: usize, j: usize, psi: &CylFunction) -> Result<CylVectorField> {
    let g = d.g();
    let model = d.model();
    let mut comps = vec![model.constant(0.0); model.dim()];
    if i == j {
        return CylVectorField::from_components(model, comps)?.claim_tangent(d);
    }
    comps[i] = psi * &g.partial(j);
    comps[j] = -&(psi * &g.partial(i));
    CylVectorField::from_components(model, comps)?.claim_tangent(d)
}

/// Sum of `ψ_{ij}(∂_jG h_i − ∂_iG h_j)` over pairs `i < j` with random polynomial `ψ_{ij}`.
pub fn random_tangent_field(d: &LevelSetDomain, degree: u32, rng: &mut Lcg64) -> Result<CylVectorField> {
    let model = d.model();
    let n = model.dim();
    let mut field = CylVectorField::from_components(model, vec![model.constant(0.0); n])?.claim_tangent(d)?;
    for i in 0..n {
        for j in i + 1..n {
            let psi = model.poly(Poly::random(n, degree, rng));
            field = field.add(&tangent_field(d, i, j, &psi)?);
        }
    }
    Ok(field)
}

/// `div_{ν,Ω} Φ = Σ (∂_iφ_i − φ_i ∂_iU − φ_i ĥ_i)`; on a domain the field must be tangent.
pub fn divergence(phi: &CylVectorField, w: &Weight, d: Option<&LevelSetDomain>) -> Result<CylFunction> {
    let model_dim = phi.dim();
    if w.dim() != model_dim {
        return Err(Error::DimensionMismatch {
            expected: model_dim,
            got: w.dim(),
        });
    }
    if let Some(d) = d {
        let (defect, node) = phi.tangency_defect(d)?;
        if defect > TANGENCY_TOL {
            return Err(Error::FieldNotTangent { defect, node });
        }
    }
    let u = w.u();
    let n = model_dim;
    let sqrt = u.sqrt_spectrum().clone();
    let mut acc = CylFunction::from_poly(sqrt.clone(), Poly::zero(n));
    for (i, c) in phi.components.iter().enumerate() {
        if c.as_poly().is_some_and(Poly::is_zero) {
            continue;
        }
        let hat = CylFunction::from_poly(sqrt.clone(), Poly::variable(n, i));
        let mut term = &c.partial(i) - &(c * &hat);
        if !w.is_zero() {
            term = &term - &(c * &u.partial(i));
        }
        acc = &acc + &term;
    }
    Ok(acc)
}

/// Signed residuals `∫_Ω (∂_kφ − φ∂_kU − φĥ_k) dν − ∫_{G=0} φ ∂_kG/|∇_HG|_H e^{−U} dρ`
/// for every direction `k`.
pub fn ibp_residuals(phi: &dyn ScalarField, prep: &PreparedRegion<'_>) -> Result<Vec<f64>> {
    let n = prep.model().dim();
    let bulk = prep.bulk.integrate_many(n, |k, out| {
        let j = phi.jet(prep.bulk.point(k));
        let (gu, z) = (prep.bulk.grad_u(k), prep.bulk.z(k));
        for i in 0..n {
            out[i] = j.gradient[i] - j.value * (gu[i] + z[i]);
        }
    })?;
    let b = prep.boundary()?;
    let boundary = b.integrate_many(n, |k, out| {
        let v = phi.value(b.point(k));
        let nu = b.normal(k).expect("boundary normals");
        for i in 0..n {
            out[i] = v * nu[i];
        }
    })?;
    Ok(bulk.iter().zip(&boundary).map(|(a, c)| a - c).collect())
}

/// Single-direction form of [`ibp_residuals`].
pub fn ibp_residual(phi: &dyn ScalarField, k: usize, w: &Weight, d: &LevelSetDomain) -> Result<f64> {
    if k >= d.model().dim() {
        return Err(Error::InvalidParameter(format!("direction {k} out of range")));
    }
    let prep = Region::Domain(d).prepare(w)?;
    Ok(ibp_residuals(phi, &prep)?[k])
}

/// Largest `|⟨∇²_HG Φ, Φ⟩_H + ⟨(∇_HΦ)Φ, ∇_HG⟩_H|` over boundary nodes.
pub fn boundary_hessian_identity(phi: &CylVectorField, d: &LevelSetDomain) -> Result<f64> {
    let (defect, node) = phi.tangency_defect(d)?;
    if defect > TANGENCY_TOL {
        return Err(Error::FieldNotTangent { defect, node });
    }
    let rule = d.boundary_rule()?;
    let mut worst: f64 = 0.0;
    for (x, _) in rule.iter() {
        let gj = d.g().jet(x);
        let (v, jac) = phi.eval_jacobian(x);
        let lhs = (&gj.hessian * &v).dot(&v);
        let rhs = (&jac * &v).dot(&gj.gradient);
        worst = worst.max((lhs + rhs).abs());
    }
    Ok(worst)
}

/// Both sides of the identity for `∫(∂_hf − f∂_hU − fĥ_h)(∂_kg − g∂_kU − gĥ_k) dν`
/// over the prepared region (boundary terms included on a domain); returns `(lhs, rhs)`.
pub fn bilinear_identity_sides(
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    h: usize,
    k: usize,
    prep: &PreparedRegion<'_>,
) -> Result<(f64, f64)> {
    let n = prep.model().dim();
    if h >= n || k >= n {
        return Err(Error::InvalidParameter("direction out of range".into()));
    }
    let delta = if h == k { 1.0 } else { 0.0 };
    let nodes = &prep.bulk;
    let v = nodes.integrate_many(2, |m, out| {
        let x = nodes.point(m);
        let (gu, z, hu) = (nodes.grad_u(m), nodes.z(m), nodes.hess_u(m));
        let fj = f.jet(x);
        let gj = g.jet(x);
        let af = fj.gradient[h] - fj.value * (gu[h] + z[h]);
        let ag = gj.gradient[k] - gj.value * (gu[k] + z[k]);
        out[0] = af * ag;
        out[1] = fj.value * gj.value * (hu[h * n + k] + delta) + fj.gradient[k] * gj.gradient[h];
    })?;
    let mut rhs = v[1];
    if let Some(b) = prep.boundary.as_ref().filter(|_| prep.domain().is_some()) {
        rhs += b.integrate(|m| {
            let x = b.point(m);
            let (gu, z) = (b.grad_u(m), b.z(m));
            let nu = b.normal(m).expect("boundary normals");
            let fv = f.value(x);
            let gj = g.jet(x);
            let ag = gj.gradient[k] - gj.value * (gu[k] + z[k]);
            fv * ag * nu[h] - fv * gj.gradient[h] * nu[k]
        })?;
    } else if prep.domain().is_some() {
        return Err(Error::NoSurfaceRule);
    }
    Ok((v[0], rhs))
}

pub fn bilinear_identity_residual(
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    h: usize,
    k: usize,
    prep: &PreparedRegion<'_>,
) -> Result<f64> {
    let (lhs, rhs) = bilinear_identity_sides(f, g, h, k, prep)?;
    Ok(lhs - rhs)
}

/// `∫_Ω ⟨∇_H f, Φ⟩_H dν + ∫_Ω f div Φ dν`; `prep` must be prepared with `w`.
pub fn adjointness_residual(
    phi: &CylVectorField,
    f: &dyn ScalarField,
    w: &Weight,
    prep: &PreparedRegion<'_>,
) -> Result<f64> {
    let div = divergence(phi, w, prep.domain())?;
    let nodes = &prep.bulk;
    nodes.integrate(|m| {
        let x = nodes.point(m);
        let fj = f.jet(x);
        fj.gradient.dot(&phi.eval(x)) + fj.value * div.value(x)
    })
}

/// `‖Φ‖²_{Z¹²}`: `‖Φ‖² + ‖∇Φ‖²_HS + ∫⟨∇²UΦ,Φ⟩dν + ∫_{G=0}⟨∇²GΦ,Φ⟩ e^{−U}/|∇G| dρ`.
pub fn z_norm_sq(phi: &CylVectorField, prep: &PreparedRegion<'_>) -> Result<f64> {
    let n = prep.model().dim();
    let nodes = &prep.bulk;
    let bulk = nodes.integrate(|m| {
        let (v, jac) = phi.eval_jacobian(nodes.point(m));
        let hu = nodes.hess_u(m);
        let mut form = 0.0;
        for i in 0..n {
            for j in 0..n {
                form += hu[i * n + j] * v[i] * v[j];
            }
        }
        v.norm_squared() + jac.norm_squared() + form
    })?;
    let boundary = match prep.domain() {
        Some(d) => {
            let b = prep.boundary()?;
            b.integrate(|m| {
                let x = b.point(m);
                let gj = d.g().jet(x);
                let v = phi.eval(x);
                (&gj.hessian * &v).dot(&v) / gj.gradient.norm()
            })?
        }
        None => 0.0,
    };
    Ok(bulk + boundary)
}

/// `‖div Φ‖²_{L²(Ω,ν)}`; `prep` must be prepared with `w`.
pub fn divergence_norm_sq(phi: &CylVectorField, w: &Weight, prep: &PreparedRegion<'_>) -> Result<f64> {
    let div = divergence(phi, w, prep.domain())?;
    let nodes = &prep.bulk;
    nodes.integrate(|m| {
        let v = div.value(nodes.point(m));
        v * v
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divergence_examples() {
        let m = GaussianModel::standard(2, 10).unwrap();
        let w = Weight::zero(&m);
        let e1 = CylVectorField::from_terms(&m, vec![(m.constant(1.0), 0)]).unwrap();
        let d = divergence(&e1, &w, None).unwrap();
        assert!(d.as_poly().unwrap().max_coeff_diff(&Poly::variable(2, 0).scale(-1.0)) < 1e-15);
        let f = CylVectorField::from_terms(&m, vec![(m.h_hat(0), 0)]).unwrap();
        let d = divergence(&f, &w, None).unwrap();
        let expected = Poly::constant(2, 1.0).sub(&Poly::variable(2, 0).powi(2));
        assert!(d.as_poly().unwrap().max_coeff_diff(&expected) < 1e-15);
    }

    #[test]
    fn rotation_field_on_isotropic_ball() {
        let m = GaussianModel::standard(2, 10).unwrap();
        let ball = LevelSetDomain::unit_ball(&m).unwrap();
        let rot = rotation_field(&m, 0, 1).unwrap().claim_tangent(&ball).unwrap();
        let div = divergence(&rot, &Weight::zero(&m), Some(&ball)).unwrap();
        assert!(div.as_poly().unwrap().max_coeff_diff(&Poly::zero(2)) < 1e-15);
        assert!(boundary_hessian_identity(&rot, &ball).unwrap() < 1e-14);
    }

    #[test]
    fn rotation_field_is_not_tangent_for_anisotropic_spectrum() {
        let m = GaussianModel::new(vec![1.0, 4.0], 10).unwrap();
        let ball = LevelSetDomain::unit_ball(&m).unwrap();
        let rot = rotation_field(&m, 0, 1).unwrap();
        assert!(matches!(
            rot.claim_tangent(&ball),
            Err(Error::FieldNotTangent { .. })
        ));
    }

    #[test]
    fn ibp_on_half_line_with_constant() {
        let m = GaussianModel::standard(1, 20).unwrap();
        let d = LevelSetDomain::half_space(&m, &[1.0], 0.0).unwrap();
        let r = ibp_residual(&m.constant(1.0), 0, &Weight::zero(&m), &d).unwrap();
        assert!(r.abs() < 1e-14);
        assert_eq!(ibp_residual(&m.constant(0.0), 0, &Weight::zero(&m), &d).unwrap(), 0.0);
    }

    #[test]
    fn bilinear_constant_case() {
        let m = GaussianModel::standard(2, 10).unwrap();
        let one = m.constant(1.0);
        let prep = Region::Whole(&m).prepare(&Weight::zero(&m)).unwrap();
        let (lhs, rhs) = bilinear_identity_sides(&one, &one, 1, 1, &prep).unwrap();
        assert!((lhs - 1.0).abs() < 1e-13 && (rhs - 1.0).abs() < 1e-13);
    }
}
