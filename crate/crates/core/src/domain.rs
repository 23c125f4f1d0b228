//! Level-set domains `Ω = {G ≤ 0}`, their Gaussian surface measure, traces and
//! the distance along H.
//!
//! The surface measure `ρ` is the standard Gaussian density of the
//! standardized coordinates `z` times the Hausdorff measure of the boundary
//! measured in `z`, i.e. in the Cameron–Martin metric. For an isotropic
//! spectrum this is the ambient Hausdorff measure times the density of μ.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{CylFunction, ScalarField};
use crate::gaussian::GaussianModel;
use crate::quadrature::{gauss_legendre, gaussian_density, AxisRule, PointRule};
use crate::rng::Lcg64;

pub const CIRCLE_NODES: usize = 256;
pub const SPHERE_POLAR_NODES: usize = 32;
pub const SPHERE_AZIMUTH_NODES: usize = 64;
/// Gauss–Legendre points per panel in the normal coordinate of a half-space.
pub const NORMAL_PANEL_ORDER: usize = 20;
pub const PROJECTION_MAX_ITER: usize = 200;
pub const PROJECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    /// `Σ a_i x_i ≤ r` (ambient covector `a`).
    HalfSpace { a: Vec<f64>, r: f64 },
    /// `Σ x_i² ≤ 1`.
    UnitBall,
    Custom,
}

/// H-orthonormal frame adapted to a half-space. The first frame vector is the
/// unit normal `h_a/|h_a|_H` where `h_a = Q a`; the frame coordinate `ξ₁`
/// equals `a·x/|h_a|_H`, so the boundary sits at `ξ₁ = offset`.
#[derive(Debug, Clone)]
pub struct HalfSpaceFrame {
    pub a: Vec<f64>,
    pub r: f64,
    pub h_a_norm: f64,
    pub offset: f64,
    /// Columns are the frame vectors in H-coordinates.
    pub basis: DMatrix<f64>,
    sqrt_spectrum: Vec<f64>,
}

impl HalfSpaceFrame {
    pub fn new(model: &GaussianModel, a: &[f64], r: f64) -> Result<Self> {
        model.check_dim(a.len())?;
        let n = a.len();
        let s = model.sqrt_spectrum();
        let normal = DVector::from_iterator(n, a.iter().zip(s.iter()).map(|(ai, si)| ai * si));
        let h_a_norm = normal.norm();
        if !(h_a_norm > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(
                "half-space needs a nonzero covector and a finite offset".into(),
            ));
        }
        let mut cols: Vec<DVector<f64>> = vec![normal / h_a_norm];
        for k in 0..n {
            if cols.len() == n {
                break;
            }
            let mut v = DVector::zeros(n);
            v[k] = 1.0;
            for c in &cols {
                let p = c.dot(&v);
                v -= c * p;
            }
            for c in &cols {
                let p = c.dot(&v);
                v -= c * p;
            }
            let nv = v.norm();
            if nv > 1e-8 {
                cols.push(v / nv);
            }
        }
        Ok(Self {
            a: a.to_vec(),
            r,
            h_a_norm,
            offset: r / h_a_norm,
            basis: DMatrix::from_columns(&cols),
            sqrt_spectrum: s.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// Unit normal in H-coordinates.
    pub fn normal(&self) -> DVector<f64> {
        self.basis.column(0).into_owned()
    }

    /// `h_a = Q a` in ambient coordinates.
    pub fn h_a_ambient(&self) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.sqrt_spectrum)
            .map(|(ai, s)| ai * s * s)
            .collect()
    }

    pub fn to_ambient(&self, xi: &[f64]) -> Vec<f64> {
        let z = &self.basis * DVector::from_column_slice(xi);
        z.iter().zip(&self.sqrt_spectrum).map(|(zi, s)| zi * s).collect()
    }

    pub fn to_frame(&self, x: &[f64]) -> Vec<f64> {
        let z = DVector::from_iterator(
            x.len(),
            x.iter().zip(&self.sqrt_spectrum).map(|(xi, s)| xi / s),
        );
        (self.basis.transpose() * z).iter().copied().collect()
    }

    /// Normal coordinate `ξ₁ = a·x/|h_a|_H`.
    pub fn normal_coordinate(&self, x: &[f64]) -> f64 {
        self.a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() / self.h_a_norm
    }

    /// μ-weighted rule on `{ξ₁ ≤ offset}` (or `{ξ₁ ≥ offset}` when `below` is false).
    pub fn bulk_rule(&self, below: bool, axis: AxisRule, normal_order: usize) -> PointRule {
        let normal = if below {
            axis.below(self.offset, normal_order)
        } else {
            axis.above(self.offset, normal_order)
        };
        let tangential = axis.nodes();
        let mut axes = vec![normal];
        axes.extend((1..self.dim()).map(|_| tangential.clone()));
        PointRule::tensor(&axes).map_points(self.dim(), |xi| self.to_ambient(xi))
    }

    /// ρ-weighted rule on the hyperplane `ξ₁ = offset`.
    pub fn surface_rule(&self, axis: AxisRule) -> PointRule {
        let tangential = axis.nodes();
        let mut axes = vec![(vec![self.offset], vec![gaussian_density(self.offset)])];
        axes.extend((1..self.dim()).map(|_| tangential.clone()));
        PointRule::tensor(&axes).map_points(self.dim(), |xi| self.to_ambient(xi))
    }
}

/// Result of the H-projection onto a convex domain.
#[derive(Debug, Clone)]
pub struct Projection {
    /// `h*` in H-coordinates; `x − h*` is the nearest point of Ω along H.
    pub h: DVector<f64>,
    pub distance: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
}

#[derive(Debug, Clone)]
pub struct LevelSetDomain {
    model: GaussianModel,
    kind: DomainKind,
    g: CylFunction,
    frame: Option<HalfSpaceFrame>,
    boundary: Option<PointRule>,
    bulk: Option<PointRule>,
}

impl LevelSetDomain {
    pub fn half_space(model: &GaussianModel, a: &[f64], r: f64) -> Result<Self> {
        let frame = HalfSpaceFrame::new(model, a, r)?;
        let g = &model.linear_functional(a)? - &model.constant(r);
        let axis = AxisRule::Hermite(model.quad_order());
        Ok(Self {
            boundary: Some(frame.surface_rule(axis)),
            bulk: Some(frame.bulk_rule(true, axis, NORMAL_PANEL_ORDER)),
            model: model.clone(),
            kind: DomainKind::HalfSpace { a: a.to_vec(), r },
            g,
            frame: Some(frame),
        })
    }

    /// `{Σ x_i² ≤ 1}`; surface and bulk rules exist for n ≤ 3.
    pub fn unit_ball(model: &GaussianModel) -> Result<Self> {
        let g = &model.x_norm_sq() - &model.constant(1.0);
        let (boundary, bulk) = match model.dim() {
            1..=3 => {
                let (b, v) = ball_rules(model);
                (Some(b), Some(v))
            }
            _ => (None, None),
        };
        Ok(Self {
            model: model.clone(),
            kind: DomainKind::UnitBall,
            g,
            frame: None,
            boundary,
            bulk,
        })
    }

    /// A domain given only by `G`; no quadrature rules are attached.
    pub fn custom(model: &GaussianModel, g: CylFunction) -> Result<Self> {
        model.check_dim(g.dim())?;
        Ok(Self {
            model: model.clone(),
            kind: DomainKind::Custom,
            g,
            frame: None,
            boundary: None,
            bulk: None,
        })
    }

    pub fn model(&self) -> &GaussianModel {
        &self.model
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn g(&self) -> &CylFunction {
        &self.g
    }

    pub fn frame(&self) -> Option<&HalfSpaceFrame> {
        self.frame.as_ref()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.g.value(x) <= 0.0
    }

    pub fn boundary_rule(&self) -> Result<&PointRule> {
        self.boundary.as_ref().ok_or(Error::NoSurfaceRule)
    }

    /// μ-weighted rule on Ω.
    pub fn bulk_rule(&self) -> Result<&PointRule> {
        self.bulk.as_ref().ok_or_else(|| {
            Error::Unsupported("no bulk quadrature for this domain".into())
        })
    }

    /// μ-weighted rule on the complement `{G ≥ 0}` (half-spaces only).
    pub fn complement_rule(&self) -> Result<PointRule> {
        let frame = self
            .frame
            .as_ref()
            .ok_or_else(|| Error::Unsupported("complement rule needs a half-space".into()))?;
        Ok(frame.bulk_rule(false, AxisRule::Hermite(self.model.quad_order()), NORMAL_PANEL_ORDER))
    }

    /// Bulk and boundary rules built from `axis` (half-spaces); other domains keep theirs.
    pub fn rules_with(&self, axis: AxisRule) -> Result<(PointRule, PointRule)> {
        match &self.frame {
            Some(frame) => Ok((
                frame.bulk_rule(true, axis, NORMAL_PANEL_ORDER),
                frame.surface_rule(axis),
            )),
            None => Ok((self.bulk_rule()?.clone(), self.boundary_rule()?.clone())),
        }
    }

    /// `∫_{G⁻¹(0)} g dρ`.
    pub fn surface_integrate(&self, g: &dyn ScalarField) -> Result<f64> {
        self.model.check_dim(g.dim())?;
        self.boundary_rule()?.integrate(|x| g.value(x))
    }

    pub fn surface_integrate_with(&self, g: impl FnMut(&[f64]) -> f64) -> Result<f64> {
        self.boundary_rule()?.integrate(g)
    }

    /// `∫_Ω f dμ`.
    pub fn integrate_mu(&self, f: &dyn ScalarField) -> Result<f64> {
        self.model.check_dim(f.dim())?;
        self.bulk_rule()?.integrate(|x| f.value(x))
    }

    pub fn integrate_mu_with(&self, g: impl FnMut(&[f64]) -> f64) -> Result<f64> {
        self.bulk_rule()?.integrate(g)
    }

    /// Values of `f` at the boundary nodes; in finite dimensions the trace is the restriction.
    pub fn trace_restrict(&self, f: &dyn ScalarField) -> Result<Vec<f64>> {
        Ok(self
            .boundary_rule()?
            .iter()
            .map(|(x, _)| f.value(x))
            .collect())
    }

    /// `∇_H G / |∇_H G|_H` in H-coordinates.
    pub fn unit_normal(&self, x: &[f64]) -> DVector<f64> {
        let g = self.g.gradient(x);
        let n = g.norm();
        g / n
    }

    /// Smallest `|∇_H G|_H` over the boundary nodes; must be positive.
    pub fn min_boundary_gradient(&self) -> Result<f64> {
        let rule = self.boundary_rule()?;
        let m = rule
            .iter()
            .map(|(x, _)| self.g.gradient(x).norm())
            .fold(f64::INFINITY, f64::min);
        if !(m > 0.0) {
            return Err(Error::InvalidParameter(
                "∇_H G vanishes on the boundary".into(),
            ));
        }
        Ok(m)
    }

    /// Largest midpoint-convexity defect `G((x+y)/2) − (G(x)+G(y))/2` over random pairs.
    pub fn convexity_defect(&self, rng: &mut Lcg64, pairs: usize) -> f64 {
        midpoint_defect(&self.g, self.model.sqrt_spectrum(), rng, pairs)
    }

    /// Minimal-norm `h ∈ H` with `x − h ∈ Ω`.
    pub fn dh_project(&self, x: &[f64]) -> Result<Projection> {
        self.model.check_dim(x.len())?;
        let n = x.len();
        match &self.kind {
            DomainKind::HalfSpace { .. } => {
                let frame = self.frame.as_ref().expect("half-space frame");
                let excess = (frame.normal_coordinate(x) - frame.offset).max(0.0);
                let h = frame.normal() * excess;
                Ok(Projection {
                    distance: excess,
                    h,
                    iterations: 0,
                    kkt_residual: 0.0,
                })
            }
            DomainKind::UnitBall => {
                let lambda = self.model.spectrum();
                let phi = |m: f64| -> (f64, f64) {
                    let mut v = -1.0;
                    let mut d = 0.0;
                    for i in 0..n {
                        let q = 1.0 + m * lambda[i];
                        v += x[i] * x[i] / (q * q);
                        d -= 2.0 * lambda[i] * x[i] * x[i] / (q * q * q);
                    }
                    (v, d)
                };
                let (v0, _) = phi(0.0);
                if v0 <= 0.0 {
                    return Ok(Projection {
                        h: DVector::zeros(n),
                        distance: 0.0,
                        iterations: 0,
                        kkt_residual: 0.0,
                    });
                }
                // φ is convex and decreasing on m ≥ 0, so Newton from 0 increases monotonically.
                let mut m = 0.0;
                let mut it = 0;
                let mut res = v0;
                while it < PROJECTION_MAX_ITER {
                    let (v, d) = phi(m);
                    res = v.abs();
                    if res <= PROJECTION_TOL * 1e-2 {
                        break;
                    }
                    m -= v / d;
                    it += 1;
                }
                if res > PROJECTION_TOL {
                    return Err(Error::ProjectionFailed {
                        iterations: it,
                        residual: res,
                    });
                }
                let s = self.model.sqrt_spectrum();
                let h = DVector::from_iterator(
                    n,
                    (0..n).map(|i| {
                        let y = x[i] / (1.0 + m * lambda[i]);
                        (x[i] - y) / s[i]
                    }),
                );
                Ok(Projection {
                    distance: h.norm(),
                    h,
                    iterations: it,
                    kkt_residual: res,
                })
            }
            DomainKind::Custom => Err(Error::Unsupported(
                "H-projection needs a half-space or the unit ball".into(),
            )),
        }
    }

    pub fn dh_distance(&self, x: &[f64]) -> Result<f64> {
        Ok(self.dh_project(x)?.distance)
    }
}

/// Integration region: the whole space or a level-set domain.
#[derive(Debug, Clone, Copy)]
pub enum Region<'a> {
    Whole(&'a GaussianModel),
    Domain(&'a LevelSetDomain),
}

impl<'a> Region<'a> {
    pub fn model(&self) -> &'a GaussianModel {
        match self {
            Region::Whole(m) => m,
            Region::Domain(d) => d.model(),
        }
    }

    pub fn domain(&self) -> Option<&'a LevelSetDomain> {
        match self {
            Region::Whole(_) => None,
            Region::Domain(d) => Some(d),
        }
    }

    /// `∫ g dμ` over the region.
    pub fn integrate(&self, g: impl FnMut(&[f64]) -> f64) -> Result<f64> {
        match self {
            Region::Whole(m) => m.grid()?.rule.integrate(g),
            Region::Domain(d) => d.bulk_rule()?.integrate(g),
        }
    }

    pub fn integrate_many(&self, count: usize, g: impl FnMut(&[f64], &mut [f64])) -> Result<Vec<f64>> {
        match self {
            Region::Whole(m) => m.grid()?.rule.integrate_many(count, g),
            Region::Domain(d) => d.bulk_rule()?.integrate_many(count, g),
        }
    }
}

fn midpoint_defect(
    f: &dyn ScalarField,
    sqrt_spectrum: &[f64],
    rng: &mut Lcg64,
    pairs: usize,
) -> f64 {
    let n = sqrt_spectrum.len();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let x: Vec<f64> = (0..n).map(|i| 3.0 * rng.symmetric() * sqrt_spectrum[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| 3.0 * rng.symmetric() * sqrt_spectrum[i]).collect();
        let m: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        worst = worst.max(f.value(&m) - 0.5 * (f.value(&x) + f.value(&y)));
    }
    worst
}

/// Largest midpoint-convexity defect of `f` over random pairs in a box of three standard deviations.
pub fn convexity_defect(f: &dyn ScalarField, sqrt_spectrum: &[f64], rng: &mut Lcg64, pairs: usize) -> f64 {
    midpoint_defect(f, sqrt_spectrum, rng, pairs)
}

/// Boundary (ρ) and bulk (μ) rules of the unit ball for n ≤ 3.
fn ball_rules(model: &GaussianModel) -> (PointRule, PointRule) {
    let n = model.dim();
    let lambda = model.spectrum();
    let det_d: f64 = lambda.iter().map(|l| l.sqrt().recip()).product();
    // ambient unit sphere: directions with their ambient Hausdorff weights
    let mut sphere = PointRule::new(n);
    match n {
        1 => {
            sphere.push(&[-1.0], 1.0);
            sphere.push(&[1.0], 1.0);
        }
        2 => {
            let w = 2.0 * PI / CIRCLE_NODES as f64;
            for k in 0..CIRCLE_NODES {
                let t = w * k as f64;
                sphere.push(&[t.cos(), t.sin()], w);
            }
        }
        _ => {
            let (u, wu) = gauss_legendre(SPHERE_POLAR_NODES, -1.0, 1.0);
            let wt = 2.0 * PI / SPHERE_AZIMUTH_NODES as f64;
            for (ui, wi) in u.iter().zip(&wu) {
                let s = (1.0 - ui * ui).sqrt();
                for k in 0..SPHERE_AZIMUTH_NODES {
                    let t = wt * k as f64;
                    sphere.push(&[s * t.cos(), s * t.sin(), *ui], wi * wt);
                }
            }
        }
    }
    let density = |x: &[f64]| {
        let z: Vec<f64> = x.iter().zip(lambda).map(|(xi, l)| xi / l.sqrt()).collect();
        GaussianModel::standard_density(&z)
    };
    // dS_z = det(D)·|D⁻¹ν|·dS_x with D = diag(λ^{-1/2}) and ν = x on the unit sphere
    let boundary = sphere.scale_weights(|x| {
        let stretch: f64 = x.iter().zip(lambda).map(|(xi, l)| l * xi * xi).sum::<f64>().sqrt();
        det_d * stretch * density(x)
    });
    let radial_order = model.quad_order().max(8);
    let (rho, wr) = gauss_legendre(radial_order, 0.0, 1.0);
    let mut bulk = PointRule::new(n);
    for (r, wr) in rho.iter().zip(&wr) {
        let jac = r.powi(n as i32 - 1);
        for (dir, ws) in sphere.iter() {
            let x: Vec<f64> = dir.iter().map(|d| d * r).collect();
            let w = wr * jac * ws * det_d * density(&x);
            bulk.push(&x, w);
        }
    }
    (boundary, bulk)
}

/// Domain description as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainSpecKind,
    #[serde(default)]
    pub a: Option<Vec<f64>>,
    #[serde(default)]
    pub r: Option<f64>,
    pub spectrum: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSpecKind {
    WholeSpace,
    HalfSpace,
    UnitBall,
}

impl DomainSpec {
    /// Builds the model and, unless the spec is the whole space, the domain.
    pub fn build(&self, quad_order: usize) -> Result<(GaussianModel, Option<LevelSetDomain>)> {
        let model = GaussianModel::new(self.spectrum.clone(), quad_order)?;
        let domain = match self.kind {
            DomainSpecKind::WholeSpace => None,
            DomainSpecKind::UnitBall => Some(LevelSetDomain::unit_ball(&model)?),
            DomainSpecKind::HalfSpace => {
                let a = self.a.clone().ok_or_else(|| {
                    Error::InvalidParameter("half_space domain needs `a`".into())
                })?;
                Some(LevelSetDomain::half_space(&model, &a, self.r.unwrap_or(0.0))?)
            }
        };
        Ok((model, domain))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contains_examples() {
        let m = GaussianModel::standard(2, 8).unwrap();
        let hs = LevelSetDomain::half_space(&m, &[1.0, 0.0], 0.0).unwrap();
        assert!(hs.contains(&[-1.0, 5.0]));
        let ball = LevelSetDomain::unit_ball(&m).unwrap();
        assert!(ball.contains(&[0.0, 0.0]));
        assert!(!ball.contains(&[0.8, 0.8]));
    }

    #[test]
    fn surface_integrals_of_one() {
        let gamma0 = 0.398_942_280_4;
        let m1 = GaussianModel::standard(1, 20).unwrap();
        let d1 = LevelSetDomain::half_space(&m1, &[1.0], 0.0).unwrap();
        assert!((d1.surface_integrate(&m1.constant(1.0)).unwrap() - gamma0).abs() < 1e-10);
        let m2 = GaussianModel::standard(2, 20).unwrap();
        let d2 = LevelSetDomain::half_space(&m2, &[1.0, 0.0], 0.0).unwrap();
        assert!((d2.surface_integrate(&m2.constant(1.0)).unwrap() - gamma0).abs() < 1e-10);
        let ball = LevelSetDomain::unit_ball(&m2).unwrap();
        let expected = (-0.5f64).exp();
        assert!((ball.surface_integrate(&m2.constant(1.0)).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn custom_domain_has_no_surface_rule() {
        let m = GaussianModel::standard(2, 8).unwrap();
        let d = LevelSetDomain::custom(&m, m.x_norm_sq()).unwrap();
        assert_eq!(d.surface_integrate(&m.constant(1.0)), Err(Error::NoSurfaceRule));
    }

    #[test]
    fn trace_on_circle_is_restriction() {
        let m = GaussianModel::standard(2, 8).unwrap();
        let ball = LevelSetDomain::unit_ball(&m).unwrap();
        let tr = ball.trace_restrict(&m.h_hat(1)).unwrap();
        let rule = ball.boundary_rule().unwrap();
        for (k, v) in tr.iter().enumerate() {
            let t = 2.0 * PI * k as f64 / CIRCLE_NODES as f64;
            assert!((v - t.sin()).abs() < 1e-14);
            assert!(ball.g().value(rule.point(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn half_space_distance_examples() {
        let m = GaussianModel::standard(1, 8).unwrap();
        let d = LevelSetDomain::half_space(&m, &[1.0], 0.0).unwrap();
        assert_eq!(d.dh_distance(&[-0.5]).unwrap(), 0.0);
        assert!((d.dh_distance(&[2.0]).unwrap() - 2.0).abs() < 1e-15);
        let m = GaussianModel::new(vec![4.0, 1.0], 8).unwrap();
        let d = LevelSetDomain::half_space(&m, &[1.0, 0.0], 0.0).unwrap();
        assert!((d.dh_distance(&[2.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bulk_mass_matches_normal_cdf() {
        // Ω = {x₁ + x₂ ≤ 1}, λ = (1, 3): μ(Ω) = Φ(1/2)
        let m = GaussianModel::new(vec![1.0, 3.0], 20).unwrap();
        let d = LevelSetDomain::half_space(&m, &[1.0, 1.0], 1.0).unwrap();
        let mass = d.integrate_mu(&m.constant(1.0)).unwrap();
        assert!((mass - 0.691_462_461_274_013_1).abs() < 1e-12);
    }
}
