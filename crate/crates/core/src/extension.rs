//! Reflection-type extension of functions on a half-space `{G ≤ 0}` to the
//! whole space, with `C²` matching across `G = 0`.
//!
//! For `G(x) > 0` the extension is
//! `Ef(x) = Σ_j a_j f(T_j x) A_j(x)` with `T_j x = x − (j+1)G(x) h/|h|²_H`
//! and `A_j = exp(−(c_j G + b_j G²)/(2|h|_H))`, `j = 1, …, 7`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::domain::{HalfSpaceFrame, LevelSetDomain};
use crate::error::{Error, Result};
use crate::function::{CylFunction, Jet, ScalarField};
use crate::gaussian::GaussianModel;
use crate::poly::Poly;
use crate::quadrature::{gauss_hermite_normal, AxisRule, PointRule};
use crate::rng::Lcg64;

pub const TERMS: usize = 7;
/// Offsets for the one-sided limits in [`matching_report`].
pub const JUMP_OFFSETS: [f64; 2] = [1e-6, 1e-7];

const ROW_NAMES: [&str; TERMS] = [
    "sum a",
    "sum a(j+1)",
    "sum a(j+1)^2",
    "sum a b",
    "sum a c",
    "sum a c (j+1)",
    "sum a c^2",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionCoefficients {
    pub r: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// `c_j / r`; the rows involving `c` are assembled from these.
    pub k: Vec<f64>,
    /// Ratio of extreme singular values of the constraint matrix.
    pub condition_number: f64,
    /// Right-hand side of the `Σa_j(j+1)² = ·` row; zero unless corrupted.
    pub second_moment_target: f64,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn b_exact(j: i64) -> BigRational {
    rat(j * j - 1, j * j)
}

fn k_exact(j: i64) -> BigRational {
    rat(2 * (j + 1) * (2 * j * j - 1), j * j * j * j)
}

/// Constraint rows (`4` for `r = 0`, `7` otherwise) with exact entries.
fn exact_rows(full: bool) -> Vec<Vec<BigRational>> {
    let rows = if full { TERMS } else { 4 };
    (0..rows)
        .map(|row| {
            (1..=TERMS as i64)
                .map(|j| {
                    let jp = rat(j + 1, 1);
                    let k = k_exact(j);
                    match row {
                        0 => BigRational::one(),
                        1 => jp,
                        2 => &jp * &jp,
                        3 => b_exact(j),
                        4 => k,
                        5 => &k * &jp,
                        _ => &k * &k,
                    }
                })
                .collect()
        })
        .collect()
}

fn rhs_exact(rows: usize, target: &BigRational) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); rows];
    v[0] = BigRational::one();
    v[2] = target.clone();
    v
}

/// Gauss–Jordan elimination over the rationals.
fn solve_exact(mut m: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Result<Vec<BigRational>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or(Error::ReflectionSystemDegenerate)?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v = &*v / &p;
        }
        rhs[col] = &rhs[col] / &p;
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in 0..n {
                let d = &f * &m[col][c];
                m[r][c] = &m[r][c] - d;
            }
            let d = &f * &rhs[col];
            rhs[r] = &rhs[r] - d;
        }
    }
    Ok(rhs)
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn float_rows(full: bool) -> DMatrix<f64> {
    let rows = exact_rows(full);
    DMatrix::from_fn(rows.len(), TERMS, |i, j| to_f64(&rows[i][j]))
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let s = m.clone().svd(false, false).singular_values;
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn assemble(r: f64, a: Vec<f64>, target: f64) -> ReflectionCoefficients {
    let b: Vec<f64> = (1..=TERMS as i64).map(|j| to_f64(&b_exact(j))).collect();
    let k: Vec<f64> = (1..=TERMS as i64).map(|j| to_f64(&k_exact(j))).collect();
    ReflectionCoefficients {
        r,
        a,
        b,
        c: k.iter().map(|kj| r * kj).collect(),
        k,
        condition_number: condition(&float_rows(r != 0.0)),
        second_moment_target: target,
    }
}

/// Coefficients for the offset `r`.
///
/// The rows in `c` scale with `r`, so every `r ≠ 0` shares one `a`-vector.
/// At `r = 0` those rows vanish and the minimum-norm solution of the four
/// remaining rows is returned. Solved exactly over the rationals.
pub fn solve_coefficients(r: f64) -> Result<ReflectionCoefficients> {
    solve_with_target(r, 0.0)
}

/// As [`solve_coefficients`] with `Σa_j(j+1)² = target`; any nonzero target
/// breaks the second-order matching.
pub fn solve_corrupted(r: f64, target: f64) -> Result<ReflectionCoefficients> {
    solve_with_target(r, target)
}

fn solve_with_target(r: f64, target: f64) -> Result<ReflectionCoefficients> {
    if !r.is_finite() || !target.is_finite() {
        return Err(Error::InvalidParameter("offset and target must be finite".into()));
    }
    let t = BigRational::from_float(target).ok_or_else(|| Error::InvalidParameter("target".into()))?;
    let full = r != 0.0;
    let rows = exact_rows(full);
    let rhs = rhs_exact(rows.len(), &t);
    let a = if full {
        solve_exact(rows, rhs)?
    } else {
        // a = Aᵀ(AAᵀ)⁻¹ rhs
        let gram: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|ri| {
                rows.iter()
                    .map(|rj| ri.iter().zip(rj).fold(BigRational::zero(), |s, (x, y)| s + x * y))
                    .collect()
            })
            .collect();
        let y = solve_exact(gram, rhs)?;
        (0..TERMS)
            .map(|j| rows.iter().zip(&y).fold(BigRational::zero(), |s, (row, yi)| s + &row[j] * yi))
            .collect()
    };
    Ok(assemble(r, a.iter().map(to_f64).collect(), target))
}

/// Floating-point route: LU with partial pivoting for `r ≠ 0`, SVD
/// pseudo-inverse for `r = 0`.
pub fn solve_coefficients_lu(r: f64) -> Result<ReflectionCoefficients> {
    if !r.is_finite() {
        return Err(Error::InvalidParameter("offset must be finite".into()));
    }
    let full = r != 0.0;
    let m = float_rows(full);
    let mut rhs = DVector::zeros(m.nrows());
    rhs[0] = 1.0;
    let a = if full {
        m.lu().solve(&rhs).ok_or(Error::ReflectionSystemDegenerate)?
    } else {
        m.svd(true, true)
            .solve(&rhs, 1e-14)
            .map_err(|_| Error::ReflectionSystemDegenerate)?
    };
    Ok(assemble(r, a.iter().copied().collect(), 0.0))
}

impl ReflectionCoefficients {
    /// Relative residual of every constraint row, `|Σ_j a_j v_j − rhs| / Σ_j |a_j v_j|`.
    /// Rows in `c` are omitted when `r = 0`.
    pub fn residuals(&self) -> Vec<(&'static str, f64)> {
        let rows = if self.r != 0.0 { TERMS } else { 4 };
        (0..rows)
            .map(|row| {
                let mut s = 0.0;
                let mut scale = 0.0;
                for j in 0..TERMS {
                    let jp = (j + 2) as f64;
                    let c = self.c[j];
                    let v = match row {
                        0 => 1.0,
                        1 => jp,
                        2 => jp * jp,
                        3 => self.b[j],
                        4 => c,
                        5 => c * jp,
                        _ => c * c,
                    };
                    s += self.a[j] * v;
                    scale += (self.a[j] * v).abs();
                }
                let target = match row {
                    0 => 1.0,
                    2 => self.second_moment_target,
                    _ => 0.0,
                };
                (ROW_NAMES[row], (s - target).abs() / scale.max(f64::MIN_POSITIVE))
            })
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coefficients serialize")
    }
}

/// `Ef` for a function `f` given on a half-space.
#[derive(Debug, Clone)]
pub struct ExtendedFunction {
    f: CylFunction,
    coeffs: Arc<ReflectionCoefficients>,
    /// Unit normal in standardized coordinates.
    normal: DVector<f64>,
    h_norm: f64,
    offset: f64,
}

impl ExtendedFunction {
    pub fn new(f: CylFunction, coeffs: ReflectionCoefficients, domain: &LevelSetDomain) -> Result<Self> {
        let frame = domain
            .frame()
            .ok_or_else(|| Error::Unsupported("the extension operator needs a half-space".into()))?;
        domain.model().check_dim(f.dim())?;
        if (coeffs.r - frame.r).abs() > 1e-12 * (1.0 + frame.r.abs()) {
            return Err(Error::InvalidParameter(format!(
                "coefficients solved for r = {}, domain has r = {}",
                coeffs.r, frame.r
            )));
        }
        Ok(Self {
            f,
            coeffs: Arc::new(coeffs),
            normal: frame.normal(),
            h_norm: frame.h_a_norm,
            offset: frame.offset,
        })
    }

    pub fn original(&self) -> &CylFunction {
        &self.f
    }

    pub fn coefficients(&self) -> &ReflectionCoefficients {
        &self.coeffs
    }

    pub fn g_value(&self, x: &[f64]) -> f64 {
        self.h_norm * (self.normal.dot(&DVector::from_vec(self.f.standardize(x))) - self.offset)
    }

    /// Standardized point and `G`.
    fn locate(&self, x: &[f64]) -> (DVector<f64>, f64) {
        let z = DVector::from_vec(self.f.standardize(x));
        let t = self.normal.dot(&z) - self.offset;
        (z, self.h_norm * t)
    }

    /// `T_j z` in standardized coordinates.
    fn reflect(&self, z: &DVector<f64>, g: f64, j: usize) -> DVector<f64> {
        let zj = z - &self.normal * ((j + 1) as f64 * g / self.h_norm);
        debug_assert!(
            self.normal.dot(&zj) - self.offset <= 1e-9 * (1.0 + g.abs()),
            "reflected point left the half-space"
        );
        zj
    }

    fn damping(&self, g: f64, j: usize) -> f64 {
        let c = &self.coeffs;
        (-(c.c[j - 1] * g + c.b[j - 1] * g * g) / (2.0 * self.h_norm)).exp()
    }
}

impl ScalarField for ExtendedFunction {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (z, g) = self.locate(x);
        if g <= 0.0 {
            return self.f.value_z(z.as_slice());
        }
        (1..=TERMS)
            .map(|j| self.coeffs.a[j - 1] * self.f.value_z(self.reflect(&z, g, j).as_slice()) * self.damping(g, j))
            .sum()
    }

    fn jet(&self, x: &[f64]) -> Jet {
        let (z, g) = self.locate(x);
        if g <= 0.0 {
            return self.f.jet_z(z.as_slice());
        }
        let n = self.dim();
        let nu = &self.normal;
        let nn = nu * nu.transpose();
        let mut out = Jet::zeros(n);
        for j in 1..=TERMS {
            let c = &self.coeffs;
            let s = (j + 1) as f64;
            let jt = self.f.jet_z(self.reflect(&z, g, j).as_slice());
            let w = c.a[j - 1] * self.damping(g, j);
            // derivatives of the exponent along the normal
            let e1 = -(c.c[j - 1] + 2.0 * c.b[j - 1] * g) / 2.0;
            let e2 = -c.b[j - 1] * self.h_norm;
            let p = DMatrix::identity(n, n) - &nn * s;
            let pg = &p * &jt.gradient;
            out.value += w * jt.value;
            out.gradient += (&pg + nu * (jt.value * e1)) * w;
            let cross = &pg * nu.transpose();
            out.hessian += (&p * &jt.hessian * &p + (&cross + cross.transpose()) * e1 + &nn * (jt.value * (e1 * e1 + e2))) * w;
        }
        out
    }
}

/// Largest jumps of `Ef`, `∇_H Ef` and `∇²_H Ef` across the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpReport {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl JumpReport {
    pub fn max(&self) -> f64 {
        self.c0.max(self.c1).max(self.c2)
    }
}

/// `count` boundary points with tangential frame coordinates uniform in `[−2, 2]`.
pub fn boundary_probes(frame: &HalfSpaceFrame, rng: &mut Lcg64, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let mut xi = vec![frame.offset];
            xi.extend((1..frame.dim()).map(|_| rng.uniform(-2.0, 2.0)));
            frame.to_ambient(&xi)
        })
        .collect()
}

/// One-sided limits at each probe, extrapolated linearly from the jets at
/// the two [`JUMP_OFFSETS`] along the normal.
pub fn matching_report(ef: &ExtendedFunction, probes: &[Vec<f64>]) -> JumpReport {
    let s = ef.f.sqrt_spectrum().clone();
    let [d1, d2] = JUMP_OFFSETS;
    let at = |x0: &[f64], t: f64| -> Jet {
        let x: Vec<f64> = x0
            .iter()
            .zip(s.iter())
            .zip(ef.normal.iter())
            .map(|((xi, si), ni)| xi + t * si * ni)
            .collect();
        ef.jet(&x)
    };
    let limit = |x0: &[f64], sign: f64| -> Jet {
        let j1 = at(x0, sign * d1);
        let j2 = at(x0, sign * d2);
        let w1 = -d2 / (d1 - d2);
        let w2 = d1 / (d1 - d2);
        Jet {
            value: w1 * j1.value + w2 * j2.value,
            gradient: j1.gradient * w1 + j2.gradient * w2,
            hessian: j1.hessian * w1 + j2.hessian * w2,
        }
    };
    let mut rep = JumpReport { c0: 0.0, c1: 0.0, c2: 0.0 };
    for x0 in probes {
        let plus = limit(x0, 1.0);
        let minus = limit(x0, -1.0);
        rep.c0 = rep.c0.max((plus.value - minus.value).abs());
        rep.c1 = rep.c1.max((plus.gradient - minus.gradient).amax());
        rep.c2 = rep.c2.max((plus.hessian - minus.hessian).amax());
    }
    rep
}

/// Rules on `Ω` and on its complement with `order` nodes per tangential axis
/// and per normal panel.
pub fn split_rules(frame: &HalfSpaceFrame, order: usize) -> (PointRule, PointRule) {
    let axis = AxisRule::Hermite(order);
    (frame.bulk_rule(true, axis, order), frame.bulk_rule(false, axis, order))
}

/// `‖f‖²_{W²²}` over a μ-weighted rule.
pub fn w22_sq(f: &dyn ScalarField, rule: &PointRule) -> Result<f64> {
    rule.integrate(|x| {
        let j = f.jet(x);
        j.value * j.value + j.gradient.norm_squared() + j.hessian.norm_squared()
    })
}

/// Largest `‖Ef‖_{W²²(X,μ)} / ‖f‖_{W²²(Ω,μ)}` over `test_set`; functions
/// with zero norm on `Ω` are skipped.
pub fn operator_norm_probe(
    test_set: &[CylFunction],
    coeffs: &ReflectionCoefficients,
    domain: &LevelSetDomain,
    order: usize,
) -> Result<f64> {
    let frame = domain
        .frame()
        .ok_or_else(|| Error::Unsupported("the extension operator needs a half-space".into()))?;
    let (inside, outside) = split_rules(frame, order);
    let mut worst: f64 = 0.0;
    for f in test_set {
        let base = w22_sq(f, &inside)?;
        if !(base > 0.0) {
            continue;
        }
        let ef = ExtendedFunction::new(f.clone(), coeffs.clone(), domain)?;
        let ext = base + w22_sq(&ef, &outside)?;
        worst = worst.max((ext / base).sqrt());
    }
    Ok(worst)
}

/// `v(x) = ∫ F(P_n x + S_n y) dμ(y)`: the average of `F` over the frame
/// coordinates `ξ_{n+1}, …, ξ_N`, which are all tangential.
pub struct ConditionalExpectation<'a> {
    inner: &'a dyn ScalarField,
    frame: &'a HalfSpaceFrame,
    keep: usize,
    nodes: PointRule,
}

impl<'a> ConditionalExpectation<'a> {
    /// `keep ≥ 1` leading frame coordinates survive; `order` Gauss–Hermite
    /// nodes per averaged coordinate.
    pub fn new(inner: &'a dyn ScalarField, frame: &'a HalfSpaceFrame, keep: usize, order: usize) -> Result<Self> {
        let n = frame.dim();
        if keep == 0 || keep > n {
            return Err(Error::InvalidParameter(format!("keep must lie in 1..={n}, got {keep}")));
        }
        let axis = gauss_hermite_normal(order);
        let axes: Vec<_> = (keep..n).map(|_| axis.clone()).collect();
        Ok(Self {
            inner,
            frame,
            keep,
            nodes: PointRule::tensor(&axes),
        })
    }

    fn shifted(&self, xi: &[f64], y: &[f64]) -> Vec<f64> {
        let mut p = xi[..self.keep].to_vec();
        p.extend_from_slice(y);
        self.frame.to_ambient(&p)
    }
}

impl ScalarField for ConditionalExpectation<'_> {
    fn dim(&self) -> usize {
        self.frame.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let xi = self.frame.to_frame(x);
        self.nodes.iter().map(|(y, w)| w * self.inner.value(&self.shifted(&xi, y))).sum()
    }

    fn jet(&self, x: &[f64]) -> Jet {
        let n = self.dim();
        let xi = self.frame.to_frame(x);
        let mut acc = Jet::zeros(n);
        for (y, w) in self.nodes.iter() {
            let j = self.inner.jet(&self.shifted(&xi, y));
            acc.value += w * j.value;
            acc.gradient += j.gradient * w;
            acc.hessian += j.hessian * w;
        }
        // only the kept frame directions carry derivatives
        let b = self.frame.basis.columns(0, self.keep);
        let proj = b * b.transpose();
        acc.gradient = &proj * acc.gradient;
        acc.hessian = &proj * acc.hessian * &proj;
        acc
    }
}

/// The frame coordinate `ξ_k` as a cylindrical function.
pub fn frame_coordinate(model: &GaussianModel, frame: &HalfSpaceFrame, k: usize) -> CylFunction {
    let n = frame.dim();
    let terms = (0..n).map(|i| {
        let mut e = vec![0; n];
        e[i] = 1;
        (frame.basis[(i, k)], e)
    });
    model.poly(Poly::from_terms(n, terms))
}

/// A seeded `u` with `∂_{ξ₁} u = 0` on the boundary:
/// `u = t²(c₀ + Σ c_i ξ_i) + Σ d_i ξ_i + Σ e_{ik} ξ_i ξ_k`, `t = ξ₁ − offset`,
/// sums over the tangential coordinates.
pub fn neumann_probe(model: &GaussianModel, frame: &HalfSpaceFrame, rng: &mut Lcg64) -> CylFunction {
    let n = frame.dim();
    let xi: Vec<CylFunction> = (0..n).map(|k| frame_coordinate(model, frame, k)).collect();
    let t = &xi[0] - &model.constant(frame.offset);
    let mut lead = model.constant(rng.symmetric());
    let mut rest = model.constant(rng.symmetric());
    for i in 1..n {
        lead = &lead + &xi[i].scale(rng.symmetric());
        rest = &rest + &xi[i].scale(rng.symmetric());
        for k in i..n {
            rest = &rest + &(&xi[i] * &xi[k]).scale(rng.symmetric());
        }
    }
    &(&(&t * &t) * &lead) + &rest
}

/// One stage of the cylindrical approximation of `Eu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproximantRow {
    pub kept: usize,
    /// `‖v_n − Eu‖_{W²²(X,μ)}`.
    pub error: f64,
    /// Largest `|⟨∇_H v_n, h⟩_H|` over the boundary probes.
    pub boundary_flux: f64,
}

/// Averages `Eu` over `ξ_{n+1}, …` for `n = 1, …, N`.
pub fn approximant_sweep(
    ef: &ExtendedFunction,
    domain: &LevelSetDomain,
    order: usize,
    inner_order: usize,
    probes: &[Vec<f64>],
) -> Result<Vec<ApproximantRow>> {
    let frame = domain
        .frame()
        .ok_or_else(|| Error::Unsupported("the extension operator needs a half-space".into()))?;
    let (inside, outside) = split_rules(frame, order);
    let h = frame.normal() * frame.h_a_norm;
    (1..=frame.dim())
        .map(|keep| {
            let v = ConditionalExpectation::new(ef, frame, keep, inner_order)?;
            let diff = |x: &[f64]| -> f64 {
                let a = v.jet(x);
                let b = ef.jet(x);
                (a.value - b.value).powi(2)
                    + (a.gradient - b.gradient).norm_squared()
                    + (a.hessian - b.hessian).norm_squared()
            };
            let error = (inside.integrate(diff)? + outside.integrate(diff)?).sqrt();
            let boundary_flux = probes
                .iter()
                .map(|x| v.gradient(x).dot(&h).abs())
                .fold(0.0, f64::max);
            Ok(ApproximantRow {
                kept: keep,
                error,
                boundary_flux,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_vector() {
        let c = solve_coefficients(1.0).unwrap();
        let expect = [0.0, 0.75, 8.0 / 9.0, 0.9375, 0.96, 35.0 / 36.0, 48.0 / 49.0];
        for (b, e) in c.b.iter().zip(expect) {
            assert!((b - e).abs() < 1e-15);
        }
    }

    #[test]
    fn minimum_norm_solution_at_zero_offset() {
        let c = solve_coefficients(0.0).unwrap();
        let sum: f64 = c.a.iter().sum();
        assert!((sum - 1.0).abs() < 1e-14);
        assert!(c.max_residual() < 1e-14);
        assert!(c.c.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constant_at_zero_offset() {
        let m = GaussianModel::standard(1, 20).unwrap();
        let d = LevelSetDomain::half_space(&m, &[1.0], 0.0).unwrap();
        let c = solve_coefficients(0.0).unwrap();
        let ef = ExtendedFunction::new(m.constant(1.0), c.clone(), &d).unwrap();
        for g in [0.0, 0.3, 1.7] {
            let expect: f64 = c.a.iter().zip(&c.b).map(|(a, b)| a * (-b * g * g / 2.0).exp()).sum();
            assert!((ef.value(&[g]) - expect).abs() < 1e-12);
        }
        assert_eq!(ef.value(&[0.0]), 1.0);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let m = GaussianModel::new(vec![1.0, 2.5], 12).unwrap();
        let d = LevelSetDomain::half_space(&m, &[0.7, -0.4], 0.3).unwrap();
        let f = m.poly(Poly::from_terms(
            2,
            [(1.0, vec![2, 1]), (-0.5, vec![1, 0]), (0.25, vec![0, 3])],
        ));
        let ef = ExtendedFunction::new(f, solve_coefficients(0.3).unwrap(), &d).unwrap();
        let frame = d.frame().unwrap();
        let x = frame.to_ambient(&[frame.offset + 0.2, 0.4]);
        let j = ef.jet(&x);
        let s = m.sqrt_spectrum();
        let g = crate::function::fd_gradient(&ef, &x, s, 1e-6);
        let h = crate::function::fd_hessian(&ef, &x, s, 1e-4);
        assert!((g - &j.gradient).amax() < 1e-6 * (1.0 + j.gradient.amax()));
        assert!((h - &j.hessian).amax() < 1e-4 * (1.0 + j.hessian.amax()));
    }
}
