//! Cylindrical functions with exact first and second derivatives along H.
//!
//! A [`CylFunction`] is an expression tree over the standardized coordinates
//! `z_i = x_i/√λ_i`. Evaluation takes ambient points `x`; gradients and
//! Hessians are returned in H-orthonormal coordinates, i.e. `∂_i` is the
//! derivative along `√λ_i e_i`.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::poly::Poly;

/// Value, H-gradient and H-Hessian at one point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl Jet {
    pub fn zeros(n: usize) -> Self {
        Self {
            value: 0.0,
            gradient: DVector::zeros(n),
            hessian: DMatrix::zeros(n, n),
        }
    }
}

/// A scalar field on ℝⁿ (ambient coordinates) with derivatives along H.
///
/// Implemented by [`CylFunction`] and by the evaluators that are not plain
/// expressions (the extension operator, the penalized weight).
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn jet(&self, x: &[f64]) -> Jet;

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        self.jet(x).gradient
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        self.jet(x).hessian
    }
}

/// Smooth scalar maps `ℝ → ℝ` that can be composed with cylindrical functions.
/// The family is closed under differentiation.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarMap {
    Exp,
    Ln,
    Sin,
    Cos,
    /// `t^k`, integer `k` (negative allowed away from 0).
    Powi(i32),
    /// `t^p` for `t > 0`.
    Powf(f64),
    /// `Σ c_k t^k`.
    Poly1(Vec<f64>),
    Scaled(f64, Box<ScalarMap>),
}

impl ScalarMap {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarMap::Exp => t.exp(),
            ScalarMap::Ln => t.ln(),
            ScalarMap::Sin => t.sin(),
            ScalarMap::Cos => t.cos(),
            ScalarMap::Powi(k) => t.powi(*k),
            ScalarMap::Powf(p) => t.powf(*p),
            ScalarMap::Poly1(c) => c.iter().rev().fold(0.0, |acc, ck| acc * t + ck),
            ScalarMap::Scaled(s, m) => s * m.eval(t),
        }
    }

    pub fn derivative(&self) -> ScalarMap {
        match self {
            ScalarMap::Exp => ScalarMap::Exp,
            ScalarMap::Ln => ScalarMap::Powi(-1),
            ScalarMap::Sin => ScalarMap::Cos,
            ScalarMap::Cos => ScalarMap::Scaled(-1.0, Box::new(ScalarMap::Sin)),
            ScalarMap::Powi(0) => ScalarMap::Poly1(vec![]),
            ScalarMap::Powi(k) => ScalarMap::Scaled(*k as f64, Box::new(ScalarMap::Powi(k - 1))),
            ScalarMap::Powf(p) => ScalarMap::Scaled(*p, Box::new(ScalarMap::Powf(p - 1.0))),
            ScalarMap::Poly1(c) => {
                ScalarMap::Poly1(c.iter().enumerate().skip(1).map(|(k, ck)| k as f64 * ck).collect())
            }
            ScalarMap::Scaled(s, m) => match m.derivative() {
                ScalarMap::Scaled(s2, m2) => ScalarMap::Scaled(s * s2, m2),
                d => ScalarMap::Scaled(*s, Box::new(d)),
            },
        }
    }
}

#[derive(Debug, Clone)]
enum Expr {
    Poly(Poly),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Map {
        outer: ScalarMap,
        d1: ScalarMap,
        d2: ScalarMap,
        inner: Box<Expr>,
    },
}

impl Expr {
    fn map(outer: ScalarMap, inner: Expr) -> Expr {
        let d1 = outer.derivative();
        let d2 = d1.derivative();
        Expr::Map {
            outer,
            d1,
            d2,
            inner: Box::new(inner),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Expr::Poly(p) => p.is_zero(),
            Expr::Sum(v) => v.iter().all(Expr::is_zero),
            Expr::Product(v) => v.iter().any(Expr::is_zero),
            Expr::Map { .. } => false,
        }
    }

    fn uses_var(&self, i: usize) -> bool {
        match self {
            Expr::Poly(p) => p.degree_in(i) > 0,
            Expr::Sum(v) | Expr::Product(v) => v.iter().any(|e| e.uses_var(i)),
            Expr::Map { inner, .. } => inner.uses_var(i),
        }
    }

    fn value(&self, z: &[f64]) -> f64 {
        match self {
            Expr::Poly(p) => p.eval(z),
            Expr::Sum(v) => v.iter().map(|e| e.value(z)).sum(),
            Expr::Product(v) => v.iter().map(|e| e.value(z)).product(),
            Expr::Map { outer, inner, .. } => outer.eval(inner.value(z)),
        }
    }

    /// Fills `g` (length n) and `h` (n×n row-major); returns the value.
    fn jet(&self, z: &[f64], g: &mut [f64], h: &mut [f64]) -> f64 {
        let n = z.len();
        match self {
            Expr::Poly(p) => p.eval_jet(z, g, h),
            Expr::Sum(v) => {
                g.iter_mut().for_each(|a| *a = 0.0);
                h.iter_mut().for_each(|a| *a = 0.0);
                let mut tg = vec![0.0; n];
                let mut th = vec![0.0; n * n];
                let mut val = 0.0;
                for e in v {
                    val += e.jet(z, &mut tg, &mut th);
                    g.iter_mut().zip(&tg).for_each(|(a, b)| *a += b);
                    h.iter_mut().zip(&th).for_each(|(a, b)| *a += b);
                }
                val
            }
            Expr::Product(v) => {
                // fold the product rule factor by factor
                let mut val = 1.0;
                g.iter_mut().for_each(|a| *a = 0.0);
                h.iter_mut().for_each(|a| *a = 0.0);
                let mut tg = vec![0.0; n];
                let mut th = vec![0.0; n * n];
                for e in v {
                    let fv = e.jet(z, &mut tg, &mut th);
                    for i in 0..n {
                        for j in 0..n {
                            h[i * n + j] = h[i * n + j] * fv
                                + g[i] * tg[j]
                                + tg[i] * g[j]
                                + val * th[i * n + j];
                        }
                    }
                    for i in 0..n {
                        g[i] = g[i] * fv + val * tg[i];
                    }
                    val *= fv;
                }
                val
            }
            Expr::Map {
                outer,
                d1,
                d2,
                inner,
            } => {
                let t = inner.jet(z, g, h);
                let f1 = d1.eval(t);
                let f2 = d2.eval(t);
                for i in 0..n {
                    for j in 0..n {
                        h[i * n + j] = f2 * g[i] * g[j] + f1 * h[i * n + j];
                    }
                }
                g.iter_mut().for_each(|a| *a *= f1);
                outer.eval(t)
            }
        }
    }

    fn partial(&self, i: usize, nvars: usize) -> Expr {
        match self {
            Expr::Poly(p) => Expr::Poly(p.partial(i)),
            Expr::Sum(v) => simplify_sum(v.iter().map(|e| e.partial(i, nvars)).collect(), nvars),
            Expr::Product(v) => {
                let mut terms = Vec::new();
                for k in 0..v.len() {
                    let dk = v[k].partial(i, nvars);
                    if dk.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = v
                        .iter()
                        .enumerate()
                        .filter(|(m, _)| *m != k)
                        .map(|(_, e)| e.clone())
                        .collect();
                    factors.push(dk);
                    terms.push(simplify_product(factors, nvars));
                }
                simplify_sum(terms, nvars)
            }
            Expr::Map { d1, inner, .. } => {
                let di = inner.partial(i, nvars);
                if di.is_zero() {
                    return Expr::Poly(Poly::zero(nvars));
                }
                simplify_product(vec![Expr::map(d1.clone(), (**inner).clone()), di], nvars)
            }
        }
    }
}

fn simplify_sum(terms: Vec<Expr>, nvars: usize) -> Expr {
    let mut poly = Poly::zero(nvars);
    let mut rest = Vec::new();
    for t in terms {
        match t {
            Expr::Poly(p) => poly = poly.add(&p),
            Expr::Sum(v) => match simplify_sum(v, nvars) {
                Expr::Sum(inner) => {
                    for e in inner {
                        match e {
                            Expr::Poly(p) => poly = poly.add(&p),
                            other => rest.push(other),
                        }
                    }
                }
                Expr::Poly(p) => poly = poly.add(&p),
                other => rest.push(other),
            },
            other if other.is_zero() => {}
            other => rest.push(other),
        }
    }
    if rest.is_empty() {
        return Expr::Poly(poly);
    }
    if !poly.is_zero() {
        rest.insert(0, Expr::Poly(poly));
    }
    if rest.len() == 1 {
        rest.pop().unwrap()
    } else {
        Expr::Sum(rest)
    }
}

fn simplify_product(factors: Vec<Expr>, nvars: usize) -> Expr {
    let mut poly = Poly::constant(nvars, 1.0);
    let mut rest = Vec::new();
    for f in factors {
        match f {
            Expr::Poly(p) => poly = poly.mul(&p),
            Expr::Product(v) => {
                for e in v {
                    match e {
                        Expr::Poly(p) => poly = poly.mul(&p),
                        other => rest.push(other),
                    }
                }
            }
            other => rest.push(other),
        }
    }
    if poly.is_zero() || rest.is_empty() {
        return Expr::Poly(poly);
    }
    if poly != Poly::constant(nvars, 1.0) {
        rest.insert(0, Expr::Poly(poly));
    }
    if rest.len() == 1 {
        rest.pop().unwrap()
    } else {
        Expr::Product(rest)
    }
}

/// A cylindrical function `f(x) = φ(ĥ_1(x), …, ĥ_n(x))` with exact derivatives.
#[derive(Clone)]
pub struct CylFunction {
    sqrt_spectrum: Arc<[f64]>,
    expr: Arc<Expr>,
}

impl std::fmt::Debug for CylFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.expr.as_ref() {
            Expr::Poly(p) => write!(f, "CylFunction({p:?})"),
            _ => write!(f, "CylFunction(<expression in {} coordinates>)", self.dim()),
        }
    }
}

impl CylFunction {
    /// Wraps a polynomial in standardized coordinates. `sqrt_spectrum[i] = √λ_i`.
    pub fn from_poly(sqrt_spectrum: Arc<[f64]>, poly: Poly) -> Self {
        assert_eq!(poly.nvars(), sqrt_spectrum.len(), "polynomial arity");
        Self {
            sqrt_spectrum,
            expr: Arc::new(Expr::Poly(poly)),
        }
    }

    fn with_expr(&self, expr: Expr) -> Self {
        Self {
            sqrt_spectrum: self.sqrt_spectrum.clone(),
            expr: Arc::new(expr),
        }
    }

    pub fn sqrt_spectrum(&self) -> &Arc<[f64]> {
        &self.sqrt_spectrum
    }

    pub fn constant_like(&self, c: f64) -> Self {
        self.with_expr(Expr::Poly(Poly::constant(self.dim(), c)))
    }

    /// The polynomial behind this function, when it is one.
    pub fn as_poly(&self) -> Option<&Poly> {
        match self.expr.as_ref() {
            Expr::Poly(p) => Some(p),
            _ => None,
        }
    }

    /// Coordinates the function actually depends on.
    pub fn active_coords(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.expr.uses_var(i)).collect()
    }

    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.sqrt_spectrum.iter()).map(|(xi, s)| xi / s).collect()
    }

    /// Evaluates at standardized coordinates `z`.
    pub fn value_z(&self, z: &[f64]) -> f64 {
        self.expr.value(z)
    }

    pub fn jet_z(&self, z: &[f64]) -> Jet {
        let n = self.dim();
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n * n];
        let v = self.expr.jet(z, &mut g, &mut h);
        Jet {
            value: v,
            gradient: DVector::from_vec(g),
            hessian: DMatrix::from_row_slice(n, n, &h),
        }
    }

    /// Symbolic H-partial `∂_i f`.
    pub fn partial(&self, i: usize) -> Self {
        self.with_expr(self.expr.partial(i, self.dim()))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.with_expr(simplify_product(
            vec![Expr::Poly(Poly::constant(self.dim(), s)), (*self.expr).clone()],
            self.dim(),
        ))
    }

    /// `φ ∘ f`.
    pub fn map(&self, outer: ScalarMap) -> Self {
        self.with_expr(Expr::map(outer, (*self.expr).clone()))
    }

    pub fn powi(&self, k: u32) -> Self {
        match self.as_poly() {
            Some(p) => self.with_expr(Expr::Poly(p.powi(k))),
            None => self.map(ScalarMap::Powi(k as i32)),
        }
    }
}

impl ScalarField for CylFunction {
    fn dim(&self) -> usize {
        self.sqrt_spectrum.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.expr.value(&self.standardize(x))
    }

    fn jet(&self, x: &[f64]) -> Jet {
        self.jet_z(&self.standardize(x))
    }
}

impl Add for &CylFunction {
    type Output = CylFunction;
    fn add(self, rhs: &CylFunction) -> CylFunction {
        assert_eq!(self.dim(), rhs.dim());
        self.with_expr(simplify_sum(
            vec![(*self.expr).clone(), (*rhs.expr).clone()],
            self.dim(),
        ))
    }
}

impl Sub for &CylFunction {
    type Output = CylFunction;
    fn sub(self, rhs: &CylFunction) -> CylFunction {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &CylFunction {
    type Output = CylFunction;
    fn mul(self, rhs: &CylFunction) -> CylFunction {
        assert_eq!(self.dim(), rhs.dim());
        self.with_expr(simplify_product(
            vec![(*self.expr).clone(), (*rhs.expr).clone()],
            self.dim(),
        ))
    }
}

impl Neg for &CylFunction {
    type Output = CylFunction;
    fn neg(self) -> CylFunction {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for CylFunction {
            type Output = CylFunction;
            fn $m(self, rhs: CylFunction) -> CylFunction {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&CylFunction> for CylFunction {
            type Output = CylFunction;
            fn $m(self, rhs: &CylFunction) -> CylFunction {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Central finite-difference gradient of `f` along the H-basis, step `h` in H-units.
pub fn fd_gradient(f: &dyn ScalarField, x: &[f64], sqrt_spectrum: &[f64], h: f64) -> DVector<f64> {
    let n = x.len();
    DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h * sqrt_spectrum[i];
            xm[i] -= h * sqrt_spectrum[i];
            (f.value(&xp) - f.value(&xm)) / (2.0 * h)
        }),
    )
}

/// Central finite differences of the gradient evaluator, symmetrized.
pub fn fd_hessian(f: &dyn ScalarField, x: &[f64], sqrt_spectrum: &[f64], h: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h * sqrt_spectrum[j];
        xm[j] -= h * sqrt_spectrum[j];
        let d = (f.gradient(&xp) - f.gradient(&xm)) / (2.0 * h);
        m.set_column(j, &d);
    }
    (&m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(l: &[f64]) -> Arc<[f64]> {
        l.iter().map(|v| v.sqrt()).collect::<Vec<_>>().into()
    }

    #[test]
    fn composite_derivatives_match_finite_differences() {
        let s = spectrum(&[1.0, 4.0]);
        let p = Poly::from_terms(2, [(0.7, vec![2, 0]), (-0.3, vec![1, 1]), (0.2, vec![0, 1])]);
        let f = CylFunction::from_poly(s.clone(), p);
        let g = &f.map(ScalarMap::Exp) * &f.map(ScalarMap::Sin) + f.scale(0.5);
        let x = [0.4, -0.9];
        let jet = g.jet(&x);
        let fd = fd_gradient(&g, &x, &s, 1e-5);
        for i in 0..2 {
            assert!((jet.gradient[i] - fd[i]).abs() <= 1e-6 * (1.0 + fd[i].abs()));
        }
        let fdh = fd_hessian(&g, &x, &s, 1e-5);
        assert!((jet.hessian.clone() - jet.hessian.transpose()).amax() < 1e-14);
        assert!((jet.hessian - fdh).amax() < 1e-5);
    }

    #[test]
    fn symbolic_partial_of_composition() {
        let s = spectrum(&[2.0]);
        let f = CylFunction::from_poly(s.clone(), Poly::variable(1, 0)).map(ScalarMap::Cos);
        let df = f.partial(0);
        for z in [-1.0, 0.3, 2.0] {
            let x = [z * 2f64.sqrt()];
            assert!((df.value(&x) + z.sin()).abs() < 1e-14);
            assert!((f.gradient(&x)[0] + z.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_arithmetic_stays_polynomial() {
        let s = spectrum(&[1.0, 1.0]);
        let a = CylFunction::from_poly(s.clone(), Poly::variable(2, 0));
        let b = CylFunction::from_poly(s, Poly::variable(2, 1));
        let c = &(&a * &b) + &a.scale(2.0);
        assert!(c.as_poly().is_some());
        assert_eq!(c.active_coords(), vec![0, 1]);
    }
}
