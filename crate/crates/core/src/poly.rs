//! Multivariate polynomials in the standardized coordinates `z_i = ĥ_i(x)`.
//!
//! Derivatives with respect to `z_i` are exactly the derivatives along the
//! H-orthonormal basis vector `√λ_i e_i`, so a polynomial's symbolic partials
//! are its H-partials.

use std::collections::BTreeMap;
use std::fmt;

use crate::rng::Lcg64;

/// Exponent vector of a monomial.
pub type Exponents = Vec<u32>;

#[derive(Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponents, f64>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "·z{}", i + 1)?,
                    _ => write!(f, "·z{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The coordinate `z_i` (zero-based index).
    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, 1.0)
    }

    pub fn monomial(nvars: usize, exps: Exponents, coef: f64) -> Self {
        assert_eq!(exps.len(), nvars, "exponent vector length");
        let mut p = Self::zero(nvars);
        p.add_term(exps, coef);
        p
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (f64, Exponents)>) -> Self {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    /// Univariate polynomial `Σ coeffs[k] z_i^k` in coordinate `i`.
    pub fn univariate(nvars: usize, i: usize, coeffs: &[f64]) -> Self {
        let mut p = Self::zero(nvars);
        for (k, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0; nvars];
            e[i] = k as u32;
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exps: Exponents, coef: f64) {
        if coef == 0.0 {
            return;
        }
        let entry = self.terms.entry(exps).or_insert(0.0);
        *entry += coef;
        if *entry == 0.0 {
            self.terms.retain(|_, c| *c != 0.0);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, f64)> {
        self.terms.iter().map(|(e, c)| (e, *c))
    }

    pub fn coefficient(&self, exps: &[u32]) -> f64 {
        self.terms.get(exps).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Degree in coordinate `i` alone.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    /// Coordinates that occur with a nonzero exponent.
    pub fn active_vars(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&i| self.terms.keys().any(|e| e[i] > 0))
            .collect()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), *c);
        }
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c * s);
        }
        p
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut p = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponents = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    pub fn powi(&self, k: u32) -> Poly {
        let mut p = Poly::constant(self.nvars, 1.0);
        for _ in 0..k {
            p = p.mul(self);
        }
        p
    }

    /// Symbolic partial derivative in coordinate `i`.
    pub fn partial(&self, i: usize) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut d = e.clone();
                d[i] -= 1;
                p.add_term(d, c * e[i] as f64);
            }
        }
        p
    }

    /// Re-embeds into `nvars` coordinates, sending old coordinate `k` to `map[k]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Poly {
        let mut p = Poly::zero(nvars);
        for (e, c) in &self.terms {
            let mut d = vec![0; nvars];
            for (k, &ek) in e.iter().enumerate() {
                d[map[k]] += ek;
            }
            p.add_term(d, *c);
        }
        p
    }

    /// Largest coefficient difference; symbolic comparison of two polynomials.
    pub fn max_coeff_diff(&self, other: &Poly) -> f64 {
        self.sub(other)
            .terms
            .values()
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        let n = self.nvars;
        let stride = (self.degree() as usize) + 1;
        let mut pw = vec![1.0; n * stride];
        for i in 0..n {
            for k in 1..stride {
                pw[i * stride + k] = pw[i * stride + k - 1] * z[i];
            }
        }
        let mut s = 0.0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (i, &k) in e.iter().enumerate() {
                t *= pw[i * stride + k as usize];
            }
            s += t;
        }
        s
    }

    /// Value, gradient and Hessian (row-major `n×n`) at `z`.
    pub fn eval_jet(&self, z: &[f64], grad: &mut [f64], hess: &mut [f64]) -> f64 {
        let n = self.nvars;
        grad.iter_mut().for_each(|g| *g = 0.0);
        hess.iter_mut().for_each(|h| *h = 0.0);
        let stride = (self.degree() as usize) + 1;
        let mut pw = vec![1.0; n * stride];
        for i in 0..n {
            for k in 1..stride {
                pw[i * stride + k] = pw[i * stride + k - 1] * z[i];
            }
        }
        let pow = |i: usize, k: i64| if k < 0 { 0.0 } else { pw[i * stride + k as usize] };
        let mut value = 0.0;
        let mut p0 = vec![0.0; n];
        for (e, &c) in &self.terms {
            for i in 0..n {
                p0[i] = pow(i, e[i] as i64);
            }
            let all: f64 = c * p0.iter().product::<f64>();
            value += all;
            for i in 0..n {
                let ki = e[i] as i64;
                if ki == 0 {
                    continue;
                }
                let mut rest_i = c;
                for (l, p) in p0.iter().enumerate() {
                    if l != i {
                        rest_i *= p;
                    }
                }
                grad[i] += rest_i * ki as f64 * pow(i, ki - 1);
                hess[i * n + i] += rest_i * (ki * (ki - 1)) as f64 * pow(i, ki - 2);
                for j in (i + 1)..n {
                    let kj = e[j] as i64;
                    if kj == 0 {
                        continue;
                    }
                    let mut rest = c;
                    for (l, p) in p0.iter().enumerate() {
                        if l != i && l != j {
                            rest *= p;
                        }
                    }
                    let v = rest * (ki * kj) as f64 * pow(i, ki - 1) * pow(j, kj - 1);
                    hess[i * n + j] += v;
                    hess[j * n + i] += v;
                }
            }
        }
        value
    }

    /// Orthonormal probabilists' Hermite polynomial `He_k(z_i)/√(k!)`.
    pub fn hermite_1d(nvars: usize, i: usize, k: u32) -> Poly {
        // He_{m+1} = z He_m - m He_{m-1}
        let mut prev = vec![1.0_f64];
        let mut cur = vec![0.0, 1.0];
        let coeffs = match k {
            0 => prev,
            1 => cur,
            _ => {
                for m in 1..k {
                    let mut next = vec![0.0; cur.len() + 1];
                    for (j, &c) in cur.iter().enumerate() {
                        next[j + 1] += c;
                    }
                    for (j, &c) in prev.iter().enumerate() {
                        next[j] -= m as f64 * c;
                    }
                    prev = cur;
                    cur = next;
                }
                cur
            }
        };
        let norm = (1..=k).map(|m| m as f64).product::<f64>().sqrt();
        let scaled: Vec<f64> = coeffs.iter().map(|c| c / norm).collect();
        Poly::univariate(nvars, i, &scaled)
    }

    /// Tensor Hermite polynomial `Π_i He_{k_i}(z_i)/√(k_i!)`.
    pub fn hermite(index: &[u32]) -> Poly {
        let n = index.len();
        index
            .iter()
            .enumerate()
            .fold(Poly::constant(n, 1.0), |acc, (i, &k)| {
                acc.mul(&Poly::hermite_1d(n, i, k))
            })
    }

    /// All exponent vectors of total degree `≤ degree`, graded: ascending total
    /// degree, and within one degree lexicographically descending (the first
    /// coordinate's exponent largest first).
    pub fn graded_exponents(nvars: usize, degree: u32) -> Vec<Exponents> {
        fn rec(nvars: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Exponents>) {
            if prefix.len() == nvars - 1 {
                prefix.push(remaining);
                out.push(prefix.clone());
                prefix.pop();
                return;
            }
            for k in (0..=remaining).rev() {
                prefix.push(k);
                rec(nvars, remaining - k, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        for d in 0..=degree {
            if nvars == 0 {
                break;
            }
            rec(nvars, d, &mut Vec::new(), &mut out);
        }
        out
    }

    /// Probe polynomial with coefficients uniform in `[-1, 1]` drawn in the
    /// graded order of [`Poly::graded_exponents`].
    pub fn random(nvars: usize, degree: u32, rng: &mut Lcg64) -> Poly {
        let mut p = Poly::zero(nvars);
        for e in Self::graded_exponents(nvars, degree) {
            let c = rng.symmetric();
            p.add_term(e, c);
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_recurrence_matches_closed_forms() {
        // He_2 = z^2 - 1, He_3 = z^3 - 3z, normalized by sqrt(k!)
        let h2 = Poly::hermite_1d(1, 0, 2);
        assert!((h2.coefficient(&[2]) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((h2.coefficient(&[0]) + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        let h3 = Poly::hermite_1d(1, 0, 3);
        assert!((h3.coefficient(&[1]) + 3.0 / 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jet_matches_symbolic_partials() {
        let p = Poly::from_terms(
            3,
            [
                (1.5, vec![2, 1, 0]),
                (-0.5, vec![0, 3, 1]),
                (2.0, vec![1, 1, 1]),
                (0.25, vec![0, 0, 0]),
            ],
        );
        let z = [0.3, -1.2, 0.7];
        let mut g = vec![0.0; 3];
        let mut h = vec![0.0; 9];
        let v = p.eval_jet(&z, &mut g, &mut h);
        assert!((v - p.eval(&z)).abs() < 1e-14);
        for i in 0..3 {
            assert!((g[i] - p.partial(i).eval(&z)).abs() < 1e-13);
            for j in 0..3 {
                let hij = p.partial(i).partial(j).eval(&z);
                assert!((h[i * 3 + j] - hij).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn graded_order_is_fixed() {
        let e = Poly::graded_exponents(2, 2);
        assert_eq!(
            e,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }
}
