//! Tensor Hermite bases evaluated from one-dimensional tables.

use crate::poly::Poly;

/// `h_k(t) = He_k(t)/√k!` for `k ≤ degree` with first and second derivatives,
/// stored as `[h_0, h_0', h_0'', h_1, …]`.
pub fn hermite_table(t: f64, degree: usize, out: &mut Vec<f64>) {
    out.clear();
    let mut vals = Vec::with_capacity(degree + 1);
    vals.push(1.0);
    if degree >= 1 {
        vals.push(t);
    }
    for k in 1..degree {
        // normalized recurrence: √(k+1) h_{k+1} = t h_k − √k h_{k−1}
        let next = (t * vals[k] - (k as f64).sqrt() * vals[k - 1]) / ((k + 1) as f64).sqrt();
        vals.push(next);
    }
    for k in 0..=degree {
        let d1 = if k >= 1 { (k as f64).sqrt() * vals[k - 1] } else { 0.0 };
        let d2 = if k >= 2 {
            ((k * (k - 1)) as f64).sqrt() * vals[k - 2]
        } else {
            0.0
        };
        out.extend_from_slice(&[vals[k], d1, d2]);
    }
}

/// Tensor Hermite polynomials of total degree `≤ degree` in graded order.
#[derive(Debug, Clone)]
pub struct TensorHermite {
    nvars: usize,
    degree: usize,
    indices: Vec<Vec<u32>>,
}

/// Basis values and derivatives at one point; `grad[i * m + a] = ∂_i H_a`,
/// `hess[(i * n + j) * m + a] = ∂_i∂_j H_a`.
#[derive(Debug, Clone, Default)]
pub struct BasisEval {
    pub value: Vec<f64>,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    table: Vec<Vec<f64>>,
}

impl TensorHermite {
    pub fn new(nvars: usize, degree: usize) -> Self {
        let indices = if nvars == 0 {
            vec![Vec::new()]
        } else {
            Poly::graded_exponents(nvars, degree as u32)
        };
        Self {
            nvars,
            degree,
            indices,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<u32>] {
        &self.indices
    }

    /// Fills `e` at standardized point `z`; Hessians only when `second` is set.
    pub fn eval(&self, z: &[f64], second: bool, e: &mut BasisEval) {
        let n = self.nvars;
        let m = self.len();
        e.table.resize_with(n, Vec::new);
        for i in 0..n {
            hermite_table(z[i], self.degree, &mut e.table[i]);
        }
        e.value.clear();
        e.value.resize(m, 0.0);
        e.grad.clear();
        e.grad.resize(n * m, 0.0);
        e.hess.clear();
        if second {
            e.hess.resize(n * n * m, 0.0);
        }
        for (a, idx) in self.indices.iter().enumerate() {
            let f = |i: usize, d: usize| e.table[i][3 * idx[i] as usize + d];
            let mut v = 1.0;
            for i in 0..n {
                v *= f(i, 0);
            }
            e.value[a] = v;
            for i in 0..n {
                let mut g = f(i, 1);
                for j in 0..n {
                    if j != i {
                        g *= f(j, 0);
                    }
                }
                e.grad[i * m + a] = g;
            }
            if second {
                for i in 0..n {
                    for j in i..n {
                        let mut h = 1.0;
                        for l in 0..n {
                            let d = usize::from(l == i) + usize::from(l == j);
                            h *= f(l, d);
                        }
                        e.hess[(i * n + j) * m + a] = h;
                        e.hess[(j * n + i) * m + a] = h;
                    }
                }
            }
        }
    }

    /// `Σ c_a H_a` as a polynomial in the standardized coordinates.
    pub fn to_poly(&self, coeffs: &[f64]) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (idx, c) in self.indices.iter().zip(coeffs) {
            if *c != 0.0 {
                p = p.add(&Poly::hermite(idx).scale(*c));
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_symbolic_hermite() {
        let mut t = Vec::new();
        hermite_table(0.7, 5, &mut t);
        for k in 0..=5u32 {
            let p = Poly::hermite_1d(1, 0, k);
            assert!((t[3 * k as usize] - p.eval(&[0.7])).abs() < 1e-14);
            assert!((t[3 * k as usize + 1] - p.partial(0).eval(&[0.7])).abs() < 1e-13);
            assert!((t[3 * k as usize + 2] - p.partial(0).partial(0).eval(&[0.7])).abs() < 1e-13);
        }
    }

    #[test]
    fn tensor_eval_matches_poly_jet() {
        let b = TensorHermite::new(2, 3);
        let mut e = BasisEval::default();
        let z = [0.4, -1.1];
        b.eval(&z, true, &mut e);
        let m = b.len();
        for (a, idx) in b.indices().iter().enumerate() {
            let p = Poly::hermite(idx);
            let mut g = [0.0; 2];
            let mut h = [0.0; 4];
            let v = p.eval_jet(&z, &mut g, &mut h);
            assert!((e.value[a] - v).abs() < 1e-13);
            for i in 0..2 {
                assert!((e.grad[i * m + a] - g[i]).abs() < 1e-13);
                for j in 0..2 {
                    assert!((e.hess[(i * 2 + j) * m + a] - h[i * 2 + j]).abs() < 1e-12);
                }
            }
        }
    }
}
