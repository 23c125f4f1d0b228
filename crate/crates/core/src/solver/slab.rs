//! Half-space and penalized problems on a slab `{lo ≤ ξ₁ ≤ hi}` of the
//! H-orthonormal frame of a half-space.
//!
//! The normal coordinate uses vertex-centred finite volumes (control volumes
//! of length `h`, halved at both ends, natural conditions at both ends); the
//! tangential coordinates use the orthonormal Hermite basis with Gram matrices
//! weighted by `e^{−V}` at every normal node and cell midpoint. The resulting
//! system is symmetric block tridiagonal.

use nalgebra::{DMatrix, DVector};

use super::basis::{BasisEval, TensorHermite};
use super::{Solution, SolveResult};
use crate::domain::{HalfSpaceFrame, LevelSetDomain};
use crate::error::{Error, Result};
use crate::function::ScalarField;
use crate::gaussian::GaussianModel;
use crate::moreau::{PenalizedWeight, Weight};
use crate::nodes::axis_rule_for;
use crate::norms::SobolevNorms;
use crate::quadrature::{gaussian_density, AxisRule, PointRule};

/// Distance from the origin to the left cutoff, in units of the normal coordinate.
pub const LEFT_CUTOFF: f64 = 8.0;
pub const CUTOFF_MASS_TOL: f64 = 1e-6;
/// Penalized slabs extend this many `√α` beyond the boundary.
pub const PENALTY_REACH: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabOptions {
    /// Mesh width in the normal coordinate.
    pub h: f64,
    pub tangential_degree: usize,
    pub left_cutoff: f64,
}

impl Default for SlabOptions {
    fn default() -> Self {
        Self {
            h: 0.025,
            tangential_degree: 6,
            left_cutoff: LEFT_CUTOFF,
        }
    }
}

#[derive(Debug, Clone)]
struct Location {
    /// Per tangential node: `γ(t) w_k e^{−V}`.
    dens: Vec<f64>,
    /// Ambient points, row-major.
    points: Vec<f64>,
    mass: DMatrix<f64>,
    stiff: DMatrix<f64>,
    hess: DMatrix<f64>,
    /// Frame-coordinate `∇²V` per tangential node (nodes only, nonzero weights only).
    vhess: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub struct SlabSolver {
    model: GaussianModel,
    frame: HalfSpaceFrame,
    h: f64,
    xi: Vec<f64>,
    boundary_at_hi: bool,
    basis: TensorHermite,
    tangential: PointRule,
    tang_eval: Vec<BasisEval>,
    nodes: Vec<Location>,
    mids: Vec<Location>,
}

/// Nodal coefficient vectors of a slab solution.
#[derive(Debug, Clone)]
pub struct SlabSolution {
    pub xi: Vec<f64>,
    pub coeffs: Vec<DVector<f64>>,
    frame: HalfSpaceFrame,
    basis: TensorHermite,
}

impl SlabSolution {
    /// Piecewise linear in the normal coordinate, constant beyond the slab.
    pub fn value(&self, x: &[f64]) -> f64 {
        let f = self.frame.to_frame(x);
        let t = f[0];
        let n = self.xi.len();
        let h = self.xi[1] - self.xi[0];
        let c = if t <= self.xi[0] {
            self.coeffs[0].clone()
        } else if t >= self.xi[n - 1] {
            self.coeffs[n - 1].clone()
        } else {
            let j = (((t - self.xi[0]) / h).floor() as usize).min(n - 2);
            let s = (t - self.xi[j]) / h;
            &self.coeffs[j] * (1.0 - s) + &self.coeffs[j + 1] * s
        };
        let mut e = BasisEval::default();
        self.basis.eval(&f[1..], false, &mut e);
        c.iter().zip(&e.value).map(|(a, b)| a * b).sum()
    }
}

impl SlabSolver {
    /// The domain problem on `{Σa_i x_i ≤ r}` with weight `U`.
    pub fn half_space(d: &LevelSetDomain, weight: &Weight, opts: SlabOptions) -> Result<Self> {
        let frame = d
            .frame()
            .ok_or_else(|| Error::Unsupported("slab solver needs a half-space".into()))?
            .clone();
        let model = d.model();
        let axis = axis_rule_for(model, weight);
        let reach = left_reach(model, weight, opts.left_cutoff);
        let below = ((frame.offset + reach) / opts.h).ceil().max(2.0) as usize;
        Self::build(model, frame, weight, weight.is_zero(), axis, below, 0, opts, true)
    }

    /// The whole-space problem with the penalized weight `V_α`, on a slab
    /// whose nodes on `Ω` coincide with those of [`SlabSolver::half_space`].
    pub fn penalized(pw: &PenalizedWeight, opts: SlabOptions) -> Result<Self> {
        let d = pw.domain();
        let frame = d
            .frame()
            .ok_or_else(|| Error::Unsupported("slab solver needs a half-space".into()))?
            .clone();
        let model = d.model();
        let axis = axis_rule_for(model, pw.weight());
        let reach = left_reach(model, pw.weight(), opts.left_cutoff);
        let below = ((frame.offset + reach) / opts.h).ceil().max(2.0) as usize;
        let above = (PENALTY_REACH * pw.alpha().sqrt() / opts.h).ceil().max(2.0) as usize;
        Self::build(model, frame, pw, false, axis, below, above, opts, false)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        model: &GaussianModel,
        frame: HalfSpaceFrame,
        weight: &dyn ScalarField,
        weight_zero: bool,
        axis: AxisRule,
        below: usize,
        above: usize,
        opts: SlabOptions,
        boundary_at_hi: bool,
    ) -> Result<Self> {
        if !(opts.h > 0.0) {
            return Err(Error::InvalidParameter("mesh width must be positive".into()));
        }
        model.check_dim(weight.dim())?;
        let n = model.dim();
        if n > 3 {
            return Err(Error::Unsupported("slab solves need n ≤ 3".into()));
        }
        let h = opts.h;
        let xi: Vec<f64> = (0..=below + above)
            .map(|j| frame.offset + (j as f64 - below as f64) * h)
            .collect();
        let tangential = if n == 1 {
            let mut r = PointRule::new(0);
            r.push(&[], 1.0);
            r
        } else {
            let (t, w) = axis.nodes();
            PointRule::tensor(&vec![(t, w); n - 1])
        };
        let basis = TensorHermite::new(n - 1, opts.tangential_degree);
        let tang_eval: Vec<BasisEval> = tangential
            .iter()
            .map(|(z, _)| {
                let mut e = BasisEval::default();
                basis.eval(z, true, &mut e);
                e
            })
            .collect();
        let mut solver = Self {
            model: model.clone(),
            frame,
            h,
            xi,
            boundary_at_hi,
            basis,
            tangential,
            tang_eval,
            nodes: Vec::new(),
            mids: Vec::new(),
        };
        let nodes: Vec<Location> = solver
            .xi
            .iter()
            .map(|&t| solver.location(t, weight, weight_zero, true))
            .collect::<Result<_>>()?;
        let mids: Vec<Location> = solver
            .xi
            .windows(2)
            .map(|w| solver.location(0.5 * (w[0] + w[1]), weight, weight_zero, false))
            .collect::<Result<_>>()?;
        solver.nodes = nodes;
        solver.mids = mids;
        Ok(solver)
    }

    fn location(&self, t: f64, weight: &dyn ScalarField, weight_zero: bool, with_hess: bool) -> Result<Location> {
        let n = self.model.dim();
        let m = self.basis.len();
        let k_count = self.tangential.len();
        let mut dens = Vec::with_capacity(k_count);
        let mut points = Vec::with_capacity(k_count * n);
        let mut vhess = Vec::new();
        let g = gaussian_density(t);
        let mut xi = vec![t; n];
        for (zt, w) in self.tangential.iter() {
            xi[1..].copy_from_slice(zt);
            let x = self.frame.to_ambient(&xi);
            let mut d = g * w;
            if !weight_zero {
                let jet = weight.jet(&x);
                if !jet.value.is_finite() {
                    return Err(Error::NonIntegrableSample { node: dens.len() });
                }
                d *= (-jet.value).exp();
                if with_hess {
                    let b = &self.frame.basis;
                    vhess.push(b.transpose() * &jet.hessian * b);
                }
            }
            dens.push(d);
            points.extend_from_slice(&x);
        }
        let mut mass = DMatrix::zeros(m, m);
        let mut stiff = DMatrix::zeros(m, m);
        let mut hess = DMatrix::zeros(m, m);
        let nt = n - 1;
        for (k, e) in self.tang_eval.iter().enumerate() {
            let d = dens[k];
            if d == 0.0 {
                continue;
            }
            for a in 0..m {
                for b in 0..=a {
                    mass[(a, b)] += d * e.value[a] * e.value[b];
                    let mut s = 0.0;
                    for i in 0..nt {
                        s += e.grad[i * m + a] * e.grad[i * m + b];
                    }
                    stiff[(a, b)] += d * s;
                    let mut q = 0.0;
                    for ij in 0..nt * nt {
                        q += e.hess[ij * m + a] * e.hess[ij * m + b];
                    }
                    hess[(a, b)] += d * q;
                }
            }
        }
        for mat in [&mut mass, &mut stiff, &mut hess] {
            for a in 0..m {
                for b in 0..a {
                    mat[(b, a)] = mat[(a, b)];
                }
            }
        }
        Ok(Location {
            dens,
            points,
            mass,
            stiff,
            hess,
            vhess,
        })
    }

    pub fn model(&self) -> &GaussianModel {
        &self.model
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Normal-coordinate nodes.
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    fn volume(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.xi.len() {
            0.5 * self.h
        } else {
            self.h
        }
    }

    pub fn solve(&self, f: &dyn ScalarField, lambda: f64) -> Result<SolveResult> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("λ must be positive, got {lambda}")));
        }
        self.model.check_dim(f.dim())?;
        let n = self.model.dim();
        let m = self.basis.len();
        let nn = self.xi.len();
        let h = self.h;
        // load vectors and ‖f‖²
        let mut rhs = Vec::with_capacity(nn);
        let mut f_norm_sq = 0.0;
        for j in 0..nn {
            let loc = &self.nodes[j];
            let vol = self.volume(j);
            let mut fj = DVector::zeros(m);
            for (k, e) in self.tang_eval.iter().enumerate() {
                let fv = f.value(&loc.points[k * n..(k + 1) * n]);
                if !fv.is_finite() {
                    return Err(Error::NonIntegrableSample { node: k });
                }
                let d = loc.dens[k];
                f_norm_sq += vol * d * fv * fv;
                for a in 0..m {
                    fj[a] += d * fv * e.value[a];
                }
            }
            rhs.push(fj * vol);
        }
        let diag: Vec<DMatrix<f64>> = (0..nn)
            .map(|j| {
                let loc = &self.nodes[j];
                let mut d = (&loc.mass * lambda + &loc.stiff) * self.volume(j);
                if j > 0 {
                    d += &self.mids[j - 1].mass / h;
                }
                if j + 1 < nn {
                    d += &self.mids[j].mass / h;
                }
                d
            })
            .collect();
        let off: Vec<DMatrix<f64>> = self.mids.iter().map(|mid| -&mid.mass / h).collect();
        let c = block_thomas(&diag, &off, &rhs)?;
        // relative residual of the block system
        let mut res_sq = 0.0;
        let mut rhs_sq = 0.0;
        for j in 0..nn {
            let mut r = &diag[j] * &c[j] - &rhs[j];
            if j > 0 {
                r += &off[j - 1] * &c[j - 1];
            }
            if j + 1 < nn {
                r += &off[j] * &c[j + 1];
            }
            res_sq += r.norm_squared();
            rhs_sq += rhs[j].norm_squared();
        }
        let system_residual = (res_sq / rhs_sq.max(f64::MIN_POSITIVE)).sqrt();
        let norms = self.norms(&c);
        let cutoff_mass = c[0].dot(&(&self.nodes[0].mass * &c[0])).max(0.0);
        if self.boundary_at_hi && cutoff_mass > CUTOFF_MASS_TOL {
            return Err(Error::CutoffInsufficient { mass: cutoff_mass });
        }
        let neumann_residual = if self.boundary_at_hi {
            let d = (&c[nn - 1] * 3.0 - &c[nn - 2] * 4.0 + &c[nn - 3]) / (2.0 * h);
            Some(d.norm())
        } else {
            None
        };
        Ok(SolveResult {
            lambda,
            norms,
            f_norm_sq,
            system_residual,
            neumann_residual,
            cutoff_mass: self.boundary_at_hi.then_some(cutoff_mass),
            solution: Solution::Slab(SlabSolution {
                xi: self.xi.clone(),
                coeffs: c,
                frame: self.frame.clone(),
                basis: self.basis.clone(),
            }),
        })
    }

    /// Discrete `L²`, gradient, Hessian and weight-form pieces consistent with the scheme.
    fn norms(&self, c: &[DVector<f64>]) -> SobolevNorms {
        let n = self.model.dim();
        let m = self.basis.len();
        let nn = c.len();
        let h = self.h;
        let mut out = SobolevNorms {
            l2_sq: 0.0,
            grad_sq: 0.0,
            hess_sq: 0.0,
            weight_form: 0.0,
        };
        for j in 0..nn {
            let loc = &self.nodes[j];
            let vol = self.volume(j);
            out.l2_sq += vol * c[j].dot(&(&loc.mass * &c[j]));
            out.grad_sq += vol * c[j].dot(&(&loc.stiff * &c[j]));
            out.hess_sq += vol * c[j].dot(&(&loc.hess * &c[j]));
            // ∂₁₁ with reflecting ghosts at both ends
            let s = if j == 0 {
                (&c[1] - &c[0]) * (2.0 / (h * h))
            } else if j + 1 == nn {
                (&c[nn - 2] - &c[nn - 1]) * (2.0 / (h * h))
            } else {
                (&c[j + 1] - &c[j] * 2.0 + &c[j - 1]) / (h * h)
            };
            out.hess_sq += vol * s.dot(&(&loc.mass * &s));
            if !loc.vhess.is_empty() {
                let d1 = if j == 0 || j + 1 == nn {
                    DVector::zeros(m)
                } else {
                    (&c[j + 1] - &c[j - 1]) / (2.0 * h)
                };
                for (k, e) in self.tang_eval.iter().enumerate() {
                    let mut g = DVector::zeros(n);
                    g[0] = d1.iter().zip(&e.value).map(|(a, b)| a * b).sum();
                    for i in 1..n {
                        g[i] = (0..m).map(|a| c[j][a] * e.grad[(i - 1) * m + a]).sum();
                    }
                    out.weight_form += vol * loc.dens[k] * (&loc.vhess[k] * &g).dot(&g);
                }
            }
        }
        for j in 0..nn - 1 {
            let mid = &self.mids[j];
            let d = (&c[j + 1] - &c[j]) / h;
            out.grad_sq += h * d.dot(&(&mid.mass * &d));
            out.hess_sq += 2.0 * h * d.dot(&(&mid.stiff * &d));
        }
        out
    }

    /// `‖a − b‖_{L²(Ω, e^{−V}μ)}` over the nodes `ξ₁ ≤ offset` of this slab, where
    /// `b` may live on a longer slab with the same nodes on `Ω`.
    pub fn l2_distance_on_domain(&self, a: &SlabSolution, b: &SlabSolution) -> Result<f64> {
        let last = self
            .xi
            .iter()
            .rposition(|t| *t <= self.frame.offset + 1e-12 * self.h)
            .unwrap_or(0);
        let mut s = 0.0;
        for j in 0..=last {
            if (a.xi[j] - self.xi[j]).abs() > 1e-9 * self.h || (b.xi[j] - self.xi[j]).abs() > 1e-9 * self.h {
                return Err(Error::InvalidParameter("slab nodes do not align".into()));
            }
            let vol = if j == 0 || j == last { 0.5 * self.h } else { self.h };
            let e = &a.coeffs[j] - &b.coeffs[j];
            s += vol * e.dot(&(&self.nodes[j].mass * &e));
        }
        Ok(s.sqrt())
    }
}

fn left_reach(model: &GaussianModel, weight: &Weight, cutoff: f64) -> f64 {
    match weight.support_radius() {
        Some(r) => {
            let smin = model.sqrt_spectrum().iter().copied().fold(f64::INFINITY, f64::min);
            cutoff.min(r / smin)
        }
        None => cutoff,
    }
}

/// Block Thomas elimination for a symmetric positive definite block tridiagonal system.
fn block_thomas(
    diag: &[DMatrix<f64>],
    off: &[DMatrix<f64>],
    rhs: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>> {
    let nn = diag.len();
    let degenerate = || Error::DiscretizationDegenerate("block pivot is not positive definite".into());
    let mut pivots = Vec::with_capacity(nn);
    let mut r = Vec::with_capacity(nn);
    let first = diag[0].clone().cholesky().ok_or_else(degenerate)?;
    r.push(rhs[0].clone());
    pivots.push(first);
    for j in 1..nn {
        let b = &off[j - 1];
        let prev = &pivots[j - 1];
        // D_j − Bᵀ P⁻¹ B with B the coupling between j−1 and j
        let pinv_b = prev.solve(b);
        let schur = &diag[j] - b.transpose() * &pinv_b;
        let schur = (&schur + schur.transpose()) * 0.5;
        let rj = &rhs[j] - b.transpose() * prev.solve(&r[j - 1]);
        pivots.push(schur.cholesky().ok_or_else(degenerate)?);
        r.push(rj);
    }
    let mut c = vec![DVector::zeros(rhs[0].len()); nn];
    c[nn - 1] = pivots[nn - 1].solve(&r[nn - 1]);
    for j in (0..nn - 1).rev() {
        let t = &r[j] - &off[j] * &c[j + 1];
        c[j] = pivots[j].solve(&t);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_data_on_half_line() {
        let m = GaussianModel::standard(1, 20).unwrap();
        let d = LevelSetDomain::half_space(&m, &[1.0], 0.0).unwrap();
        let s = SlabSolver::half_space(&d, &Weight::zero(&m), SlabOptions::default()).unwrap();
        let r = s.solve(&m.constant(2.0), 4.0).unwrap();
        let Solution::Slab(sol) = &r.solution else { unreachable!() };
        assert!(sol.coeffs.iter().all(|c| (c[0] - 0.5).abs() < 1e-12));
        assert!(r.neumann_residual.unwrap() < 1e-10);
    }

    #[test]
    fn quadratic_data_matches_closed_form() {
        // u − u'' + ξu' = ξ² on (−∞, 0], u'(0) = 0: u = (ξ² + 2)/3
        let m = GaussianModel::standard(1, 20).unwrap();
        let d = LevelSetDomain::half_space(&m, &[1.0], 0.0).unwrap();
        let s = SlabSolver::half_space(&d, &Weight::zero(&m), SlabOptions::default()).unwrap();
        let h = m.h_hat(0);
        let r = s.solve(&(&h * &h), 1.0).unwrap();
        for t in [-3.0, -1.0, -0.2, 0.0] {
            let v = r.value(&[t]);
            assert!((v - (t * t + 2.0) / 3.0).abs() < 2e-3, "{t}: {v}");
        }
    }
}
