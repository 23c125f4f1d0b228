//! The numbers behind the three demo panels, as flat row-major `f64` tables.

use wiener_neumann::domain::LevelSetDomain;
use wiener_neumann::error::{Error, Result};
use wiener_neumann::extension::{solve_coefficients, ExtendedFunction};
use wiener_neumann::function::{CylFunction, ScalarField, ScalarMap};
use wiener_neumann::gaussian::GaussianModel;
use wiener_neumann::moreau::{prox, PenalizedWeight, Weight};
use wiener_neumann::poly::Poly;
use wiener_neumann::solver::penalize::CELLS_PER_LAYER;
use wiener_neumann::solver::{SlabOptions, SlabSolver};

pub const MOREAU_KINDS: [&str; 3] = ["quadratic", "quartic", "tilted_quartic"];
pub const EXTENSION_KINDS: [&str; 4] = ["one", "xi", "xi_squared", "cosine"];

fn line() -> GaussianModel {
    GaussianModel::standard(1, 20).expect("standard model")
}

fn grid(lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 || hi.is_nan() || lo.is_nan() || hi <= lo {
        return Err(Error::InvalidParameter("need lo < hi and at least two samples".into()));
    }
    Ok((0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect())
}

fn convex(m: &GaussianModel, kind: &str) -> Result<CylFunction> {
    let coeffs: &[f64] = match kind {
        "quadratic" => &[0.0, 0.0, 0.5],
        "quartic" => &[0.0, 0.0, 0.0, 0.0, 0.25],
        "tilted_quartic" => &[0.0, -1.0, 0.5, 0.0, 0.25],
        other => return Err(Error::InvalidParameter(format!("unknown function `{other}`"))),
    };
    Ok(m.poly(Poly::univariate(1, 0, coeffs)))
}

/// Rows `[x, f(x), f_α(x)]`.
pub fn moreau(kind: &str, alpha: f64, lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>> {
    let m = line();
    let f = convex(&m, kind)?;
    let s = m.sqrt_spectrum().clone();
    let mut out = Vec::with_capacity(3 * samples);
    for x in grid(lo, hi, samples)? {
        let p = prox(&f, &s, &[x], alpha)?;
        out.extend([x, f.value(&[x]), p.value]);
    }
    Ok(out)
}

fn data(m: &GaussianModel, kind: &str) -> Result<CylFunction> {
    let xi = m.h_hat(0);
    Ok(match kind {
        "one" => m.constant(1.0),
        "xi" => xi,
        "xi_squared" => &xi * &xi,
        "cosine" => xi.scale(2.0).map(ScalarMap::Cos),
        other => return Err(Error::InvalidParameter(format!("unknown function `{other}`"))),
    })
}

/// Rows `[x, Ef(x)]` for the half-line `{x ≤ r}`.
pub fn extension(r: f64, kind: &str, lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>> {
    let m = line();
    let d = LevelSetDomain::half_space(&m, &[1.0], r)?;
    let ef = ExtendedFunction::new(data(&m, kind)?, solve_coefficients(r)?, &d)?;
    let mut out = Vec::with_capacity(2 * samples);
    for x in grid(lo, hi, samples)? {
        out.extend([x, ef.value(&[x])]);
    }
    Ok(out)
}

pub fn extension_coefficients(r: f64) -> Result<String> {
    Ok(solve_coefficients(r)?.to_json())
}

/// Rows `[x, u_Ω(x), u_α(x)]` for `λ = 1`, `f = ξ` on `{x ≤ 0}`; `u_Ω` is NaN outside.
pub fn penalization(alpha: f64, lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>> {
    let m = line();
    let d = LevelSetDomain::half_space(&m, &[1.0], 0.0)?;
    let w = Weight::zero(&m);
    let f = m.h_hat(0);
    let opts = SlabOptions {
        h: 0.025f64.min(alpha.sqrt() / CELLS_PER_LAYER),
        ..SlabOptions::default()
    };
    let reference = SlabSolver::half_space(&d, &w, opts)?.solve(&f, 1.0)?;
    let pw = PenalizedWeight::new(&w, &d, alpha)?;
    let pen = SlabSolver::penalized(&pw, opts)?.solve(&f, 1.0)?;
    let mut out = Vec::with_capacity(3 * samples);
    for x in grid(lo, hi, samples)? {
        let inside = if x <= 0.0 { reference.value(&[x]) } else { f64::NAN };
        out.extend([x, inside, pen.value(&[x])]);
    }
    Ok(out)
}
