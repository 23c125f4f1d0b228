use proptest::prelude::*;

use wiener_neumann::divergence::ibp_residuals;
use wiener_neumann::domain::{LevelSetDomain, Region};
use wiener_neumann::function::{CylFunction, ScalarField};
use wiener_neumann::gaussian::GaussianModel;
use wiener_neumann::moreau::Weight;
use wiener_neumann::norms::sobolev_norms;
use wiener_neumann::poly::Poly;
use wiener_neumann::rng::Lcg64;

/// `E[x^k]` for `x ~ N(0, λ)` by the recursion `m_k = (k−1)λ m_{k−2}`.
fn moment(lambda: f64, k: u32) -> f64 {
    let mut m = 1.0;
    let mut j = k;
    while j >= 2 {
        m *= (j - 1) as f64 * lambda;
        j -= 2;
    }
    if k % 2 == 1 {
        0.0
    } else {
        m
    }
}

fn random_f(m: &GaussianModel, seed: u64, degree: u32) -> CylFunction {
    m.poly(Poly::random(m.dim(), degree, &mut Lcg64::new(seed)))
}

#[test]
fn quadrature_is_exact_on_monomials() {
    let q = 5;
    let m = GaussianModel::new(vec![1.5, 0.4], q).unwrap();
    let top = 2 * q as u32 - 1;
    for e0 in 0..=top {
        for e1 in 0..=top - e0 {
            let x0 = m.ambient_coordinate(0).powi(e0);
            let x1 = m.ambient_coordinate(1).powi(e1);
            let got = m.integrate_mu(&(&x0 * &x1)).unwrap();
            let want = moment(1.5, e0) * moment(0.4, e1);
            assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{e0} {e1}: {got} vs {want}");
        }
    }
}

#[test]
fn parseval_on_low_degree_polynomials() {
    let m = GaussianModel::new(vec![1.0, 0.3], 12).unwrap();
    let f = random_f(&m, 5, 4);
    let norm_sq = m.integrate_mu(&(&f * &f)).unwrap();
    let mut sum = 0.0;
    for i in 0..=4u32 {
        for j in 0..=4 - i {
            let h = m.hermite_fn(&[i, j]).unwrap();
            let c = m.integrate_mu(&(&f * &h)).unwrap();
            sum += c * c;
        }
    }
    assert!((sum - norm_sq).abs() < 1e-8 * norm_sq);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ibp_holds_on_half_spaces(seed in 0u64..10_000, r in -1.0f64..1.0, angle in 0.0f64..std::f64::consts::TAU, quartic in any::<bool>()) {
        let m = GaussianModel::new(vec![1.0, 0.5], 24).unwrap();
        let d = LevelSetDomain::half_space(&m, &[angle.cos(), angle.sin()], r).unwrap();
        let w = if quartic { Weight::radial_quartic(&m) } else { Weight::linear(&m, &[0.3, -0.2]).unwrap() };
        let prep = Region::Domain(&d).prepare(&w).unwrap();
        let phi = random_f(&m, seed, 4);
        let scale = 1.0 + sobolev_norms(&phi, &prep).unwrap().w12();
        for res in ibp_residuals(&phi, &prep).unwrap() {
            prop_assert!(res.abs() <= 1e-6 * scale, "{res}");
        }
    }

    #[test]
    fn ibp_holds_on_the_ball(seed in 0u64..10_000, l2 in 0.2f64..2.0) {
        let m = GaussianModel::new(vec![1.0, l2], 24).unwrap();
        let d = LevelSetDomain::unit_ball(&m).unwrap();
        let prep = Region::Domain(&d).prepare(&Weight::zero(&m)).unwrap();
        let phi = random_f(&m, seed, 4);
        let scale = 1.0 + sobolev_norms(&phi, &prep).unwrap().w12();
        for res in ibp_residuals(&phi, &prep).unwrap() {
            prop_assert!(res.abs() <= 1e-6 * scale, "{res}");
        }
    }

    #[test]
    fn trace_is_linear(seed in 0u64..10_000, s in -3.0f64..3.0) {
        let m = GaussianModel::new(vec![1.0, 0.5], 8).unwrap();
        let d = LevelSetDomain::unit_ball(&m).unwrap();
        let f = random_f(&m, seed, 3);
        let g = random_f(&m, seed + 1, 3);
        let tf = d.trace_restrict(&f).unwrap();
        let tg = d.trace_restrict(&g).unwrap();
        let tc = d.trace_restrict(&(&f + &g.scale(s))).unwrap();
        for k in 0..tc.len() {
            let want = tf[k] + s * tg[k];
            prop_assert!((tc[k] - want).abs() <= 1e-12 * (1.0 + tf[k].abs() + (s * tg[k]).abs()));
        }
    }

    #[test]
    fn half_space_membership_follows_the_level_set(x in -3.0f64..3.0, y in -3.0f64..3.0, r in -1.0f64..1.0) {
        let m = GaussianModel::new(vec![1.0, 0.5], 8).unwrap();
        let d = LevelSetDomain::half_space(&m, &[1.0, -2.0], r).unwrap();
        let g = x - 2.0 * y - r;
        prop_assert_eq!(d.contains(&[x, y]), g <= 0.0);
        prop_assert!((d.g().value(&[x, y]) - g).abs() < 1e-12);
    }
}
