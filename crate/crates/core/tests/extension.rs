use proptest::prelude::*;

use wiener_neumann::domain::LevelSetDomain;
use wiener_neumann::extension::{
    boundary_probes, matching_report, solve_coefficients, solve_coefficients_lu, ExtendedFunction,
};
use wiener_neumann::function::{CylFunction, ScalarField, ScalarMap};
use wiener_neumann::gaussian::GaussianModel;
use wiener_neumann::poly::Poly;
use wiener_neumann::rng::Lcg64;

fn setup(r: f64) -> (GaussianModel, LevelSetDomain) {
    let m = GaussianModel::new(vec![1.0, 0.5], 20).unwrap();
    let d = LevelSetDomain::half_space(&m, &[1.0, 0.5], r).unwrap();
    (m, d)
}

fn random_f(m: &GaussianModel, seed: u64) -> CylFunction {
    m.poly(Poly::random(m.dim(), 4, &mut Lcg64::new(seed)))
}

/// Ambient point at normal distance `t` from the boundary along the H-normal.
fn point_at(d: &LevelSetDomain, t: f64, tangential: f64) -> Vec<f64> {
    let frame = d.frame().unwrap();
    frame.to_ambient(&[frame.offset + t, tangential])
}

/// `Σ_j a_j e^{−(c_j G + b_j G²)/(2|h|)} f(x − (j+1)G h/|h|²)` outside the
/// half-space, written out in ambient coordinates; also returns the sum of
/// the absolute values of the terms.
fn reflection_sum(f: &CylFunction, d: &LevelSetDomain, r: f64, x: &[f64]) -> (f64, f64) {
    let frame = d.frame().unwrap();
    let a = &frame.a;
    let lambda = d.model().spectrum();
    let h_sq: f64 = a.iter().zip(lambda).map(|(ai, l)| ai * ai * l).sum();
    let g: f64 = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() - r;
    let c = solve_coefficients(r).unwrap();
    let (mut sum, mut abs) = (0.0, 0.0);
    for j in 0..c.a.len() {
        let y: Vec<f64> = (0..x.len())
            .map(|i| x[i] - (j + 2) as f64 * g * lambda[i] * a[i] / h_sq)
            .collect();
        let term = c.a[j] * (-(c.c[j] * g + c.b[j] * g * g) / (2.0 * h_sq.sqrt())).exp() * f.value(&y);
        sum += term;
        abs += term.abs();
    }
    (sum, abs)
}

#[test]
fn b_vector_has_closed_form() {
    let c = solve_coefficients(0.7).unwrap();
    for (j, b) in c.b.iter().enumerate() {
        let j = (j + 1) as f64;
        assert!((b - (1.0 - 1.0 / (j * j))).abs() < 1e-15);
    }
    let expected = [0.0, 0.75, 8.0 / 9.0, 0.9375, 0.96, 35.0 / 36.0, 48.0 / 49.0];
    for (b, e) in c.b.iter().zip(expected) {
        assert!((b - e).abs() < 1e-15);
    }
}

#[test]
fn both_routes_agree() {
    for r in [0.0, 0.5, -1.0] {
        let exact = solve_coefficients(r).unwrap();
        let float = solve_coefficients_lu(r).unwrap();
        let scale = exact.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in exact.a.iter().zip(&float.a) {
            assert!((x - y).abs() <= 1e-10 * scale, "r = {r}: {x} vs {y}");
        }
    }
}

#[test]
fn constant_at_zero_offset_is_a_gaussian_sum() {
    let (m, d) = setup(0.0);
    let c = solve_coefficients(0.0).unwrap();
    let ef = ExtendedFunction::new(m.constant(1.0), c.clone(), &d).unwrap();
    let h_norm = d.frame().unwrap().h_a_norm;
    for (t, s) in [(0.1, 0.0), (0.7, -1.2), (2.0, 0.4)] {
        let x = point_at(&d, t, s);
        // G = a·x − r computed directly from the ambient point
        let g = x[0] + 0.5 * x[1];
        let expect: f64 = c.a.iter().zip(&c.b).map(|(a, b)| a * (-b * g * g / (2.0 * h_norm)).exp()).sum();
        assert!((ef.value(&x) - expect).abs() < 1e-13, "{t}");
    }
}

#[test]
fn corrupted_coefficients_are_detected() {
    let (m, d) = setup(0.5);
    let mut rng = Lcg64::new(3);
    let probes = boundary_probes(d.frame().unwrap(), &mut rng, 6);
    let xi = m.h_hat(0);
    let good = matching_report(&ExtendedFunction::new(&xi * &xi, solve_coefficients(0.5).unwrap(), &d).unwrap(), &probes);
    let bad = matching_report(
        &ExtendedFunction::new(&xi * &xi, wiener_neumann::extension::solve_corrupted(0.5, 0.1).unwrap(), &d).unwrap(),
        &probes,
    );
    assert!(good.max() < 1e-6);
    assert!(bad.c2 > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coefficient_residuals_vanish(r in -2.0f64..2.0) {
        let c = solve_coefficients(r).unwrap();
        prop_assert!(c.max_residual() <= 1e-12, "{:?}", c.residuals());
    }

    #[test]
    fn extension_is_linear(seed in 0u64..10_000, s in -3.0f64..3.0, t in 0.01f64..3.0, tan in -2.0f64..2.0) {
        let (m, d) = setup(0.4);
        let c = solve_coefficients(0.4).unwrap();
        let f = random_f(&m, seed);
        let g = random_f(&m, seed + 7);
        let ef = ExtendedFunction::new(f.clone(), c.clone(), &d).unwrap();
        let eg = ExtendedFunction::new(g.clone(), c.clone(), &d).unwrap();
        let ec = ExtendedFunction::new(&f + &g.scale(s), c, &d).unwrap();
        let x = point_at(&d, t, tan);
        let expect = ef.value(&x) + s * eg.value(&x);
        let scale = 1.0 + reflection_sum(&f, &d, 0.4, &x).1 + s.abs() * reflection_sum(&g, &d, 0.4, &x).1;
        prop_assert!((ec.value(&x) - expect).abs() <= 1e-12 * scale);
    }

    #[test]
    fn extension_matches_the_reflection_sum(seed in 0u64..10_000, t in 1e-3f64..3.0, tan in -2.0f64..2.0, r in -1.0f64..1.0) {
        let (m, d) = setup(r);
        let f = random_f(&m, seed);
        let ef = ExtendedFunction::new(f.clone(), solve_coefficients(r).unwrap(), &d).unwrap();
        let x = point_at(&d, t, tan);
        let (sum, abs) = reflection_sum(&f, &d, r, &x);
        prop_assert!((ef.value(&x) - sum).abs() <= 1e-12 * (1.0 + abs));
    }

    #[test]
    fn extension_restricts_to_the_original(seed in 0u64..10_000, t in -4.0f64..0.0, tan in -2.0f64..2.0) {
        let (m, d) = setup(-0.3);
        let f = random_f(&m, seed);
        let ef = ExtendedFunction::new(f.clone(), solve_coefficients(-0.3).unwrap(), &d).unwrap();
        let x = point_at(&d, t, tan);
        prop_assert_eq!(ef.value(&x), f.value(&x));
    }

    #[test]
    fn reflected_points_stay_in_the_domain(t in 1e-3f64..5.0, tan in -2.0f64..2.0, r in -1.0f64..1.0) {
        // log(−G) is finite exactly inside the half-space
        let (_, d) = setup(r);
        let inside_only = d.g().scale(-1.0).map(ScalarMap::Ln);
        let ef = ExtendedFunction::new(inside_only, solve_coefficients(r).unwrap(), &d).unwrap();
        let x = point_at(&d, t, tan);
        prop_assert!(ef.g_value(&x) > 0.0);
        prop_assert!(ef.value(&x).is_finite());
    }
}
