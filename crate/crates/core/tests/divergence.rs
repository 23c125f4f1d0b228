use proptest::prelude::*;

use wiener_neumann::ball::{disc_grid, invariant_solution, ode_residual};
use wiener_neumann::divergence::{
    adjointness_residual, boundary_hessian_identity, divergence, divergence_norm_sq, random_tangent_field,
    rotation_field, z_norm_sq,
};
use wiener_neumann::domain::{LevelSetDomain, Region};
use wiener_neumann::function::{ScalarField, ScalarMap};
use wiener_neumann::gaussian::GaussianModel;
use wiener_neumann::moreau::Weight;
use wiener_neumann::poly::Poly;
use wiener_neumann::rng::Lcg64;

#[test]
fn rotation_fields_on_the_sphere() {
    let m = GaussianModel::new(vec![1.0; 3], 12).unwrap();
    let d = LevelSetDomain::unit_ball(&m).unwrap();
    let w = Weight::zero(&m);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let rot = rotation_field(&m, i, j).unwrap().claim_tangent(&d).unwrap();
        let div = divergence(&rot, &w, Some(&d)).unwrap();
        for x in [[0.1, 0.2, -0.3], [0.5, -0.5, 0.1]] {
            assert!(div.value(&x).abs() < 1e-10);
        }
        assert!(boundary_hessian_identity(&rot, &d).unwrap() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn divergence_is_linear(seed in 0u64..10_000, s in -2.0f64..2.0) {
        let m = GaussianModel::new(vec![1.0, 0.5], 12).unwrap();
        let d = LevelSetDomain::half_space(&m, &[1.0, 0.5], 0.2).unwrap();
        let w = Weight::radial_quartic(&m);
        let mut rng = Lcg64::new(seed);
        let phi = random_tangent_field(&d, 2, &mut rng).unwrap();
        let psi = random_tangent_field(&d, 2, &mut rng).unwrap();
        let combo = phi.add(&psi.scale(s));
        let (dp, dq, dc) = (
            divergence(&phi, &w, Some(&d)).unwrap(),
            divergence(&psi, &w, Some(&d)).unwrap(),
            divergence(&combo, &w, Some(&d)).unwrap(),
        );
        for x in [[0.0, 0.0], [-1.0, 0.4], [0.2, -1.1]] {
            let want = dp.value(&x) + s * dq.value(&x);
            prop_assert!((dc.value(&x) - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn adjointness_and_norm_bound(seed in 0u64..10_000, ball in any::<bool>()) {
        let m = GaussianModel::new(vec![1.0, 0.5], 24).unwrap();
        let d = if ball {
            LevelSetDomain::unit_ball(&m).unwrap()
        } else {
            LevelSetDomain::half_space(&m, &[0.3, 1.0], -0.2).unwrap()
        };
        let w = Weight::zero(&m);
        let prep = Region::Domain(&d).prepare(&w).unwrap();
        let mut rng = Lcg64::new(seed);
        let phi = random_tangent_field(&d, 2, &mut rng).unwrap();
        let f = m.poly(Poly::random(2, 3, &mut rng));
        prop_assert!(adjointness_residual(&phi, &f, &w, &prep).unwrap().abs() <= 1e-6);
        let div = divergence_norm_sq(&phi, &w, &prep).unwrap();
        let z = z_norm_sq(&phi, &prep).unwrap();
        prop_assert!(div <= z * (1.0 + 1e-12) + 1e-14);
        prop_assert!(boundary_hessian_identity(&phi, &d).unwrap() <= 1e-7);
    }

    #[test]
    fn ball_invariants_solve_the_boundary_ode(p in 1u32..4, q in 1u32..4, which in 0usize..3) {
        let m = GaussianModel::new(vec![(p * p) as f64, (q * q) as f64], 8).unwrap();
        let g = [ScalarMap::Sin, ScalarMap::Exp, ScalarMap::Poly1(vec![0.5, -1.0, 0.25])][which].clone();
        let phi = invariant_solution(&m, g).unwrap();
        for x in disc_grid(8, 24, 0.2, false) {
            let scale = 1.0 + phi.gradient(&x).norm();
            prop_assert!(ode_residual(&phi, &x).abs() <= 1e-9 * scale);
        }
    }
}
