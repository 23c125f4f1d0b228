use wasm_demo::curves::{extension, extension_coefficients, moreau, penalization, EXTENSION_KINDS, MOREAU_KINDS};

#[test]
fn moreau_envelope_lies_below() {
    for kind in MOREAU_KINDS {
        let rows = moreau(kind, 0.3, -2.0, 2.0, 41).unwrap();
        for r in rows.chunks(3) {
            assert!(r[2] <= r[1] + 1e-12, "{kind} at {}", r[0]);
        }
    }
    // x²/2 has envelope x²/(2(1+α))
    let rows = moreau("quadratic", 0.5, -1.0, 1.0, 5).unwrap();
    for r in rows.chunks(3) {
        assert!((r[2] - r[0] * r[0] / 3.0).abs() < 1e-12);
    }
}

#[test]
fn extension_is_continuous_across_the_boundary() {
    for kind in EXTENSION_KINDS {
        let rows = extension(0.25, kind, 0.25 - 1e-7, 0.25 + 1e-7, 3).unwrap();
        assert!((rows[1] - rows[5]).abs() < 1e-5, "{kind}");
    }
    let json = extension_coefficients(0.0).unwrap();
    assert!(json.contains("\"a\""));
}

#[test]
fn penalized_solution_approaches_the_domain_solution() {
    let coarse = penalization(0.5, -3.0, 0.0, 31).unwrap();
    let fine = penalization(0.02, -3.0, 0.0, 31).unwrap();
    let err = |rows: &[f64]| rows.chunks(3).map(|r| (r[1] - r[2]).abs()).fold(0.0, f64::max);
    assert!(err(&fine) < err(&coarse));
    let outside = penalization(0.1, 0.5, 1.0, 2).unwrap();
    assert!(outside[1].is_nan() && outside[2].is_finite());
}

#[test]
fn bad_input_is_an_error() {
    assert!(moreau("abs", 0.1, -1.0, 1.0, 10).is_err());
    assert!(extension(0.0, "xi", 1.0, -1.0, 10).is_err());
}
