use std::f64::consts::PI;

use ffspec::ffop::*;
use ffspec::forward::*;
use ffspec::geometry::*;
use ffspec::specfun::SeriesTruncation;
use ffspec::Dimension;
use num_complex::Complex64;
use proptest::prelude::*;

fn sphere_rule(np: usize) -> DirectionRule {
    RuleSpec::Sphere {
        n_polar: np,
        n_azimuth: 2 * np,
    }
    .build()
    .unwrap()
}

fn spectrum_of(
    spec: &ScattererSpec,
    rule: &DirectionRule,
    max_order: Option<usize>,
) -> (FarFieldMatrix, Spectrum) {
    let trunc = max_order
        .map(|m| SeriesTruncation::new(m, SeriesTruncation::DEFAULT_TAIL_TOLERANCE).unwrap());
    let kernel = farfield_kernel(spec, rule, trunc).unwrap();
    let f = assemble(&kernel).unwrap();
    let s = eigendecompose(&f, false).unwrap();
    (f, s)
}

#[test]
fn sphere_spectrum_matches_closed_form() {
    let rule = sphere_rule(16);
    for cond in [
        Condition::Dirichlet,
        Condition::Impedance { eta: 1.0 },
        Condition::Penetrable { n: 2.0 },
    ] {
        let spec = ScattererSpec::sphere(1.0, cond, 1.0).unwrap();
        let (_, s) = spectrum_of(&spec, &rule, Some(24));
        let expected = analytic_eigenvalues(&spec, 8).unwrap();
        let top = expected.iter().map(|e| e.0.norm()).fold(0.0, f64::max);
        for (l, d) in match_eigenvalues(&s, &expected).iter().enumerate() {
            let d = d.expect("every order matched");
            assert!(d < 1e-13 * top, "{cond:?} l={l}: {d:e}");
        }
        assert_eq!(expected.iter().map(|e| e.1).sum::<usize>(), 81);
    }
}

#[test]
fn disk_spectrum_matches_closed_form() {
    let rule = RuleSpec::Circle { n_circle: 64 }.build().unwrap();
    let spec = ScattererSpec::disk(1.0, Condition::Dirichlet, 1.0).unwrap();
    let (_, s) = spectrum_of(&spec, &rule, None);
    let expected = analytic_eigenvalues(&spec, 8).unwrap();
    for d in match_eigenvalues(&s, &expected) {
        assert!(d.unwrap() < 1e-13);
    }
}

#[test]
fn circle_constants() {
    let k = 1.7;
    let c3 = EigenCircle::new(Dimension::Three, k);
    assert!((c3.center - Complex64::new(0.0, 2.0 * PI / k)).norm() < 1e-15);
    assert!((c3.radius - 2.0 * PI / k).abs() < 1e-15);
    let c2 = EigenCircle::new(Dimension::Two, k);
    let want = Complex64::from_polar((2.0 * PI / k).sqrt(), 0.75 * PI);
    assert!((c2.center - want).norm() < 1e-15);
    for c in [c3, c2] {
        assert!(c.residual(Complex64::new(0.0, 0.0)) < 1e-15);
        let z = c.to_frame(c.center);
        assert!(z.re.abs() < 1e-15 && z.im > 0.0);
    }
}

#[test]
fn residuals_vanish_for_non_absorbing_scatterers() {
    let rule = sphere_rule(16);
    for cond in [
        Condition::Dirichlet,
        Condition::Impedance { eta: -0.5 },
        Condition::Penetrable { n: 0.5 },
    ] {
        let spec = ScattererSpec::sphere(1.0, cond, 2.0).unwrap();
        let (f, s) = spectrum_of(&spec, &rule, Some(24));
        assert!(normality_residual(&f) < 1e-12, "{cond:?}");
        assert!(relation_residual(&f) < 1e-12, "{cond:?}");
        assert!(unitarity_residual(&f) < 1e-12, "{cond:?}");
        let circ = circle_residuals(&s, 2.0, Dimension::Three);
        assert!(circ.iter().all(|r| *r < 1e-12));
    }
    let kite = ScattererSpec::kite(1.0, 64).unwrap();
    let circle_rule = RuleSpec::Circle { n_circle: 64 }.build().unwrap();
    let (f, s) = spectrum_of(&kite, &circle_rule, None);
    assert!(relation_residual(&f) < 1e-9);
    assert!(unitarity_residual(&f) < 1e-9);
    assert!(circle_residuals(&s, 1.0, Dimension::Two)
        .iter()
        .all(|r| *r < 1e-9));
}

#[test]
fn absorbing_kernel_breaks_unitarity() {
    // a damped kernel is not the far field of a lossless scatterer
    let spec = ScattererSpec::sphere(1.0, Condition::Dirichlet, 1.0).unwrap();
    let kernel = farfield_kernel(&spec, &sphere_rule(8), None)
        .unwrap()
        .map(|v| v * 0.9);
    let f = assemble(&kernel).unwrap();
    assert!(unitarity_residual(&f) > 1e-3);
    assert!(relation_residual(&f) > 1e-3);
}

#[test]
fn tail_sign_follows_scatterer_class() {
    let rule = sphere_rule(16);
    for (cond, want) in [
        (Condition::Dirichlet, -1.0),
        (Condition::Impedance { eta: 1.0 }, 1.0),
        (Condition::Penetrable { n: 2.0 }, 1.0),
        (Condition::Penetrable { n: 0.5 }, -1.0),
    ] {
        let spec = ScattererSpec::sphere(1.0, cond, 1.0).unwrap();
        assert_eq!(spec.class().limit(), want);
        let (f, s) = spectrum_of(&spec, &rule, Some(24));
        let d = diagnose(&f, &s, spec.class(), DEFAULT_TAIL_BAND).unwrap();
        assert!(
            d.tail_estimate.re * want > 0.99,
            "{cond:?}: {}",
            d.tail_estimate
        );
        assert!(d.min_imag > -1e-12);
    }
}

#[test]
fn spectrum_is_translation_invariant() {
    let rule = sphere_rule(10);
    let spec = ScattererSpec::sphere(1.0, Condition::Impedance { eta: 1.0 }, 1.0).unwrap();
    let moved = spec.clone().with_offset(vec![0.2, -0.1, 0.3]).unwrap();
    let (_, a) = spectrum_of(&spec, &rule, None);
    let (_, b) = spectrum_of(&moved, &rule, None);
    let expected: Vec<(Complex64, usize)> =
        a.eigenvalues.iter().take(36).map(|l| (*l, 1)).collect();
    for d in match_eigenvalues(&b, &expected) {
        assert!(d.unwrap() < 1e-12);
    }
}

#[test]
fn eigenvectors_reconstruct_matrix() {
    let spec = ScattererSpec::sphere(1.0, Condition::Penetrable { n: 1.5 }, 1.0).unwrap();
    let f = assemble(&farfield_kernel(&spec, &sphere_rule(4), None).unwrap()).unwrap();
    let s = eigendecompose(&f, true).unwrap();
    let v = s.eigenvectors.as_ref().unwrap();
    for (c, l) in s.eigenvalues.iter().enumerate() {
        let x = v.col(c);
        let fx = &f.entries * x;
        let err: f64 = (0..f.len())
            .map(|i| (fx[i] - l * x[i]).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-13);
    }
    let k = f.reconstruct_kernel();
    let direct = farfield_kernel(&spec, &sphere_rule(4), None).unwrap();
    assert!((0..f.len()).all(|i| (k[(i, i)] - direct.get(i, i)).norm() < 1e-14));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relation_and_unitarity_hold_for_random_spheres(
        k in 0.2f64..2.0,
        radius in 0.3f64..1.2,
        eta in -2.0f64..2.0,
        n in prop_oneof![0.3f64..0.95, 1.05f64..3.0],
        which in 0usize..3,
    ) {
        let cond = [Condition::Dirichlet, Condition::Impedance { eta }, Condition::Penetrable { n }][which];
        let spec = ScattererSpec::sphere(radius, cond, k).unwrap();
        let (f, s) = spectrum_of(&spec, &sphere_rule(12), None);
        prop_assert!(relation_residual(&f) < 1e-10);
        prop_assert!(unitarity_residual(&f) < 1e-10);
        let circ = circle_residuals(&s, k, Dimension::Three);
        prop_assert!(circ.iter().all(|r| *r < 1e-10));
    }
}
