use std::f64::consts::PI;

use ffspec::specfun::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// 30-digit reference values from an arbitrary-precision evaluation.
#[test]
fn spherical_reference_values() {
    let cases = [
        (sph_bessel_j(5, 2.0), 0.00263516977024411734904672958611),
        (
            sph_bessel_y(5, 2.0).unwrap(),
            -18.5914453111909855622232776331,
        ),
        (sph_bessel_j(30, 10.0), 2.51205738499894291819212376904e-13),
        (
            sph_bessel_y(30, 10.0).unwrap(),
            -6908318646.09451586150291629014,
        ),
        (sph_bessel_j(60, 60.0), 0.0163121194766645292483401167465),
        (sph_bessel_j(40, 0.5), 1.40532980539512850168685561685e-73),
    ];
    for (i, (got, want)) in cases.iter().enumerate() {
        assert!(rel(*got, *want) < 1e-12, "case {i}: {got:e} vs {want:e}");
    }
    let h = sph_hankel1(4, 3.0).unwrap();
    let want = Complex64::new(
        0.0561497143288441314286323619256,
        -0.918348794725068231016493655031,
    );
    assert!((h - want).norm() / want.norm() < 1e-13);
}

#[test]
fn cylindrical_reference_values() {
    let j = |n, x| bessel_cyl(CylKind::J, n, x).unwrap();
    let h = |n, x| bessel_cyl(CylKind::H1, n, x).unwrap();
    assert!(rel(j(1, 1.0).re, 0.440050585744933515959682203719) < 1e-14);
    assert!(rel(h(1, 1.0).im, -0.781212821300288716547150000048) < 1e-13);
    assert!(rel(h(0, 0.1).im, -1.53423865135036684412239895835) < 1e-13);
    assert!(rel(j(7, 25.0).re, -0.0101681682127030741779112063507) < 1e-11);
    assert!(rel(h(7, 25.0).im, 0.162522572511132471371980400415) < 1e-12);
    assert!(rel(j(0, 50.0).re, 0.0558123276692518150047504785294) < 1e-11);
    assert!(rel(h(1, 50.0).im, -0.0567956685620147679418195492378) < 1e-11);
    assert_eq!(j(3, 2.0).im, 0.0);
}

#[test]
fn spherical_closed_forms() {
    for &x in &[0.3_f64, 1.0, 4.5, 17.0, 80.0] {
        let (s, c) = x.sin_cos();
        let j1 = s / (x * x) - c / x;
        let y1 = -c / (x * x) - s / x;
        let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
        assert!((sph_bessel_j(1, x) - j1).abs() < 1e-15 * (1.0 + 1.0 / x));
        assert!((sph_bessel_j(2, x) - j2).abs() < 1e-14);
        assert!(rel(sph_bessel_y(1, x).unwrap(), y1) < 1e-13);
    }
}

#[test]
fn half_integer_link_between_families() {
    // j_l(x) = √(π/(2x)) J_{l+1/2}(x), so j_0 and j_1 satisfy the
    // cylindrical-type recurrence in l + 1/2
    for &x in &[0.7_f64, 3.0, 12.0] {
        let j = sph_bessel_j_seq(10, x);
        for l in 1..10 {
            let lhs = j[l - 1] + j[l + 1];
            let rhs = (2 * l + 1) as f64 / x * j[l];
            assert!((lhs - rhs).abs() < 1e-13 * (lhs.abs() + rhs.abs()).max(1e-300) + 1e-300);
        }
    }
}

#[test]
fn truncation_defaults() {
    let t = SeriesTruncation::for_size_parameter(8.0);
    assert_eq!(t.max_order, (8.0 + 8.0 * 2.0 + 12.0_f64).ceil() as usize);
    assert!(SeriesTruncation::new(5, 0.0).is_err());
    assert!(SeriesTruncation::new(5, f64::NAN).is_err());
}

#[test]
fn domain_errors() {
    assert!(sph_bessel_y(2, 0.0).is_err());
    assert!(sph_hankel1(2, -1.0).is_err());
    assert!(bessel_cyl(CylKind::H1, 0, 0.0).is_err());
    assert!(bessel_cyl(CylKind::J, 0, f64::INFINITY).is_err());
    assert!(legendre_p(3, 1.5).is_err());
}

#[test]
fn legendre_closed_forms() {
    for &t in &[-1.0_f64, -0.4, 0.0, 0.33, 1.0] {
        let p3 = 0.5 * (5.0 * t * t * t - 3.0 * t);
        let p4 = (35.0 * t.powi(4) - 30.0 * t * t + 3.0) / 8.0;
        assert!((legendre_p(3, t).unwrap() - p3).abs() < 1e-15);
        assert!((legendre_p(4, t).unwrap() - p4).abs() < 1e-15);
    }
    assert_eq!(legendre_p(40, 1.0).unwrap(), 1.0);
    assert_eq!(legendre_p(41, -1.0).unwrap(), -1.0);
}

#[test]
fn hankel_large_argument_asymptotics() {
    // H_n(x) ~ √(2/(πx)) e^{i(x - nπ/2 - π/4)} (P + iQ) with
    // P = 1 − (μ−1)(μ−9)/(2(8x)²), Q = (μ−1)/(8x), μ = 4n²
    let x = 4000.0;
    for n in 0..4 {
        let h = bessel_cyl(CylKind::H1, n, x).unwrap();
        let mu = 4.0 * (n * n) as f64;
        let a = Complex64::from_polar((2.0 / (PI * x)).sqrt(), x - n as f64 * PI / 2.0 - PI / 4.0)
            * Complex64::new(
                1.0 - (mu - 1.0) * (mu - 9.0) / (2.0 * (8.0 * x).powi(2)),
                (mu - 1.0) / (8.0 * x),
            );
        assert!((h - a).norm() / a.norm() < 1e-10, "n={n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn spherical_wronskian(l in 0usize..40, x in 0.05f64..120.0) {
        // j_l y_l' − j_l' y_l = 1/x²
        let j = sph_bessel_j_seq(l + 1, x);
        let y = sph_bessel_y_seq(l + 1, x).unwrap();
        let dj = sph_derivatives(&j, x);
        let dy = sph_derivatives(&y, x);
        let w = j[l] * dy[l] - dj[l] * y[l];
        let scale = (j[l] * dy[l]).abs() + (dj[l] * y[l]).abs();
        prop_assert!((w - 1.0 / (x * x)).abs() <= 1e-12 * scale.max(1.0 / (x * x)));
    }

    #[test]
    fn cylindrical_wronskian(n in 0usize..40, x in 0.05f64..120.0) {
        // J_n Y_n' − J_n' Y_n = 2/(πx)
        let (j, y) = bessel_jy_seq(n + 1, x).unwrap();
        let dj = cyl_derivatives(&j);
        let dy = cyl_derivatives(&y);
        let w = j[n] * dy[n] - dj[n] * y[n];
        let scale = (j[n] * dy[n]).abs() + (dj[n] * y[n]).abs();
        prop_assert!((w - 2.0 / (PI * x)).abs() <= 1e-12 * scale.max(2.0 / (PI * x)));
    }

    #[test]
    fn negative_orders_reflect(n in 0i32..30, x in 0.1f64..50.0) {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let a = bessel_cyl(CylKind::H1, -n, x).unwrap();
        let b = bessel_cyl(CylKind::H1, n, x).unwrap();
        prop_assert!((a - b * sign).norm() == 0.0);
    }

    #[test]
    fn legendre_bounded(l in 0usize..200, t in -1.0f64..1.0) {
        prop_assert!(legendre_p(l, t).unwrap().abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn neumann_sum_of_j(x in 0.0f64..200.0) {
        // J_0 + 2 Σ J_{2k} = 1
        let j = bessel_j_seq(2 * (x as usize) + 60, x).unwrap();
        let s = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
        prop_assert!((s - 1.0).abs() < 1e-13);
    }
}
