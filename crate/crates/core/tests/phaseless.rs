use std::f64::consts::PI;

use ffspec::forward::*;
use ffspec::geometry::*;
use ffspec::phaseless::*;
use ffspec::{CMatrix, Error};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn retrieval_rule() -> DirectionRule {
    RuleSpec::Sphere {
        n_polar: 8,
        n_azimuth: 16,
    }
    .build()
    .unwrap()
}

fn sphere_kernel(cond: Condition) -> FarFieldKernel {
    let spec = ScattererSpec::sphere(1.0, cond, 1.0).unwrap();
    farfield_kernel(&spec, &retrieval_rule(), None).unwrap()
}

fn relative(a: &FarFieldKernel, b: &FarFieldKernel) -> f64 {
    a.max_diff(b) / b.max_abs()
}

/// Smallest `max|x − e^{iφ} y|` over `φ`, for `y` and `conj(y)`.
fn distance_up_to_phase(x: &[Complex64], y: &[Complex64]) -> f64 {
    let fit = |y: &dyn Fn(usize) -> Complex64| {
        let s: Complex64 = (0..x.len()).map(|j| x[j] * y(j).conj()).sum();
        let ph = if s.norm() > 0.0 {
            s / s.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        (0..x.len())
            .map(|j| (x[j] - ph * y(j)).norm())
            .fold(0.0, f64::max)
    };
    fit(&|j| y[j]).min(fit(&|j| y[j].conj()))
}

fn small_kernel(rows: &[&[Complex64]]) -> FarFieldKernel {
    let n = rows.len();
    let rule = RuleSpec::Circle { n_circle: n }.build().unwrap();
    FarFieldKernel::new(rule, CMatrix::from_fn(n, n, |i, j| rows[i][j]), 1.0)
}

#[test]
fn synthesis_examples() {
    let kernel = sphere_kernel(Condition::Dirichlet);
    let ds = synth_dataset(&kernel, PairScheme::FullPairs).unwrap();
    let n = ds.len();
    assert_eq!(ds.pairs.len(), n * (n + 1) / 2);
    for i in [0, 17, n - 1] {
        for j in [0, 5, n - 1] {
            assert_eq!(ds.m_pair(i, j, j).unwrap(), 2.0 * ds.r(i, j));
        }
    }
    let zero = synth_dataset(
        &FarFieldKernel::zeros(retrieval_rule(), 1.0),
        PairScheme::FullPairs,
    )
    .unwrap();
    assert!(zero
        .moduli
        .iter()
        .chain(&zero.superposition)
        .all(|v| *v == 0.0));

    let shifted = shift_kernel(&kernel, &[0.1, 0.0, 0.0]).unwrap();
    let scheme = PairScheme::FixedReference { reference: 3 };
    let diff = dataset_difference(
        &synth_dataset(&kernel, scheme).unwrap(),
        &synth_dataset(&shifted, scheme).unwrap(),
    );
    assert!(diff.max_r_diff <= 1e-12);
    assert!(diff.max_m_diff > 0.0);
}

#[test]
fn cross_term_examples() {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    let k = small_kernel(&[&[one, i], &[i, one]]);
    let ds = synth_dataset(&k, PairScheme::FullPairs).unwrap();
    let c = cross_terms(&ds).unwrap();
    let p = ds.pair_index(0, 1).unwrap();
    assert!(c.at(0, p).abs() < 1e-15);
    assert!((c.at(0, ds.pair_index(0, 0).unwrap()) - 1.0).abs() < 1e-15);

    let kernel = sphere_kernel(Condition::Dirichlet);
    let ds = synth_dataset(&kernel, PairScheme::FullPairs).unwrap();
    let c = cross_terms(&ds).unwrap();
    let mut worst: f64 = 0.0;
    for i in (0..ds.len()).step_by(7) {
        for (p, &(j, l)) in ds.pairs.iter().enumerate() {
            let want = (kernel.get(i, j) * kernel.get(i, l).conj()).re;
            worst = worst.max((c.at(i, p) - want).abs());
        }
    }
    assert!(worst < 1e-12 * kernel.max_abs().powi(2), "{worst:e}");
}

#[test]
fn inconsistent_data_is_rejected() {
    let kernel = sphere_kernel(Condition::Dirichlet);
    let mut ds = synth_dataset(&kernel, PairScheme::FullPairs).unwrap();
    let p = ds.pair_index(2, 40).unwrap();
    let at = 5 * ds.pairs.len() + p;
    ds.superposition[at] = ds.r(5, 2) + ds.r(5, 40) + 0.1;
    assert!(matches!(
        cross_terms(&ds),
        Err(Error::InconsistentData { row: 5, .. })
    ));
    ds.superposition[at] = f64::NAN;
    assert!(cross_terms(&ds).is_err());
}

#[test]
fn row_retrieval_examples() {
    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let single = small_kernel(&[&[z, Complex64::new(0.0, -2.0)], &[z, z]]);
    let ds = synth_dataset(&single, PairScheme::FullPairs).unwrap();
    let row = row_phase_retrieval(&ds, &cross_terms(&ds).unwrap(), 0).unwrap();
    assert_eq!(row.values, vec![z, Complex64::new(2.0, 0.0)]);
    let zero = row_phase_retrieval(&ds, &cross_terms(&ds).unwrap(), 1).unwrap();
    assert!(zero.is_zero() && zero.values.iter().all(|v| *v == z));

    let u = [
        one,
        Complex64::from_polar(1.0, PI / 3.0),
        Complex64::from_polar(1.0, -PI / 2.0),
        z,
    ];
    let k = small_kernel(&[&u, &[z; 4], &[z; 4], &[z; 4]]);
    let ds = synth_dataset(&k, PairScheme::FullPairs).unwrap();
    let row = row_phase_retrieval(&ds, &cross_terms(&ds).unwrap(), 0).unwrap();
    assert!(distance_up_to_phase(&row.values, &u) < 1e-15);

    let kernel = sphere_kernel(Condition::Dirichlet);
    let ds = synth_dataset(&kernel, PairScheme::FullPairs).unwrap();
    let c = cross_terms(&ds).unwrap();
    let n = ds.len();
    for i in [0, 31, 64, n - 1] {
        let row = row_phase_retrieval(&ds, &c, i).unwrap();
        let truth: Vec<Complex64> = (0..n).map(|j| kernel.get(i, j)).collect();
        assert!(distance_up_to_phase(&row.values, &truth) < 1e-8, "row {i}");
    }
}

#[test]
fn row_with_collinear_phases_is_ambiguous() {
    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let k = small_kernel(&[&[one, -one, one * 0.5, z], &[z; 4], &[z; 4], &[z; 4]]);
    let ds = synth_dataset(&k, PairScheme::FullPairs).unwrap();
    let row = row_phase_retrieval(&ds, &cross_terms(&ds).unwrap(), 0).unwrap();
    assert!(row.ambiguous);
    assert_eq!(row.alternate.as_ref().unwrap()[1], -one);
    assert!(distance_up_to_phase(&row.values, &[one, -one, one * 0.5, z]) < 1e-15);
}

#[test]
fn alignment_examples() {
    let kernel = sphere_kernel(Condition::Dirichlet);
    let ds = synth_dataset(&kernel, PairScheme::FullPairs).unwrap();
    let c = cross_terms(&ds).unwrap();
    let rows: Vec<RetrievedRow> = (0..ds.len())
        .map(|i| row_phase_retrieval(&ds, &c, i).unwrap())
        .collect();
    let aligned = reciprocity_align(&rows, &kernel.rule).unwrap();
    let cand = kernel.with_values(aligned.values.clone());
    let flat = |k: &FarFieldKernel| -> Vec<Complex64> {
        (0..k.len())
            .flat_map(|i| (0..k.len()).map(move |j| (i, j)))
            .map(|(i, j)| k.get(i, j))
            .collect()
    };
    assert!(distance_up_to_phase(&flat(&cand), &flat(&kernel)) < 1e-7 * kernel.max_abs());
    assert!(aligned.report.worst_link_residual < 1e-10);

    // rows carrying the true phases need no correction
    let truth: Vec<RetrievedRow> = (0..kernel.len())
        .map(|i| RetrievedRow {
            values: (0..kernel.len()).map(|j| kernel.get(i, j)).collect(),
            reference: Some(0),
            second_reference: Some(1),
            ambiguous: false,
            alternate: None,
        })
        .collect();
    let same = reciprocity_align(&truth, &kernel.rule).unwrap();
    let ph0 = same.phases[0];
    let c0 = same.conjugated[0];
    for i in 0..kernel.len() {
        let d = (same.phases[i] - ph0).rem_euclid(2.0 * PI);
        assert!(d.min(2.0 * PI - d) < 1e-12);
        assert_eq!(same.conjugated[i], c0);
    }
}

#[test]
fn kite_alignment_matches_forward_kernel() {
    let spec = ScattererSpec::kite(1.0, 64).unwrap();
    let rule = RuleSpec::Circle { n_circle: 64 }.build().unwrap();
    let kernel = farfield_kernel(&spec, &rule, None).unwrap();
    let ds = synth_dataset(&kernel, PairScheme::FullPairs).unwrap();
    let c = cross_terms(&ds).unwrap();
    let rows: Vec<RetrievedRow> = (0..ds.len())
        .map(|i| row_phase_retrieval(&ds, &c, i).unwrap())
        .collect();
    let aligned = reciprocity_align(&rows, &rule).unwrap();
    let flat_a: Vec<Complex64> = aligned
        .values
        .col_iter()
        .flat_map(|c| c.iter().copied().collect::<Vec<_>>())
        .collect();
    let flat_k: Vec<Complex64> = kernel
        .values
        .col_iter()
        .flat_map(|c| c.iter().copied().collect::<Vec<_>>())
        .collect();
    assert!(distance_up_to_phase(&flat_a, &flat_k) < 1e-5 * kernel.max_abs());
    let out = retrieve(&ds, spec.class()).unwrap();
    assert!(relative(&out.kernel, &kernel) <= 1e-4);
}

#[test]
fn disconnected_link_graph_is_reported() {
    // only u∞(x̂_i, −x̂_i) is non-zero, so no two rows share a link
    let rule = RuleSpec::Circle { n_circle: 8 }.build().unwrap();
    let values = CMatrix::from_fn(8, 8, |i, j| {
        if j == rule.antipode(i) {
            Complex64::new(1.0, 0.5)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let ds = synth_dataset(
        &FarFieldKernel::new(rule, values, 1.0),
        PairScheme::FullPairs,
    )
    .unwrap();
    match retrieve(&ds, ScattererClass::SoundSoft) {
        Err(Error::AlignmentImpossible { components }) => assert!(components.len() > 1),
        other => panic!("expected an alignment error, got {other:?}"),
    }
}

#[test]
fn disambiguation_examples() {
    let truth = sphere_kernel(Condition::Dirichlet);
    let rotated = truth.map(|v| v * Complex64::from_polar(1.0, 0.7));
    let out = spectral_disambiguation(&rotated, ScattererClass::SoundSoft).unwrap();
    assert_eq!(out.branch, Branch::Direct);
    assert!((out.global_phase - 0.7).abs() < 1e-6);
    assert!(relative(&out.kernel, &truth) < 1e-7);

    let truth = sphere_kernel(Condition::Impedance { eta: 1.0 });
    let out = spectral_disambiguation(&truth.map(|v| v.conj()), ScattererClass::Impedance).unwrap();
    assert_eq!(out.branch, Branch::Conjugate);
    assert!(relative(&out.kernel, &truth) < 1e-7);
}

#[test]
fn retrieval_round_trips() {
    for (cond, class) in [
        (Condition::Dirichlet, ScattererClass::SoundSoft),
        (Condition::Impedance { eta: 1.0 }, ScattererClass::Impedance),
        (
            Condition::Penetrable { n: 2.0 },
            ScattererClass::MediumPositive,
        ),
    ] {
        let kernel = sphere_kernel(cond);
        let ds = synth_dataset(&kernel, PairScheme::FullPairs).unwrap();
        let out = retrieve(&ds, class).unwrap();
        assert!(relative(&out.kernel, &kernel) <= 1e-6, "{cond:?}");
        assert!(out.diagnostics.data_residual.unwrap() < 1e-10);
        let again = synth_dataset(&out.kernel, PairScheme::FullPairs).unwrap();
        assert!(dataset_difference(&again, &ds).max_r_diff < 1e-12 * kernel.max_abs());
    }
}

#[test]
fn zero_data_give_zero_kernel() {
    let ds = synth_dataset(
        &FarFieldKernel::zeros(retrieval_rule(), 1.0),
        PairScheme::FullPairs,
    )
    .unwrap();
    let out = retrieve(&ds, ScattererClass::SoundSoft).unwrap();
    assert_eq!(out.kernel.max_abs(), 0.0);
    assert_eq!(out.branch, Branch::Direct);
    assert_eq!(out.global_phase, 0.0);
}

#[test]
fn reduced_data_are_not_retrieved() {
    let ds = synth_dataset(
        &sphere_kernel(Condition::Dirichlet),
        PairScheme::FixedReference { reference: 0 },
    )
    .unwrap();
    assert!(matches!(
        retrieve(&ds, ScattererClass::SoundSoft),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn small_noise_moves_retrieval_little() {
    let kernel = sphere_kernel(Condition::Dirichlet);
    let ds = synth_dataset(&kernel, PairScheme::FullPairs).unwrap();
    let clean = retrieve(&ds, ScattererClass::SoundSoft).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut noisy = ds.clone();
    for v in noisy
        .moduli
        .iter_mut()
        .chain(noisy.superposition.iter_mut())
    {
        *v *= 1.0 + 1e-8 * rng.gen_range(-1.0..1.0);
    }
    let out = retrieve(&noisy, ScattererClass::SoundSoft).unwrap();
    assert!(relative(&out.kernel, &clean.kernel) <= 1e-5);
}

#[test]
fn dataset_directory_round_trip() {
    let kernel = sphere_kernel(Condition::Impedance { eta: 1.0 });
    let dir = tempfile::tempdir().unwrap();
    for scheme in [
        PairScheme::FullPairs,
        PairScheme::FixedReference { reference: 9 },
    ] {
        let ds = synth_dataset(&kernel, scheme).unwrap();
        let path = dir.path().join(format!("{scheme:?}"));
        ds.write_dir(&path).unwrap();
        for f in ["r.csv", "M.csv", "meta.json"] {
            assert!(path.join(f).is_file());
        }
        let back = PhaselessDataset::read_dir(&path).unwrap();
        assert_eq!(back.moduli, ds.moduli);
        assert_eq!(back.superposition, ds.superposition);
        assert_eq!(back.scheme, scheme);
        assert_eq!(back.meta(), ds.meta());
    }
}

#[test]
fn compare_examples() {
    let rule = retrieval_rule();
    let a = ScattererSpec::sphere(1.0, Condition::Dirichlet, 1.0).unwrap();
    let scheme = PairScheme::FixedReference { reference: 0 };
    let same = compare_datasets(&a, &a, &rule, scheme, None).unwrap();
    assert_eq!((same.max_r_diff, same.max_m_diff), (0.0, 0.0));
    let moved = a.clone().with_offset(vec![0.1, 0.0, 0.0]).unwrap();
    let rep = compare_datasets(&a, &moved, &rule, scheme, None).unwrap();
    assert!(rep.max_r_diff <= 1e-12 && rep.max_m_diff > 1e-3);
    let big = ScattererSpec::sphere(1.1, Condition::Dirichlet, 1.0).unwrap();
    assert!(
        compare_datasets(&a, &big, &rule, scheme, None)
            .unwrap()
            .max_r_diff
            > 1e-3
    );
    let other_k = ScattererSpec::sphere(1.0, Condition::Dirichlet, 2.0).unwrap();
    assert!(compare_datasets(&a, &other_k, &rule, scheme, None).is_err());
}

fn arbitrary_kernel() -> impl Strategy<Value = FarFieldKernel> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36).prop_map(|v| {
        let rule = RuleSpec::Circle { n_circle: 6 }.build().unwrap();
        FarFieldKernel::new(
            rule,
            CMatrix::from_fn(6, 6, |i, j| Complex64::new(v[6 * i + j].0, v[6 * i + j].1)),
            1.0,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesized_data_are_consistent(kernel in arbitrary_kernel()) {
        let ds = synth_dataset(&kernel, PairScheme::FullPairs).unwrap();
        for i in 0..ds.len() {
            for (p, &(j, l)) in ds.pairs.iter().enumerate() {
                let (rj, rl, m) = (ds.r(i, j), ds.r(i, l), ds.m(i, p));
                let c = (m * m - rj * rj - rl * rl) / 2.0;
                prop_assert!(c.abs() <= rj * rl * (1.0 + 1e-12) + 1e-15);
                prop_assert!((rj - rl).abs() <= m + 1e-15 && m <= rj + rl + 1e-15);
            }
        }
        prop_assert!(cross_terms(&ds).is_ok());
    }

    #[test]
    fn translation_changes_only_superpositions(
        dir in prop::array::uniform3(-1.0f64..1.0),
        len in 0.05f64..1.0,
    ) {
        let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        prop_assume!(norm > 1e-3);
        let off: Vec<f64> = dir.iter().map(|v| v * len / norm).collect();
        let a = ScattererSpec::sphere(1.0, Condition::Dirichlet, 1.0).unwrap();
        let b = a.clone().with_offset(off).unwrap();
        let rep = compare_datasets(&a, &b, &retrieval_rule(), PairScheme::FixedReference { reference: 0 }, None).unwrap();
        prop_assert!(rep.max_r_diff <= 1e-12);
        prop_assert!(rep.max_m_diff > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn retrieval_quotients_out_phase_and_conjugation(gamma in 0.0f64..(2.0 * PI)) {
        let kernel = sphere_kernel(Condition::Impedance { eta: 1.0 });
        let class = ScattererClass::Impedance;
        let base = retrieve(&synth_dataset(&kernel, PairScheme::FullPairs).unwrap(), class).unwrap();
        let rotated = kernel.map(|v| v * Complex64::from_polar(1.0, gamma));
        let conj = kernel.map(|v| (v * Complex64::from_polar(1.0, gamma)).conj());
        for k in [rotated, conj] {
            let out = retrieve(&synth_dataset(&k, PairScheme::FullPairs).unwrap(), class).unwrap();
            prop_assert!(relative(&out.kernel, &base.kernel) < 1e-10);
        }
    }
}
