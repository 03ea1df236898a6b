use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::Spectrum;
use crate::forward::{disk_farfield_constant, mie_coefficients, ScattererSpec, Shape};
use crate::{Dimension, Error, Result};

/// Eigenvalues of `F` for a centred sphere or disk with their multiplicities,
/// orders `0..=max_order`.
///
/// The kernel depends on `x̂·d` only, so spherical harmonics (3D) and
/// Fourier modes (2D) diagonalise it: `λ_l = 4π a_l/(ik)` with multiplicity
/// `2l + 1`, and `λ_n = 2πγ₂ b_n` with multiplicity 2 for `n ≥ 1`.
pub fn analytic_eigenvalues(
    spec: &ScattererSpec,
    max_order: usize,
) -> Result<Vec<(Complex64, usize)>> {
    if matches!(spec.shape, Shape::Curve { .. }) {
        return Err(Error::InvalidInput(
            "closed-form eigenvalues need a sphere or disk".into(),
        ));
    }
    let k = spec.wavenumber;
    let coeffs = mie_coefficients(&spec.centered(), max_order)?;
    Ok(match spec.dimension() {
        Dimension::Three => coeffs
            .iter()
            .enumerate()
            .map(|(l, a)| (a * 4.0 * PI / Complex64::new(0.0, k), 2 * l + 1))
            .collect(),
        Dimension::Two => {
            let g = disk_farfield_constant(k);
            coeffs
                .iter()
                .enumerate()
                .map(|(n, b)| (b * g * TAU, if n == 0 { 1 } else { 2 }))
                .collect()
        }
    })
}

/// For each expected `(λ, multiplicity)` group, the largest distance from
/// `λ` among the `multiplicity` computed eigenvalues closest to it. Groups
/// claim eigenvalues in order of decreasing `|λ|`; each computed eigenvalue
/// is used once. Returns `None` for a group when too few remain.
pub fn match_eigenvalues(spectrum: &Spectrum, expected: &[(Complex64, usize)]) -> Vec<Option<f64>> {
    let mut used = vec![false; spectrum.len()];
    let mut order: Vec<usize> = (0..expected.len()).collect();
    order.sort_by(|&a, &b| {
        expected[b]
            .0
            .norm()
            .total_cmp(&expected[a].0.norm())
            .then(a.cmp(&b))
    });
    let mut out = vec![None; expected.len()];
    for g in order {
        let (target, mult) = expected[g];
        let mut cand: Vec<(f64, usize)> = spectrum
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, l)| ((l - target).norm(), i))
            .collect();
        if cand.len() < mult {
            continue;
        }
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, i) in &cand[..mult] {
            used[i] = true;
        }
        out[g] = Some(cand[..mult].iter().map(|c| c.0).fold(0.0, f64::max));
    }
    out
}
