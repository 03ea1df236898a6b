use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Condition, FarFieldKernel, ScattererSpec, Shape};
use crate::geometry::DirectionRule;
use crate::specfun::{
    bessel_j_seq, cyl_derivatives, hankel1_seq, legendre_seq_unchecked, sph_bessel_j_seq,
    sph_derivatives, sph_hankel1_seq, SeriesTruncation,
};
use crate::{CMatrix, Dimension, Error, Result};

/// `γ₂` in `u∞(x̂, d) = γ₂ Σ_n b_n e^{in(θ_x̂ - θ_d)}` for the normalisation
/// `u^s ~ e^{ikr}/√r · u∞`.
///
/// From `H_n^{(1)}(kr) ~ √(2/(πkr)) e^{i(kr - nπ/2 - π/4)}` and the
/// plane-wave expansion `e^{ikx·d} = Σ i^n J_n(kr) e^{in(θ - θ_d)}`:
/// `γ₂ = √(2/(πk)) e^{-iπ/4}`. Checked against large-argument Hankel
/// values and the Nyström solver in the test suite.
pub fn disk_farfield_constant(k: f64) -> Complex64 {
    Complex64::from_polar((2.0 / (PI * k)).sqrt(), -PI / 4.0)
}

/// Default truncation for a sphere or disk, sized on the larger of the
/// exterior and interior size parameters.
pub fn truncation_for(spec: &ScattererSpec) -> SeriesTruncation {
    let radius = match spec.shape {
        Shape::Sphere { radius } | Shape::Disk { radius } => radius,
        Shape::Curve { .. } => 1.0,
    };
    let index = match spec.condition {
        Condition::Penetrable { n } => n.sqrt().max(1.0),
        _ => 1.0,
    };
    SeriesTruncation::for_size_parameter(spec.wavenumber * radius * index)
}

/// Solves the per-order transmission system
///
/// ```text
/// c·f(k₁R)        - a·h(kR)   = g(kR)
/// c·k₁ f'(k₁R)    - a·k h'(kR) = k g'(kR)
/// ```
/// for the scattered coefficient `a`.
#[allow(clippy::too_many_arguments)]
fn transmission(
    order: usize,
    f_in: f64,
    df_in: f64,
    k_in: f64,
    g: f64,
    dg: f64,
    h: Complex64,
    dh: Complex64,
    k: f64,
) -> Result<Complex64> {
    let a11 = Complex64::new(f_in, 0.0);
    let a12 = -h;
    let a21 = Complex64::new(k_in * df_in, 0.0);
    let a22 = -dh * k;
    let det = a11 * a22 - a12 * a21;
    let scale = (a11 * a22).norm() + (a12 * a21).norm();
    if det.norm() <= 1e-14 * scale || !det.norm().is_finite() {
        return Err(Error::DegenerateTransmission {
            order,
            det: det.norm(),
            scale,
        });
    }
    let b1 = Complex64::new(g, 0.0);
    let b2 = Complex64::new(k * dg, 0.0);
    Ok((a11 * b2 - a21 * b1) / det)
}

/// Scattered-wave coefficients `a_0 .. a_max_order` (3D) or `b_0 .. b_max_order`
/// (2D, with `b_{-n} = b_n`) of a centred sphere or disk.
pub fn mie_coefficients(spec: &ScattererSpec, max_order: usize) -> Result<Vec<Complex64>> {
    spec.validate()?;
    let radius = match spec.shape {
        Shape::Sphere { radius } | Shape::Disk { radius } => radius,
        Shape::Curve { .. } => {
            return Err(Error::InvalidInput(
                "Mie coefficients exist only for spheres and disks".into(),
            ))
        }
    };
    let k = spec.wavenumber;
    let x = k * radius;
    let top = max_order + 1;
    let three_d = spec.dimension() == Dimension::Three;
    let (j, h) = if three_d {
        (sph_bessel_j_seq(top, x), sph_hankel1_seq(top, x)?)
    } else {
        (bessel_j_seq(top, x)?, hankel1_seq(top, x)?)
    };
    let (dj, dh) = if three_d {
        (sph_derivatives(&j, x), sph_derivatives(&h, x))
    } else {
        (cyl_derivatives(&j), cyl_derivatives(&h))
    };
    match spec.condition {
        Condition::Dirichlet => Ok((0..=max_order).map(|l| -j[l] / h[l]).collect()),
        Condition::Impedance { eta } => Ok((0..=max_order)
            .map(|l| -(k * dj[l] + eta * j[l]) / (dh[l] * k + h[l] * eta))
            .collect()),
        Condition::Penetrable { n } => {
            let k_in = k * n.sqrt();
            let x_in = k_in * radius;
            let f = if three_d {
                sph_bessel_j_seq(top, x_in)
            } else {
                bessel_j_seq(top, x_in)?
            };
            let df = if three_d {
                sph_derivatives(&f, x_in)
            } else {
                cyl_derivatives(&f)
            };
            (0..=max_order)
                .map(|l| transmission(l, f[l], df[l], k_in, j[l], dj[l], h[l], dh[l], k))
                .collect()
        }
    }
}

pub fn mie_coeff(spec: &ScattererSpec, order: usize) -> Result<Complex64> {
    Ok(mie_coefficients(spec, order)?[order])
}

fn check_tail(coeffs: &[Complex64], truncation: SeriesTruncation) -> Result<()> {
    let largest = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let last = truncation.max_order;
    let tail = coeffs[last].norm();
    if largest > 0.0 && tail > truncation.tail_tolerance * largest {
        return Err(Error::Truncation {
            order: last,
            tail: tail / largest,
            tolerance: truncation.tail_tolerance,
        });
    }
    Ok(())
}

/// Mie-series kernel of a centred sphere or disk.
///
/// 3D: `u∞(x̂, d) = (1/(ik)) Σ_l (2l+1) a_l P_l(x̂·d)`.
/// 2D: `u∞(x̂, d) = γ₂ (b_0 + 2 Σ_{n≥1} b_n cos nφ)`, `cos φ = x̂·d`.
/// Both sums run over the dot product only, so the kernel is exactly
/// reciprocal on an antipodally closed rule.
pub fn mie_kernel(
    spec: &ScattererSpec,
    rule: &DirectionRule,
    truncation: SeriesTruncation,
) -> Result<FarFieldKernel> {
    let coeffs = mie_coefficients(spec, truncation.max_order)?;
    check_tail(&coeffs, truncation)?;
    let k = spec.wavenumber;
    let weights: Vec<Complex64> = match spec.dimension() {
        Dimension::Three => coeffs
            .iter()
            .enumerate()
            .map(|(l, a)| a * (2 * l + 1) as f64 / Complex64::new(0.0, k))
            .collect(),
        Dimension::Two => {
            let g = disk_farfield_constant(k);
            coeffs
                .iter()
                .enumerate()
                .map(|(n, b)| b * g * if n == 0 { 1.0 } else { 2.0 })
                .collect()
        }
    };
    let three_d = spec.dimension() == Dimension::Three;
    let nodes = rule.nodes();
    let n = nodes.len();
    let lmax = truncation.max_order;
    let rows: Vec<Vec<Complex64>> = nodes
        .par_iter()
        .map(|xi| {
            let mut poly = Vec::with_capacity(lmax + 1);
            nodes
                .iter()
                .map(|dj| {
                    let t = xi.dot(dj).clamp(-1.0, 1.0);
                    if three_d {
                        legendre_seq_unchecked(lmax, t, &mut poly);
                    } else {
                        chebyshev_seq(lmax, t, &mut poly);
                    }
                    poly.iter().zip(&weights).map(|(p, w)| w * *p).sum()
                })
                .collect()
        })
        .collect();
    let values = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(FarFieldKernel::new(rule.clone(), values, k))
}

/// `T_0(t) .. T_nmax(t)`, i.e. `cos(nφ)` for `t = cos φ`.
fn chebyshev_seq(nmax: usize, t: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if nmax == 0 {
        return;
    }
    out.push(t);
    for n in 1..nmax {
        let next = 2.0 * t * out[n] - out[n - 1];
        out.push(next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_l0_vanishes_at_pi() {
        let spec = ScattererSpec::sphere(1.0, Condition::Dirichlet, PI).unwrap();
        assert!(mie_coeff(&spec, 0).unwrap().norm() < 1e-15);
    }

    #[test]
    fn curve_has_no_mie_coefficients() {
        let spec = ScattererSpec::kite(1.0, 64).unwrap();
        assert!(mie_coefficients(&spec, 3).is_err());
    }

    #[test]
    fn chebyshev_matches_cosine() {
        let mut v = Vec::new();
        let phi: f64 = 0.83;
        chebyshev_seq(12, phi.cos(), &mut v);
        for (n, t) in v.iter().enumerate() {
            assert!((t - (n as f64 * phi).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn tail_check_rejects_short_truncation() {
        let spec = ScattererSpec::sphere(1.0, Condition::Dirichlet, 10.0).unwrap();
        let rule = crate::geometry::RuleSpec::Sphere {
            n_polar: 4,
            n_azimuth: 8,
        }
        .build()
        .unwrap();
        let short = SeriesTruncation::new(3, 1e-14).unwrap();
        assert!(matches!(
            mie_kernel(&spec, &rule, short),
            Err(Error::Truncation { .. })
        ));
    }
}
