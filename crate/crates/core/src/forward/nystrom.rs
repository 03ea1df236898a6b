//! Combined-field Nyström solver for sound-soft planar curves.
//!
//! The scattered field is represented as `u^s = (D - iηS)φ` with coupling
//! `η = k`, giving the second-kind equation
//! `φ + 2(K - iηS)φ = -2u^i` on the boundary. The logarithmic singularity of
//! `Φ_k(x, y) = (i/4) H_0^{(1)}(k|x - y|)` is split off and integrated with
//! trigonometric-interpolation weights, which converges spectrally on
//! smooth curves.

use std::f64::consts::{PI, TAU};

use faer::linalg::solvers::{DenseSolveCore, Solve};
use num_complex::Complex64;
use rayon::prelude::*;

use super::FarFieldKernel;
use crate::geometry::{BoundaryCurve2D, CircleQuadrature, DirectionRule};
use crate::specfun::bessel_01;
use crate::{CMatrix, Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_CONDITION: f64 = 1e12;

/// Far-field constant of the 2D fundamental solution:
/// `Φ_k(x, y) ~ e^{ik|x|}/√|x| · γ e^{-ik x̂·y}` with `γ = e^{iπ/4}/√(8πk)`.
///
/// Follows from `H_0^{(1)}(z) ~ √(2/(πz)) e^{i(z - π/4)}` and the factor
/// `i/4`; the disk comparison against the Mie series pins the phase.
pub fn single_layer_farfield_constant(k: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (8.0 * PI * k).sqrt(), PI / 4.0)
}

/// Weights `R_m`, `m = 0 .. 2n-1`, for
/// `∫_0^{2π} ln(4 sin²((t_i - τ)/2)) f(τ) dτ ≈ Σ_j R_{|i-j|} f(t_j)` on the
/// `2n` equispaced nodes `t_j = πj/n`.
pub fn kress_log_weights(n_bdry: usize) -> Vec<f64> {
    let n = n_bdry / 2;
    let nf = n as f64;
    (0..n_bdry)
        .map(|m| {
            let s: f64 = (1..n)
                .map(|p| (p as f64 * m as f64 * PI / nf).cos() / p as f64)
                .sum();
            let alt = if m % 2 == 0 { 1.0 } else { -1.0 };
            -TAU / nf * s - PI / (nf * nf) * alt
        })
        .collect()
}

/// Far-field kernel of a sound-soft curve for every incident direction of
/// `rule`, observed on the same rule.
pub fn nystrom_farfield(
    curve: &BoundaryCurve2D,
    k: f64,
    rule: &CircleQuadrature,
) -> Result<FarFieldKernel> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "wavenumber must be positive, got {k}"
        )));
    }
    let nb = curve.len();
    if nb % 2 == 1 {
        return Err(Error::InvalidInput(format!(
            "boundary point count must be even, got {nb}"
        )));
    }
    let eta = k;
    let half = nb / 2;
    let h = PI / half as f64;
    let rw = kress_log_weights(nb);
    let i_unit = Complex64::i();
    let speed: Vec<f64> = curve.tangents.iter().map(|d| d[0].hypot(d[1])).collect();
    let normals: Vec<[f64; 2]> = curve.tangents.iter().map(|d| [d[1], -d[0]]).collect();

    let rows: Vec<Vec<Complex64>> = (0..nb)
        .into_par_iter()
        .map(|i| {
            let xi = curve.points[i];
            let ti = curve.params[i];
            (0..nb)
                .map(|j| -> Result<Complex64> {
                    let (k1, k2) = if i == j {
                        let d1 = curve.tangents[i];
                        let d2 = curve.second[i];
                        let curvature_term =
                            (d1[0] * d2[1] - d1[1] * d2[0]) / (speed[i] * speed[i]);
                        let l2 = Complex64::new(-curvature_term / TAU, 0.0);
                        let m1 = -speed[i] / TAU;
                        let m2 =
                            Complex64::new(-EULER_GAMMA / PI - (0.5 * k * speed[i]).ln() / PI, 0.5)
                                * speed[i];
                        (Complex64::new(0.0, -eta * m1), l2 - i_unit * eta * m2)
                    } else {
                        let xj = curve.points[j];
                        let dx = [xi[0] - xj[0], xi[1] - xj[1]];
                        let r = dx[0].hypot(dx[1]);
                        let [j0, j1, y0, y1] = bessel_01(k * r)?;
                        let nd = normals[j][0] * dx[0] + normals[j][1] * dx[1];
                        let logterm = (4.0 * (0.5 * (ti - curve.params[j])).sin().powi(2)).ln();
                        let l = Complex64::new(0.0, 0.5 * k) * nd * Complex64::new(j1, y1) / r;
                        let l1 = -k / TAU * nd * j1 / r;
                        let m = Complex64::new(0.0, 0.5) * Complex64::new(j0, y0) * speed[j];
                        let m1 = -j0 * speed[j] / TAU;
                        let l2 = l - l1 * logterm;
                        let m2 = m - m1 * logterm;
                        (Complex64::new(l1, -eta * m1), l2 - i_unit * eta * m2)
                    };
                    let diag = if i == j { 1.0 } else { 0.0 };
                    Ok(diag + rw[i.abs_diff(j)] * k1 + h * k2)
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    let system = CMatrix::from_fn(nb, nb, |i, j| rows[i][j]);

    let dirs = &rule.nodes;
    let nd = dirs.len();
    let rhs = CMatrix::from_fn(nb, nd, |q, j| {
        let p = curve.points[q];
        -2.0 * Complex64::from_polar(1.0, k * (p[0] * dirs[j].0[0] + p[1] * dirs[j].0[1]))
    });

    let lu = system.partial_piv_lu();
    let inverse = lu.inverse();
    let condition = one_norm(&system) * one_norm(&inverse);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::SolveFailed { condition });
    }
    let density = lu.solve(&rhs);

    let gamma = single_layer_farfield_constant(k);
    let far = CMatrix::from_fn(nd, nb, |i, q| {
        let xh = dirs[i].0;
        let p = curve.points[q];
        let n_dot = normals[q][0] * xh[0] + normals[q][1] * xh[1];
        let phase = Complex64::from_polar(1.0, -k * (xh[0] * p[0] + xh[1] * p[1]));
        gamma * h * Complex64::new(0.0, -k * n_dot - eta * speed[q]) * phase
    });
    let values = &far * &density;
    if values
        .col_iter()
        .flat_map(|c| c.iter())
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::SolveFailed { condition });
    }
    Ok(FarFieldKernel::new(
        DirectionRule::Circle(rule.clone()),
        values,
        k,
    ))
}

fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_weights_integrate_constants() {
        // ∫_0^{2π} ln(4 sin²(τ/2)) dτ = 0
        let w = kress_log_weights(32);
        assert!(w.iter().sum::<f64>().abs() < 1e-13);
        // ∫ ln(4 sin²(τ/2)) cos τ dτ = -2π
        let n = 32;
        let s: f64 = (0..n).map(|j| w[j] * (PI * j as f64 / 16.0).cos()).sum();
        assert!((s + TAU).abs() < 1e-12);
    }

    #[test]
    fn odd_boundary_rejected() {
        let curve =
            BoundaryCurve2D::sample(crate::geometry::CurveShape::Kite, [0.0, 0.0], 9).unwrap();
        let rule = crate::geometry::build_s1_rule(8).unwrap();
        assert!(nystrom_farfield(&curve, 1.0, &rule).is_err());
    }
}
