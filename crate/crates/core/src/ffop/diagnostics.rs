use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{scattering_coupling, EigenCircle, FarFieldMatrix, Spectrum};
use crate::forward::ScattererClass;
use crate::{CMatrix, Dimension, Error, Result};

/// Relative band `(ε_lo, ε_hi)` of `|λ|/|λ_max|` used for tail statistics.
pub const DEFAULT_TAIL_BAND: (f64, f64) = (1e-8, 1e-2);

/// Eigenvalues below `max(1e-8, 1e-8 |λ_max|)` are treated as zero.
pub fn eigenvalue_floor(spectrum: &Spectrum) -> f64 {
    1e-8_f64.max(1e-8 * spectrum.max_modulus())
}

fn frobenius(m: &CMatrix) -> f64 {
    m.col_iter()
        .flat_map(|c| c.iter())
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `‖F̃F̃* − F̃*F̃‖_F / ‖F̃‖_F²`.
pub fn normality_residual(f: &FarFieldMatrix) -> f64 {
    let scale = frobenius(&f.entries);
    if scale == 0.0 {
        return 0.0;
    }
    let a = &f.entries;
    let diff = a * a.adjoint() - a.adjoint() * a;
    frobenius(&diff) / (scale * scale)
}

/// `‖F̃ − F̃* − (ik/2π) F̃*F̃‖_F / ‖F̃‖_F` in 3D. In 2D the same identity
/// with the planar coupling: `‖F̃ + (τ̄/τ) F̃* + τ̄ F̃*F̃‖_F / ‖F̃‖_F`.
pub fn relation_residual(f: &FarFieldMatrix) -> f64 {
    let scale = frobenius(&f.entries);
    if scale == 0.0 {
        return 0.0;
    }
    let tau = scattering_coupling(f.dimension(), f.wavenumber);
    let a = &f.entries;
    let gram = a.adjoint() * a;
    let ratio = tau.conj() / tau;
    let n = f.len();
    let r = CMatrix::from_fn(n, n, |i, j| {
        a[(i, j)] + ratio * a[(j, i)].conj() + tau.conj() * gram[(i, j)]
    });
    frobenius(&r) / scale
}

/// `‖(I + τF̃)*(I + τF̃) − I‖_F`.
pub fn unitarity_residual(f: &FarFieldMatrix) -> f64 {
    let tau = scattering_coupling(f.dimension(), f.wavenumber);
    let n = f.len();
    let s = CMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id + tau * f.entries[(i, j)]
    });
    let mut g = s.adjoint() * &s;
    for i in 0..n {
        g[(i, i)] -= 1.0;
    }
    frobenius(&g)
}

/// `| |λ − c| − ρ |` for every eigenvalue above the floor. The spectrum is
/// sorted, so entry `n` belongs to `spectrum.eigenvalues[n]`.
pub fn circle_residuals(spectrum: &Spectrum, k: f64, dimension: Dimension) -> Vec<f64> {
    let circle = EigenCircle::new(dimension, k);
    let floor = eigenvalue_floor(spectrum);
    spectrum
        .eigenvalues
        .iter()
        .take_while(|l| l.norm() >= floor)
        .map(|&l| circle.residual(l))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailLimit {
    /// Mean of `λ/|λ|` over the band, in the canonical circle frame.
    pub estimate: Complex64,
    pub band_count: usize,
    /// Eigenvalues above the band's lower edge whose real part has the sign
    /// excluded asymptotically for the scatterer class.
    pub wrong_sign_count: usize,
}

pub fn tail_limit(
    spectrum: &Spectrum,
    dimension: Dimension,
    band: (f64, f64),
    class: ScattererClass,
) -> Result<TailLimit> {
    let (lo, hi) = band;
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidInput(format!(
            "tail band ({lo}, {hi}) must satisfy 0 < lo < hi"
        )));
    }
    // the frame rotation does not depend on k
    let frame = EigenCircle::new(dimension, 1.0).frame;
    let top = spectrum.max_modulus();
    let floor = eigenvalue_floor(spectrum);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut band_count = 0;
    let mut wrong_sign_count = 0;
    for &l in &spectrum.eigenvalues {
        let m = l.norm();
        if m < floor || m < lo * top {
            continue;
        }
        let z = l * frame;
        if z.re * class.limit() < 0.0 {
            wrong_sign_count += 1;
        }
        if m <= hi * top {
            sum += z / m;
            band_count += 1;
        }
    }
    if band_count == 0 {
        return Err(Error::EmptyBand { lo, hi });
    }
    Ok(TailLimit {
        estimate: sum / band_count as f64,
        band_count,
        wrong_sign_count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDiagnostics {
    pub normality_residual: f64,
    pub relation_residual: f64,
    pub unitarity_residual: f64,
    pub circle_residuals: Vec<f64>,
    pub max_circle_residual: f64,
    /// Smallest imaginary part of the floored-in eigenvalues in the
    /// canonical frame; non-negative up to roundoff for non-absorbing scatterers.
    pub min_imag: f64,
    pub tail_estimate: Complex64,
    pub band_count: usize,
    pub wrong_sign_count: usize,
    pub circle_center: Complex64,
    pub circle_radius: f64,
    pub floor: f64,
}

pub fn diagnose(
    f: &FarFieldMatrix,
    spectrum: &Spectrum,
    class: ScattererClass,
    band: (f64, f64),
) -> Result<SpectralDiagnostics> {
    let dimension = f.dimension();
    let circle = EigenCircle::new(dimension, f.wavenumber);
    let residuals = circle_residuals(spectrum, f.wavenumber, dimension);
    let floor = eigenvalue_floor(spectrum);
    let min_imag = spectrum
        .eigenvalues
        .iter()
        .take(residuals.len())
        .map(|&l| circle.to_frame(l).im)
        .fold(f64::INFINITY, f64::min);
    let tail = tail_limit(spectrum, dimension, band, class)?;
    Ok(SpectralDiagnostics {
        normality_residual: normality_residual(f),
        relation_residual: relation_residual(f),
        unitarity_residual: unitarity_residual(f),
        max_circle_residual: residuals.iter().copied().fold(0.0, f64::max),
        circle_residuals: residuals,
        min_imag: if min_imag.is_finite() { min_imag } else { 0.0 },
        tail_estimate: tail.estimate,
        band_count: tail.band_count,
        wrong_sign_count: tail.wrong_sign_count,
        circle_center: circle.center,
        circle_radius: circle.radius,
        floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffop::assemble;
    use crate::forward::FarFieldKernel;
    use crate::geometry::RuleSpec;

    #[test]
    fn zero_matrix_residuals_vanish() {
        let rule = RuleSpec::Sphere {
            n_polar: 3,
            n_azimuth: 6,
        }
        .build()
        .unwrap();
        let f = assemble(&FarFieldKernel::zeros(rule, 1.0)).unwrap();
        assert_eq!(relation_residual(&f), 0.0);
        assert_eq!(unitarity_residual(&f), 0.0);
        assert_eq!(normality_residual(&f), 0.0);
    }

    #[test]
    fn zero_eigenvalue_is_below_floor() {
        let s = Spectrum {
            eigenvalues: vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
            eigenvectors: None,
        };
        assert_eq!(circle_residuals(&s, 1.0, Dimension::Three).len(), 1);
    }

    #[test]
    fn empty_band_is_reported() {
        let s = Spectrum {
            eigenvalues: vec![Complex64::new(0.0, 1.0)],
            eigenvectors: None,
        };
        let r = tail_limit(
            &s,
            Dimension::Three,
            DEFAULT_TAIL_BAND,
            ScattererClass::SoundSoft,
        );
        assert!(matches!(r, Err(Error::EmptyBand { .. })));
        assert!(tail_limit(&s, Dimension::Three, (0.1, 0.01), ScattererClass::SoundSoft).is_err());
    }
}
