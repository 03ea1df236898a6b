//! Discretised far-field operator `(Fg)(x̂) = ∫ u∞(x̂, d) g(d) ds(d)`, its
//! spectrum, and the spectral diagnostics of non-absorbing scatterers.

mod diagnostics;
mod eigen;
mod oracle;

pub use diagnostics::{
    circle_residuals, diagnose, eigenvalue_floor, normality_residual, relation_residual,
    tail_limit, unitarity_residual, SpectralDiagnostics, TailLimit, DEFAULT_TAIL_BAND,
};
pub use eigen::{eigendecompose, Spectrum};
pub use oracle::{analytic_eigenvalues, match_eigenvalues};

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::forward::FarFieldKernel;
use crate::geometry::DirectionRule;
use crate::{CMatrix, Dimension, Error, Result};

/// `F̃ = W^{1/2} K W^{1/2}` for the kernel matrix `K` and the diagonal
/// quadrature weights `W`.
#[derive(Debug, Clone)]
pub struct FarFieldMatrix {
    pub entries: CMatrix,
    pub sqrt_weights: Vec<f64>,
    pub rule: DirectionRule,
    pub wavenumber: f64,
}

impl FarFieldMatrix {
    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dimension(&self) -> Dimension {
        self.rule.dimension()
    }

    /// Undo the weighting: `K = W^{-1/2} F̃ W^{-1/2}`.
    pub fn reconstruct_kernel(&self) -> CMatrix {
        let n = self.len();
        let s = &self.sqrt_weights;
        CMatrix::from_fn(n, n, |i, j| self.entries[(i, j)] / (s[i] * s[j]))
    }
}

pub fn assemble(kernel: &FarFieldKernel) -> Result<FarFieldMatrix> {
    let weights = kernel.rule.weights();
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "quadrature weight {w} is not positive"
        )));
    }
    let s: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let n = kernel.len();
    let entries = CMatrix::from_fn(n, n, |i, j| kernel.values[(i, j)] * (s[i] * s[j]));
    Ok(FarFieldMatrix {
        entries,
        sqrt_weights: s,
        rule: kernel.rule.clone(),
        wavenumber: kernel.wavenumber,
    })
}

/// Coupling `τ` for which `𝒮 = I + τF` is unitary.
///
/// 3D: `τ = ik/(2π)`. 2D, for `u^s ~ e^{ikr}/√r · u∞`: the disk eigenvalues
/// are `λ_n = 2πγ₂ b_n` with `1 + 2b_n` unimodular, so `τ = 1/(πγ₂)
/// = √(k/(2π)) e^{iπ/4}`.
pub fn scattering_coupling(dimension: Dimension, k: f64) -> Complex64 {
    match dimension {
        Dimension::Three => Complex64::new(0.0, k / TAU),
        Dimension::Two => Complex64::from_polar((k / TAU).sqrt(), PI / 4.0),
    }
}

/// Circle through the origin carrying every non-zero eigenvalue of `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenCircle {
    pub center: Complex64,
    pub radius: f64,
    /// Unit rotation taking `center` onto the positive imaginary axis. In
    /// this frame the circle is `|z - iρ| = ρ` in every dimension.
    pub frame: Complex64,
}

impl EigenCircle {
    pub fn new(dimension: Dimension, k: f64) -> Self {
        let tau = scattering_coupling(dimension, k);
        let center = -1.0 / tau;
        Self {
            center,
            radius: 1.0 / tau.norm(),
            frame: Complex64::new(0.0, -1.0) * tau / tau.norm(),
        }
    }

    pub fn residual(&self, lambda: Complex64) -> f64 {
        ((lambda - self.center).norm() - self.radius).abs()
    }

    pub fn to_frame(&self, lambda: Complex64) -> Complex64 {
        lambda * self.frame
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_3d_constants() {
        let k = 2.0;
        let c = EigenCircle::new(Dimension::Three, k);
        assert!((c.center - Complex64::new(0.0, TAU / k)).norm() < 1e-15);
        assert!((c.radius - TAU / k).abs() < 1e-15);
        assert!((c.frame - 1.0).norm() < 1e-15);
        assert!(c.residual(Complex64::new(0.0, 2.0 * TAU / k)) < 1e-15);
        assert!(c.residual(Complex64::new(0.0, 0.0)) < 1e-15);
    }

    #[test]
    fn circle_2d_constants() {
        let k = 1.5;
        let c = EigenCircle::new(Dimension::Two, k);
        let rho = (TAU / k).sqrt();
        assert!((c.center - Complex64::from_polar(rho, 0.75 * PI)).norm() < 1e-14);
        assert!((c.radius - rho).abs() < 1e-14);
        assert!((c.to_frame(c.center) - Complex64::new(0.0, rho)).norm() < 1e-14);
    }

    #[test]
    fn zero_kernel_assembles_to_zero() {
        let rule = crate::geometry::RuleSpec::Circle { n_circle: 8 }
            .build()
            .unwrap();
        let f = assemble(&FarFieldKernel::zeros(rule, 1.0)).unwrap();
        assert!(f
            .entries
            .col_iter()
            .flat_map(|c| c.iter())
            .all(|v| v.norm() == 0.0));
    }
}
