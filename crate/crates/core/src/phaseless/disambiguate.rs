use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    cross_terms, dataset_difference, reciprocity_align, row_phase_retrieval, synth_dataset,
    AlignmentReport, PairScheme, PhaselessDataset,
};
use crate::ffop::{
    assemble, eigendecompose, eigenvalue_floor, tail_limit, EigenCircle, Spectrum,
    DEFAULT_TAIL_BAND,
};
use crate::forward::{FarFieldKernel, ScattererClass};
use crate::{Error, Result};

/// Rotated spectra may dip below the real axis by this fraction of the radius.
pub const HALF_PLANE_TOLERANCE: f64 = 1e-6;

/// A branch matches the class when `Re(tail)·limit` reaches this value.
pub const TAIL_ACCEPT: f64 = 0.9;

/// Eigenvalues off the circle by more than this fraction of their modulus
/// are noise; the tail band stops above the largest of them.
pub const CIRCLE_TRUST: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Direct,
    Conjugate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub branch: Branch,
    pub accepted: bool,
    /// Rotation `α` such that `e^{-iα}λ` lies on the canonical circle.
    pub alpha: f64,
    /// Root-mean-square of `|e^{-iα}μ − iρ| − ρ` relative to `ρ`.
    pub fit_residual: f64,
    pub min_imag: f64,
    pub tail_estimate: Option<Complex64>,
    /// Lower edge of the tail band actually used, relative to `|λ_max|`.
    pub tail_band_lo: f64,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalDiagnostics {
    pub class_hint: ScattererClass,
    pub reciprocity_residual: f64,
    pub circle_fit_residual: f64,
    pub tail_estimate: Option<Complex64>,
    pub alignment: Option<AlignmentReport>,
    pub ambiguous_rows: usize,
    /// Largest difference between the input data and the data of the
    /// retrieved kernel, relative to the largest modulus.
    pub data_residual: Option<f64>,
    pub branches: Vec<BranchReport>,
}

#[derive(Debug, Clone)]
pub struct RetrievedKernel {
    pub kernel: FarFieldKernel,
    pub branch: Branch,
    /// The accepted branch of the candidate equals `e^{iα}` times `kernel`.
    pub global_phase: f64,
    pub diagnostics: RetrievalDiagnostics,
}

/// Rotation `α` minimising `Σ (|e^{-iα}μ − iρ| − ρ)²`.
///
/// Starts from the linear least-squares solution of
/// `|μ|²/(2ρ) = Re(−iμ) cos α + Im(−iμ) sin α`, which holds exactly on the
/// rotated circle, and refines with Gauss-Newton.
pub fn fit_rotation(mu: &[Complex64], rho: f64) -> f64 {
    if mu.is_empty() {
        return 0.0;
    }
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &m in mu {
        let z = Complex64::new(0.0, -1.0) * m;
        let t = m.norm_sqr() / (2.0 * rho);
        a11 += z.re * z.re;
        a12 += z.re * z.im;
        a22 += z.im * z.im;
        b1 += z.re * t;
        b2 += z.im * t;
    }
    let det = a11 * a22 - a12 * a12;
    let mut alpha = if det.abs() > 1e-12 * (a11 + a22).powi(2) {
        ((a11 * b2 - a12 * b1) / det).atan2((a22 * b1 - a12 * b2) / det)
    } else {
        // collinear eigenvalues: start from the largest on the imaginary axis
        let m = mu
            .iter()
            .copied()
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .unwrap();
        (m * Complex64::new(0.0, -1.0)).arg()
    };
    for _ in 0..50 {
        let (mut g, mut h) = (0.0, 0.0);
        let rot = Complex64::from_polar(1.0, -alpha);
        for &m in mu {
            let w = rot * m - Complex64::new(0.0, rho);
            let wn = w.norm();
            if wn == 0.0 {
                continue;
            }
            let dw = Complex64::new(0.0, -1.0) * rot * m;
            let jac = (w.conj() * dw).re / wn;
            g += (wn - rho) * jac;
            h += jac * jac;
        }
        if h == 0.0 {
            break;
        }
        let step = g / h;
        alpha -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    alpha.rem_euclid(TAU)
}

fn evaluate_branch(
    kernel: &FarFieldKernel,
    branch: Branch,
    class: ScattererClass,
) -> Result<(BranchReport, Spectrum)> {
    let f = assemble(kernel)?;
    let spectrum = eigendecompose(&f, false)?;
    let circle = EigenCircle::new(kernel.dimension(), kernel.wavenumber);
    let rho = circle.radius;
    let floor = eigenvalue_floor(&spectrum);
    let mu: Vec<Complex64> = spectrum
        .eigenvalues
        .iter()
        .filter(|l| l.norm() >= floor)
        .map(|&l| circle.to_frame(l))
        .collect();
    let alpha = fit_rotation(&mu, rho);
    let rot = Complex64::from_polar(1.0, -alpha);
    let rotated: Vec<Complex64> = mu.iter().map(|&m| rot * m).collect();
    let fit_residual = if rotated.is_empty() {
        0.0
    } else {
        (rotated
            .iter()
            .map(|z| ((z - Complex64::new(0.0, rho)).norm() - rho).powi(2))
            .sum::<f64>()
            / rotated.len() as f64)
            .sqrt()
            / rho
    };
    let min_imag = rotated.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    let min_imag = if min_imag.is_finite() { min_imag } else { 0.0 };
    let rotated_spectrum = Spectrum {
        eigenvalues: spectrum.eigenvalues.iter().map(|&l| rot * l).collect(),
        eigenvectors: None,
    };
    let top = spectrum.max_modulus();
    let untrusted = rotated
        .iter()
        .filter(|z| ((*z - Complex64::new(0.0, rho)).norm() - rho).abs() > CIRCLE_TRUST * z.norm())
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let (lo, hi) = DEFAULT_TAIL_BAND;
    let band = (lo.max(untrusted * (1.0 + 1e-12) / top), hi);
    let tail = tail_limit(&rotated_spectrum, kernel.dimension(), band, class);
    let mut reasons = Vec::new();
    if min_imag < -HALF_PLANE_TOLERANCE * rho {
        reasons.push(format!(
            "rotated spectrum leaves the upper half-plane (min Im {min_imag:.3e})"
        ));
    }
    let tail_estimate = match &tail {
        Ok(t) => {
            let score = t.estimate.re * class.limit();
            if score < TAIL_ACCEPT {
                reasons.push(format!(
                    "tail estimate {:.4} does not match the {:?} class",
                    t.estimate.re, class
                ));
            }
            Some(t.estimate)
        }
        Err(e) => {
            reasons.push(format!("no tail estimate: {e}"));
            None
        }
    };
    let report = BranchReport {
        branch,
        accepted: reasons.is_empty(),
        alpha,
        fit_residual,
        min_imag,
        tail_estimate,
        tail_band_lo: band.0,
        reason: (!reasons.is_empty()).then(|| reasons.join("; ")),
    };
    Ok((report, spectrum))
}

fn zero_result(kernel: FarFieldKernel, class: ScattererClass) -> RetrievedKernel {
    RetrievedKernel {
        kernel,
        branch: Branch::Direct,
        global_phase: 0.0,
        diagnostics: RetrievalDiagnostics {
            class_hint: class,
            reciprocity_residual: 0.0,
            circle_fit_residual: 0.0,
            tail_estimate: None,
            alignment: None,
            ambiguous_rows: 0,
            data_residual: None,
            branches: Vec::new(),
        },
    }
}

/// Resolves the global phase and conjugation of a reciprocity-aligned
/// candidate. Each branch is rotated onto the canonical eigenvalue circle
/// and accepted when its spectrum stays in the upper half-plane and its
/// normalized eigenvalues tend to the limit of the declared class.
pub fn spectral_disambiguation(
    candidate: &FarFieldKernel,
    class: ScattererClass,
) -> Result<RetrievedKernel> {
    if candidate.max_abs() == 0.0 {
        return Ok(zero_result(candidate.clone(), class));
    }
    let conjugate = candidate.map(|v| v.conj());
    let (direct, conj) = rayon::join(
        || evaluate_branch(candidate, Branch::Direct, class),
        || evaluate_branch(&conjugate, Branch::Conjugate, class),
    );
    let (direct, _) = direct?;
    let (conj, _) = conj?;
    let chosen = match (direct.accepted, conj.accepted) {
        (true, false) => direct.clone(),
        (false, true) => conj.clone(),
        _ => {
            return Err(Error::DisambiguationFailed {
                direct: Box::new(direct),
                conjugate: Box::new(conj),
            })
        }
    };
    let source = match chosen.branch {
        Branch::Direct => candidate,
        Branch::Conjugate => &conjugate,
    };
    let rot = Complex64::from_polar(1.0, -chosen.alpha);
    let kernel = source.map(|v| v * rot);
    Ok(RetrievedKernel {
        branch: chosen.branch,
        global_phase: chosen.alpha,
        diagnostics: RetrievalDiagnostics {
            class_hint: class,
            reciprocity_residual: kernel.reciprocity_residual(),
            circle_fit_residual: chosen.fit_residual,
            tail_estimate: chosen.tail_estimate,
            alignment: None,
            ambiguous_rows: 0,
            data_residual: None,
            branches: vec![direct, conj],
        },
        kernel,
    })
}

/// Full kernel from moduli and two-wave superposition moduli on every pair.
pub fn retrieve(dataset: &PhaselessDataset, class: ScattererClass) -> Result<RetrievedKernel> {
    if dataset.scheme != PairScheme::FullPairs {
        return Err(Error::InvalidInput(
            "retrieval needs superposition data for every pair of directions".into(),
        ));
    }
    let scale = dataset.max_modulus();
    if scale == 0.0 {
        return Ok(zero_result(
            FarFieldKernel::zeros(dataset.rule.clone(), dataset.wavenumber),
            class,
        ));
    }
    let cross = cross_terms(dataset)?;
    let rows = (0..dataset.len())
        .into_par_iter()
        .map(|i| row_phase_retrieval(dataset, &cross, i))
        .collect::<Result<Vec<_>>>()?;
    let ambiguous_rows = rows.iter().filter(|r| r.ambiguous).count();
    let aligned = reciprocity_align(&rows, &dataset.rule)?;
    let candidate = FarFieldKernel::new(dataset.rule.clone(), aligned.values, dataset.wavenumber);
    let mut out = spectral_disambiguation(&candidate, class)?;
    let resynth = synth_dataset(&out.kernel, dataset.scheme)?;
    let diff = dataset_difference(&resynth, dataset);
    out.diagnostics.alignment = Some(aligned.report);
    out.diagnostics.ambiguous_rows = ambiguous_rows;
    out.diagnostics.data_residual = Some(diff.max_r_diff.max(diff.max_m_diff) / scale);
    Ok(out)
}
