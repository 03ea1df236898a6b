use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{PairScheme, PhaselessDataset, ACTIVITY_FLOOR};
use crate::{Error, Result};

/// Relative slack allowed on the triangle bounds before data are rejected.
pub const DEFAULT_DATA_TOLERANCE: f64 = 1e-6;

/// Second references with `|sin δ_b|` below this give an ill-conditioned sign test.
pub const MIN_REFERENCE_SINE: f64 = 0.1;

/// `C[i, p] = (M² − r_j² − r_l²)/2 = Re{u(x̂_i, d_j) conj(u(x̂_i, d_l))}`,
/// stored in the same layout as the superposition moduli.
#[derive(Debug, Clone)]
pub struct CrossTerms {
    pub values: Vec<f64>,
    pub pairs: usize,
}

impl CrossTerms {
    pub fn at(&self, i: usize, pair: usize) -> f64 {
        self.values[i * self.pairs + pair]
    }
}

pub fn cross_terms(dataset: &PhaselessDataset) -> Result<CrossTerms> {
    cross_terms_with_tolerance(dataset, DEFAULT_DATA_TOLERANCE)
}

/// Cross terms, rejecting any entry whose modulus violates
/// `|r_j − r_l| ≤ M ≤ r_j + r_l` by more than `tolerance·(r_j + r_l)`.
pub fn cross_terms_with_tolerance(
    dataset: &PhaselessDataset,
    tolerance: f64,
) -> Result<CrossTerms> {
    let n = dataset.len();
    let np = dataset.pairs.len();
    let slack = 1e-14 * dataset.max_modulus();
    if let Some(v) = dataset
        .moduli
        .iter()
        .chain(&dataset.superposition)
        .find(|v| !(**v >= 0.0) || !v.is_finite())
    {
        return Err(Error::InvalidInput(format!(
            "moduli must be finite and non-negative, found {v}"
        )));
    }
    let mut values = Vec::with_capacity(n * np);
    for i in 0..n {
        for (p, &(j, l)) in dataset.pairs.iter().enumerate() {
            let (rj, rl, m) = (dataset.r(i, j), dataset.r(i, l), dataset.m(i, p));
            let violation = ((rj - rl).abs() - m).max(m - (rj + rl)).max(0.0);
            if violation > tolerance * (rj + rl) + slack {
                return Err(Error::InconsistentData {
                    row: i,
                    j,
                    l,
                    violation,
                });
            }
            values.push(0.5 * (m * m - rj * rj - rl * rl));
        }
    }
    Ok(CrossTerms { values, pairs: np })
}

/// One observation row recovered up to a unit factor and possibly conjugation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedRow {
    pub values: Vec<Complex64>,
    /// Index of the largest entry, returned real positive.
    pub reference: Option<usize>,
    pub second_reference: Option<usize>,
    /// No second reference met the sine threshold; `alternate` holds the
    /// opposite sign branch.
    pub ambiguous: bool,
    pub alternate: Option<Vec<Complex64>>,
}

impl RetrievedRow {
    pub fn is_zero(&self) -> bool {
        self.reference.is_none()
    }
}

/// Phases of row `i` relative to its largest entry from the cosine of each
/// phase difference, with the signs fixed by a second reference.
pub fn row_phase_retrieval(
    dataset: &PhaselessDataset,
    cross: &CrossTerms,
    i: usize,
) -> Result<RetrievedRow> {
    if dataset.scheme != PairScheme::FullPairs {
        return Err(Error::InvalidInput(
            "row retrieval needs the full pair scheme".into(),
        ));
    }
    let n = dataset.len();
    if i >= n {
        return Err(Error::InvalidInput(format!(
            "row {i} out of range for {n} nodes"
        )));
    }
    let floor = ACTIVITY_FLOOR * dataset.max_modulus();
    let r: Vec<f64> = (0..n).map(|j| dataset.r(i, j)).collect();
    let active: Vec<usize> = (0..n).filter(|&j| r[j] > 0.0 && r[j] >= floor).collect();
    let zero = Complex64::new(0.0, 0.0);
    let mut values = vec![zero; n];

    let Some(&a) = active
        .iter()
        .max_by(|&&x, &&y| r[x].total_cmp(&r[y]).then(y.cmp(&x)))
    else {
        return Ok(RetrievedRow {
            values,
            reference: None,
            second_reference: None,
            ambiguous: false,
            alternate: None,
        });
    };
    let c = |j: usize, l: usize| {
        let p = dataset
            .pair_index(j, l)
            .expect("full pair scheme covers every pair");
        cross.at(i, p)
    };
    let cosines: Vec<f64> = (0..n)
        .map(|j| {
            if r[j] >= floor && r[j] > 0.0 {
                (c(j, a) / (r[j] * r[a])).clamp(-1.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    values[a] = Complex64::new(r[a], 0.0);

    let mut candidates: Vec<usize> = active.iter().copied().filter(|&j| j != a).collect();
    candidates.sort_by(|&x, &y| r[y].total_cmp(&r[x]).then(x.cmp(&y)));
    let sine = |j: usize| (1.0 - cosines[j] * cosines[j]).max(0.0).sqrt();
    let b = candidates
        .iter()
        .copied()
        .find(|&j| sine(j) >= MIN_REFERENCE_SINE)
        .or_else(|| {
            candidates
                .iter()
                .copied()
                .max_by(|&x, &y| sine(x).total_cmp(&sine(y)).then(y.cmp(&x)))
        });
    let Some(b) = b else {
        return Ok(RetrievedRow {
            values,
            reference: Some(a),
            second_reference: None,
            ambiguous: false,
            alternate: None,
        });
    };
    let (cos_b, sin_b) = (cosines[b], sine(b));
    let ambiguous = sin_b < MIN_REFERENCE_SINE;

    for &j in &candidates {
        let re = r[j] * cosines[j];
        let im = if j == b {
            r[b] * sin_b
        } else if sin_b > 0.0 {
            // r_j sin δ_j from C_jb = r_j r_b cos(δ_j − δ_b); its sign is the
            // branch for which the cosine-difference test holds
            (c(j, b) / r[b] - re * cos_b) / sin_b
        } else {
            r[j] * sine(j)
        };
        let z = Complex64::new(re, im);
        values[j] = if z.norm() > 0.0 {
            z * (r[j] / z.norm())
        } else {
            Complex64::new(r[j], 0.0)
        };
    }
    let alternate = ambiguous.then(|| values.iter().map(|v| v.conj()).collect());
    Ok(RetrievedRow {
        values,
        reference: Some(a),
        second_reference: Some(b),
        ambiguous,
        alternate,
    })
}
