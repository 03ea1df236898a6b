use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FarFieldMatrix;
use crate::{CMatrix, Error, Result};

/// Eigenvalues sorted by decreasing modulus, with optional eigenvectors in
/// matching column order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    #[serde(skip)]
    pub eigenvectors: Option<CMatrix>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_modulus(&self) -> f64 {
        self.eigenvalues.first().map_or(0.0, |l| l.norm())
    }

    pub fn min_modulus(&self) -> f64 {
        self.eigenvalues.last().map_or(0.0, |l| l.norm())
    }

    fn sorted(mut values: Vec<Complex64>, vectors: Option<CMatrix>) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].norm().total_cmp(&values[a].norm()));
        let vectors =
            vectors.map(|u| CMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, order[j])]));
        values = order.iter().map(|&i| values[i]).collect();
        Self {
            eigenvalues: values,
            eigenvectors: vectors,
        }
    }
}

/// Dense eigendecomposition of `F̃` (Hessenberg reduction and shifted QR).
pub fn eigendecompose(f: &FarFieldMatrix, with_vectors: bool) -> Result<Spectrum> {
    eigendecompose_matrix(&f.entries, with_vectors)
}

pub(crate) fn eigendecompose_matrix(m: &CMatrix, with_vectors: bool) -> Result<Spectrum> {
    if m.col_iter()
        .flat_map(|c| c.iter())
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    if m.nrows() == 0 {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            eigenvectors: with_vectors.then(|| CMatrix::zeros(0, 0)),
        });
    }
    if with_vectors {
        let evd = m.eigen().map_err(|e| {
            Error::EigenFailed(format!("{e:?} on a {}x{} matrix", m.nrows(), m.ncols()))
        })?;
        let values: Vec<Complex64> = evd.S().column_vector().iter().copied().collect();
        let u = evd.U().to_owned();
        Ok(Spectrum::sorted(values, Some(u)))
    } else {
        let values = m.eigenvalues().map_err(|e| {
            Error::EigenFailed(format!("{e:?} on a {}x{} matrix", m.nrows(), m.ncols()))
        })?;
        Ok(Spectrum::sorted(values, None))
    }
}
