use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ScattererSpec;
use crate::geometry::{DirectionRule, RuleSpec};
use crate::{CMatrix, Dimension, Error, Result};

/// Sampled far-field pattern; entry `(i, j)` is `u∞(x̂_i, d_j)` with both
/// directions taken from the same rule.
#[derive(Debug, Clone)]
pub struct FarFieldKernel {
    pub rule: DirectionRule,
    pub values: CMatrix,
    pub wavenumber: f64,
}

/// JSON header written next to a kernel CSV.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KernelHeader {
    pub wavenumber: f64,
    pub dimension: Dimension,
    pub rule: RuleSpec,
    pub nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatterer: Option<ScattererSpec>,
}

impl FarFieldKernel {
    pub fn new(rule: DirectionRule, values: CMatrix, wavenumber: f64) -> Self {
        assert_eq!(
            values.nrows(),
            rule.len(),
            "kernel rows must match rule size"
        );
        assert_eq!(
            values.ncols(),
            rule.len(),
            "kernel columns must match rule size"
        );
        Self {
            rule,
            values,
            wavenumber,
        }
    }

    pub fn zeros(rule: DirectionRule, wavenumber: f64) -> Self {
        let n = rule.len();
        Self::new(rule, CMatrix::zeros(n, n), wavenumber)
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dimension(&self) -> Dimension {
        self.rule.dimension()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[(i, j)]
    }

    pub fn with_values(&self, values: CMatrix) -> Self {
        Self::new(self.rule.clone(), values, self.wavenumber)
    }

    /// Entrywise map keeping rule and wavenumber.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let n = self.len();
        self.with_values(CMatrix::from_fn(n, n, |i, j| f(self.values[(i, j)])))
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.len();
        let mut m: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.values[(i, j)].norm());
            }
        }
        m
    }

    /// `max_{i,j} |K(i,j) - other(i,j)|`.
    pub fn max_diff(&self, other: &FarFieldKernel) -> f64 {
        let n = self.len();
        assert_eq!(n, other.len());
        let mut m: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                m = m.max((self.values[(i, j)] - other.values[(i, j)]).norm());
            }
        }
        m
    }

    /// `max_{i,j} |K(i,j) - K(-d_j, -x̂_i)|`.
    pub fn reciprocity_residual(&self) -> f64 {
        let n = self.len();
        let mut m: f64 = 0.0;
        for i in 0..n {
            let ai = self.rule.antipode(i);
            for j in 0..n {
                let aj = self.rule.antipode(j);
                m = m.max((self.values[(i, j)] - self.values[(aj, ai)]).norm());
            }
        }
        m
    }

    pub fn header(&self, scatterer: Option<&ScattererSpec>) -> KernelHeader {
        KernelHeader {
            wavenumber: self.wavenumber,
            dimension: self.dimension(),
            rule: self.rule.spec(),
            nodes: self.len(),
            scatterer: scatterer.cloned(),
        }
    }

    /// `i,j,re,im` rows in row-major order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,j,re,im")?;
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let v = self.values[(i, j)];
                writeln!(out, "{i},{j},{:.17e},{:.17e}", v.re, v.im)?;
            }
        }
        Ok(())
    }

    /// Reads values written by [`FarFieldKernel::write_csv`] onto `rule`.
    pub fn read_csv(text: &str, rule: DirectionRule, wavenumber: f64) -> Result<Self> {
        let n = rule.len();
        let mut values = CMatrix::zeros(n, n);
        let mut seen = 0usize;
        for (lineno, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::InvalidInput(format!("kernel csv line {}: {line:?}", lineno + 1));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad());
            }
            let i: usize = f[0].parse().map_err(|_| bad())?;
            let j: usize = f[1].parse().map_err(|_| bad())?;
            let re: f64 = f[2].parse().map_err(|_| bad())?;
            let im: f64 = f[3].parse().map_err(|_| bad())?;
            if i >= n || j >= n {
                return Err(bad());
            }
            values[(i, j)] = Complex64::new(re, im);
            seen += 1;
        }
        if seen != n * n {
            return Err(Error::InvalidInput(format!(
                "kernel csv has {seen} entries, expected {}",
                n * n
            )));
        }
        Ok(Self::new(rule, values, wavenumber))
    }
}

/// Kernel of the scatterer translated by `offset`:
/// `u_ℓ∞(x̂, d) = e^{ik ℓ·(d - x̂)} u∞(x̂, d)`.
pub fn shift_kernel(kernel: &FarFieldKernel, offset: &[f64]) -> Result<FarFieldKernel> {
    let dim = kernel.dimension().as_usize();
    if offset.len() != dim {
        return Err(Error::InvalidInput(format!(
            "offset has {} components for a {dim}-dimensional kernel",
            offset.len()
        )));
    }
    let k = kernel.wavenumber;
    let proj: Vec<f64> = kernel
        .rule
        .nodes()
        .iter()
        .map(|d| d.dot_vec(offset))
        .collect();
    let n = kernel.len();
    let values = CMatrix::from_fn(n, n, |i, j| {
        let phase = k * (proj[j] - proj[i]);
        kernel.values[(i, j)] * Complex64::from_polar(1.0, phase)
    });
    Ok(kernel.with_values(values))
}
