use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::forward::{farfield_kernel, FarFieldKernel, ScattererSpec};
use crate::geometry::{DirectionRule, RuleSpec};
use crate::specfun::SeriesTruncation;
use crate::{Error, Result};

/// Which incident pairs `(d_j, d_l)` carry superposition moduli.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PairScheme {
    /// Every unordered pair `j <= l`.
    FullPairs,
    /// Pairs `(d_j, d_ref)` for one fixed reference direction.
    FixedReference { reference: usize },
}

impl PairScheme {
    pub fn pairs(&self, n: usize) -> Result<Vec<(usize, usize)>> {
        match *self {
            PairScheme::FullPairs => Ok((0..n).flat_map(|j| (j..n).map(move |l| (j, l))).collect()),
            PairScheme::FixedReference { reference } => {
                if reference >= n {
                    return Err(Error::InvalidInput(format!(
                        "reference direction {reference} out of range for {n} nodes"
                    )));
                }
                Ok((0..n).map(|j| (j, reference)).collect())
            }
        }
    }
}

/// Moduli `r[i, j] = |u∞(x̂_i, d_j)|` and superposition moduli
/// `M[i, p] = |u∞(x̂_i, d_j) + u∞(x̂_i, d_l)|` for pairs `p = (j, l)`.
#[derive(Debug, Clone)]
pub struct PhaselessDataset {
    pub moduli: Vec<f64>,
    pub superposition: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    pub scheme: PairScheme,
    pub rule: DirectionRule,
    pub wavenumber: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DatasetMeta {
    pub wavenumber: f64,
    pub rule: RuleSpec,
    pub pair_scheme: PairScheme,
    pub nodes: usize,
    pub pairs: usize,
}

impl PhaselessDataset {
    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.moduli[i * self.len() + j]
    }

    pub fn m(&self, i: usize, pair: usize) -> f64 {
        self.superposition[i * self.pairs.len() + pair]
    }

    pub fn max_modulus(&self) -> f64 {
        self.moduli.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the unordered pair `{j, l}` if the scheme carries it.
    pub fn pair_index(&self, j: usize, l: usize) -> Option<usize> {
        let n = self.len();
        match self.scheme {
            PairScheme::FullPairs => {
                let (a, b) = if j <= l { (j, l) } else { (l, j) };
                // rows before `a` hold n + (n-1) + ... + (n-a+1) pairs
                (b < n).then(|| a * (2 * n - a + 1) / 2 + (b - a))
            }
            PairScheme::FixedReference { reference } => {
                if l == reference && j < n {
                    Some(j)
                } else if j == reference && l < n {
                    Some(l)
                } else {
                    None
                }
            }
        }
    }

    /// Superposition modulus for the unordered pair `{j, l}`.
    pub fn m_pair(&self, i: usize, j: usize, l: usize) -> Option<f64> {
        self.pair_index(j, l).map(|p| self.m(i, p))
    }

    pub fn meta(&self) -> DatasetMeta {
        DatasetMeta {
            wavenumber: self.wavenumber,
            rule: self.rule.spec(),
            pair_scheme: self.scheme,
            nodes: self.len(),
            pairs: self.pairs.len(),
        }
    }

    /// Writes `r.csv`, `M.csv` (one `i,j,l,m` row per entry) and `meta.json`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let n = self.len();
        let r_path = dir.join("r.csv");
        let mut out = BufWriter::new(fs::File::create(&r_path).map_err(|e| Error::io(&r_path, e))?);
        (|| -> std::io::Result<()> {
            for i in 0..n {
                let row: Vec<String> = (0..n).map(|j| format!("{:.17e}", self.r(i, j))).collect();
                writeln!(out, "{}", row.join(","))?;
            }
            out.flush()
        })()
        .map_err(|e| Error::io(&r_path, e))?;

        let m_path = dir.join("M.csv");
        let mut out = BufWriter::new(fs::File::create(&m_path).map_err(|e| Error::io(&m_path, e))?);
        (|| -> std::io::Result<()> {
            writeln!(out, "i,j,l,m")?;
            for i in 0..n {
                for (p, &(j, l)) in self.pairs.iter().enumerate() {
                    writeln!(out, "{i},{j},{l},{:.17e}", self.m(i, p))?;
                }
            }
            out.flush()
        })()
        .map_err(|e| Error::io(&m_path, e))?;

        let meta_path = dir.join("meta.json");
        let text = serde_json::to_string_pretty(&self.meta())?;
        fs::write(&meta_path, text).map_err(|e| Error::io(&meta_path, e))?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            let p = dir.join(name);
            fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
        };
        let meta: DatasetMeta = serde_json::from_str(&read("meta.json")?)?;
        let rule = meta.rule.build()?;
        let n = rule.len();
        let pairs = meta.pair_scheme.pairs(n)?;
        let parse = |s: &str, what: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad {what} value {s:?}")))
        };
        let mut moduli = Vec::with_capacity(n * n);
        for line in read("r.csv")?.lines().filter(|l| !l.trim().is_empty()) {
            for v in line.split(',') {
                moduli.push(parse(v, "r.csv")?);
            }
        }
        if moduli.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "r.csv has {} values, expected {}",
                moduli.len(),
                n * n
            )));
        }
        let mut ds = Self {
            moduli,
            superposition: vec![f64::NAN; n * pairs.len()],
            pairs,
            scheme: meta.pair_scheme,
            rule,
            wavenumber: meta.wavenumber,
        };
        let np = ds.pairs.len();
        for line in read("M.csv")?
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
        {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::InvalidInput(format!("bad M.csv line {line:?}"));
            if f.len() != 4 {
                return Err(bad());
            }
            let i: usize = f[0].parse().map_err(|_| bad())?;
            let j: usize = f[1].parse().map_err(|_| bad())?;
            let l: usize = f[2].parse().map_err(|_| bad())?;
            let p = ds.pair_index(j, l).ok_or_else(bad)?;
            if i >= n {
                return Err(bad());
            }
            ds.superposition[i * np + p] = parse(f[3], "M.csv")?;
        }
        if ds.superposition.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidInput(
                "M.csv does not cover every pair".into(),
            ));
        }
        Ok(ds)
    }
}

/// Moduli and superposition moduli of `kernel` under `scheme`.
pub fn synth_dataset(kernel: &FarFieldKernel, scheme: PairScheme) -> Result<PhaselessDataset> {
    let n = kernel.len();
    let pairs = scheme.pairs(n)?;
    let mut moduli = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            moduli.push(kernel.values[(i, j)].norm());
        }
    }
    let mut superposition = Vec::with_capacity(n * pairs.len());
    for i in 0..n {
        for &(j, l) in &pairs {
            superposition.push((kernel.values[(i, j)] + kernel.values[(i, l)]).norm());
        }
    }
    Ok(PhaselessDataset {
        moduli,
        superposition,
        pairs,
        scheme,
        rule: kernel.rule.clone(),
        wavenumber: kernel.wavenumber,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub max_r_diff: f64,
    pub max_m_diff: f64,
}

/// Largest entrywise differences between the datasets of two scatterers
/// on the same rule.
pub fn compare_datasets(
    a: &ScattererSpec,
    b: &ScattererSpec,
    rule: &DirectionRule,
    scheme: PairScheme,
    truncation: Option<SeriesTruncation>,
) -> Result<ComparisonReport> {
    if a.dimension() != b.dimension() {
        return Err(Error::InvalidInput(
            "compared scatterers differ in dimension".into(),
        ));
    }
    if a.wavenumber != b.wavenumber {
        return Err(Error::InvalidInput(format!(
            "compared scatterers differ in wavenumber: {} vs {}",
            a.wavenumber, b.wavenumber
        )));
    }
    let da = synth_dataset(&farfield_kernel(a, rule, truncation)?, scheme)?;
    let db = synth_dataset(&farfield_kernel(b, rule, truncation)?, scheme)?;
    Ok(dataset_difference(&da, &db))
}

pub fn dataset_difference(a: &PhaselessDataset, b: &PhaselessDataset) -> ComparisonReport {
    let max_diff = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    };
    ComparisonReport {
        max_r_diff: max_diff(&a.moduli, &b.moduli),
        max_m_diff: max_diff(&a.superposition, &b.superposition),
    }
}
