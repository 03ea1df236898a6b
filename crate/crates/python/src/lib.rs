//! Python bindings: scatterers, direction rules, far-field kernels, spectra,
//! phaseless datasets and retrieval.

use std::path::PathBuf;

use ffspec::cli::run_config_file;
use ffspec::ffop::{analytic_eigenvalues, assemble, diagnose, eigendecompose, DEFAULT_TAIL_BAND};
use ffspec::forward::{
    farfield_kernel, shift_kernel, Condition, FarFieldKernel, ScattererClass, ScattererSpec,
};
use ffspec::geometry::{DirectionRule, RuleSpec};
use ffspec::phaseless::{self, PairScheme, PhaselessDataset};
use ffspec::specfun::SeriesTruncation;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(ffspec_py, FfspecError, PyException);

fn err(e: ffspec::Error) -> PyErr {
    FfspecError::new_err(e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| FfspecError::new_err(e.to_string()))
}

fn condition(name: &str, eta: Option<f64>, n: Option<f64>) -> PyResult<Condition> {
    match (name, eta, n) {
        ("dirichlet", None, None) => Ok(Condition::Dirichlet),
        ("impedance", Some(eta), None) => Ok(Condition::Impedance { eta }),
        ("penetrable", None, Some(n)) => Ok(Condition::Penetrable { n }),
        _ => Err(PyValueError::new_err(
            "condition must be 'dirichlet', 'impedance' with eta, or 'penetrable' with n",
        )),
    }
}

fn class(name: &str) -> PyResult<ScattererClass> {
    match name {
        "sound_soft" => Ok(ScattererClass::SoundSoft),
        "impedance" => Ok(ScattererClass::Impedance),
        "medium_positive" => Ok(ScattererClass::MediumPositive),
        "medium_negative" => Ok(ScattererClass::MediumNegative),
        _ => Err(PyValueError::new_err(format!(
            "unknown scatterer class {name:?}"
        ))),
    }
}

fn class_name(c: ScattererClass) -> &'static str {
    match c {
        ScattererClass::SoundSoft => "sound_soft",
        ScattererClass::Impedance => "impedance",
        ScattererClass::MediumPositive => "medium_positive",
        ScattererClass::MediumNegative => "medium_negative",
    }
}

#[pyclass(name = "Scatterer", module = "ffspec_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyScatterer(ScattererSpec);

#[pymethods]
impl PyScatterer {
    #[staticmethod]
    #[pyo3(signature = (radius, k, condition = "dirichlet", eta = None, n = None))]
    fn sphere(
        radius: f64,
        k: f64,
        condition: &str,
        eta: Option<f64>,
        n: Option<f64>,
    ) -> PyResult<Self> {
        let c = self::condition(condition, eta, n)?;
        ScattererSpec::sphere(radius, c, k).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (radius, k, condition = "dirichlet", eta = None, n = None))]
    fn disk(
        radius: f64,
        k: f64,
        condition: &str,
        eta: Option<f64>,
        n: Option<f64>,
    ) -> PyResult<Self> {
        let c = self::condition(condition, eta, n)?;
        ScattererSpec::disk(radius, c, k).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (k, boundary_points = 64))]
    fn kite(k: f64, boundary_points: usize) -> PyResult<Self> {
        ScattererSpec::kite(k, boundary_points)
            .map(Self)
            .map_err(err)
    }

    fn translated(&self, offset: Vec<f64>) -> PyResult<Self> {
        self.0.clone().with_offset(offset).map(Self).map_err(err)
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.0.dimension().as_usize()
    }

    #[getter]
    fn wavenumber(&self) -> f64 {
        self.0.wavenumber
    }

    #[getter]
    fn scatterer_class(&self) -> &'static str {
        class_name(self.0.class())
    }

    /// `(λ, multiplicity)` for orders `0..=max_order` of a centred sphere or disk.
    fn analytic_eigenvalues(&self, max_order: usize) -> PyResult<Vec<(Complex64, usize)>> {
        analytic_eigenvalues(&self.0, max_order).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "Scatterer({})",
            serde_json::to_string(&self.0).unwrap_or_default()
        )
    }
}

#[pyclass(name = "Rule", module = "ffspec_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRule(DirectionRule);

#[pymethods]
impl PyRule {
    #[staticmethod]
    fn sphere(n_polar: usize, n_azimuth: usize) -> PyResult<Self> {
        RuleSpec::Sphere { n_polar, n_azimuth }
            .build()
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn circle(n: usize) -> PyResult<Self> {
        RuleSpec::Circle { n_circle: n }
            .build()
            .map(Self)
            .map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn nodes(&self) -> Vec<[f64; 3]> {
        self.0.nodes().iter().map(|d| d.0).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    fn antipode(&self, i: usize) -> PyResult<usize> {
        if i >= self.0.len() {
            return Err(PyValueError::new_err(format!("node {i} out of range")));
        }
        Ok(self.0.antipode(i))
    }
}

#[pyclass(name = "Kernel", module = "ffspec_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyKernel(FarFieldKernel);

#[pymethods]
impl PyKernel {
    #[staticmethod]
    #[pyo3(signature = (scatterer, rule, max_order = None))]
    fn compute(scatterer: &PyScatterer, rule: &PyRule, max_order: Option<usize>) -> PyResult<Self> {
        let trunc = max_order
            .map(|m| SeriesTruncation::new(m, SeriesTruncation::DEFAULT_TAIL_TOLERANCE))
            .transpose()
            .map_err(err)?;
        farfield_kernel(&scatterer.0, &rule.0, trunc)
            .map(Self)
            .map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn wavenumber(&self) -> f64 {
        self.0.wavenumber
    }

    fn get(&self, i: usize, j: usize) -> PyResult<Complex64> {
        let n = self.0.len();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!(
                "index ({i}, {j}) out of range for {n} nodes"
            )));
        }
        Ok(self.0.get(i, j))
    }

    /// Row-major nested lists of complex values.
    fn values(&self) -> Vec<Vec<Complex64>> {
        let n = self.0.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.0.get(i, j)).collect())
            .collect()
    }

    fn shifted(&self, offset: Vec<f64>) -> PyResult<Self> {
        shift_kernel(&self.0, &offset).map(Self).map_err(err)
    }

    fn conj(&self) -> Self {
        Self(self.0.map(|v| v.conj()))
    }

    fn rotated(&self, angle: f64) -> Self {
        let p = Complex64::from_polar(1.0, angle);
        Self(self.0.map(|v| v * p))
    }

    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    fn max_diff(&self, other: &PyKernel) -> f64 {
        self.0.max_diff(&other.0)
    }

    fn reciprocity_residual(&self) -> f64 {
        self.0.reciprocity_residual()
    }

    /// Eigenvalues of the weighted far-field matrix, by decreasing modulus.
    fn eigenvalues(&self, py: Python<'_>) -> PyResult<Vec<Complex64>> {
        let k = &self.0;
        py.detach(|| {
            let f = assemble(k)?;
            eigendecompose(&f, false).map(|s| s.eigenvalues)
        })
        .map_err(err)
    }

    /// Spectral diagnostics as a JSON string.
    fn diagnostics(&self, py: Python<'_>, scatterer_class: &str) -> PyResult<String> {
        let c = class(scatterer_class)?;
        let k = &self.0;
        let d = py
            .detach(|| {
                let f = assemble(k)?;
                let s = eigendecompose(&f, false)?;
                diagnose(&f, &s, c, DEFAULT_TAIL_BAND)
            })
            .map_err(err)?;
        json(&d)
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        let file = std::fs::File::create(&path).map_err(|e| FfspecError::new_err(e.to_string()))?;
        self.0
            .write_csv(std::io::BufWriter::new(file))
            .map_err(|e| FfspecError::new_err(e.to_string()))
    }
}

#[pyclass(name = "Dataset", module = "ffspec_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDataset(PhaselessDataset);

#[pymethods]
impl PyDataset {
    /// Phaseless data of `kernel`; every pair by default, or pairs with one
    /// fixed reference direction.
    #[staticmethod]
    #[pyo3(signature = (kernel, reference = None))]
    fn synthesize(kernel: &PyKernel, reference: Option<usize>) -> PyResult<Self> {
        let scheme = match reference {
            None => PairScheme::FullPairs,
            Some(reference) => PairScheme::FixedReference { reference },
        };
        phaseless::synth_dataset(&kernel.0, scheme)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn read_dir(path: PathBuf) -> PyResult<Self> {
        PhaselessDataset::read_dir(&path).map(Self).map_err(err)
    }

    fn write_dir(&self, path: PathBuf) -> PyResult<()> {
        self.0.write_dir(&path).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn r(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.0.len();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!(
                "index ({i}, {j}) out of range for {n} nodes"
            )));
        }
        Ok(self.0.r(i, j))
    }

    fn m(&self, i: usize, j: usize, l: usize) -> PyResult<f64> {
        if i >= self.0.len() {
            return Err(PyValueError::new_err(format!("row {i} out of range")));
        }
        self.0
            .m_pair(i, j, l)
            .ok_or_else(|| PyValueError::new_err(format!("pair ({j}, {l}) is not in the dataset")))
    }

    /// `(max_r_diff, max_m_diff)` against another dataset on the same pairs.
    fn difference(&self, other: &PyDataset) -> PyResult<(f64, f64)> {
        if self.0.pairs != other.0.pairs || self.0.len() != other.0.len() {
            return Err(PyValueError::new_err("datasets use different pairs"));
        }
        let d = phaseless::dataset_difference(&self.0, &other.0);
        Ok((d.max_r_diff, d.max_m_diff))
    }
}

#[pyclass(name = "Retrieved", module = "ffspec_py", frozen, skip_from_py_object)]
struct PyRetrieved(phaseless::RetrievedKernel);

#[pymethods]
impl PyRetrieved {
    #[getter]
    fn kernel(&self) -> PyKernel {
        PyKernel(self.0.kernel.clone())
    }

    #[getter]
    fn branch(&self) -> &'static str {
        match self.0.branch {
            phaseless::Branch::Direct => "direct",
            phaseless::Branch::Conjugate => "conjugate",
        }
    }

    #[getter]
    fn global_phase(&self) -> f64 {
        self.0.global_phase
    }

    fn diagnostics(&self) -> PyResult<String> {
        json(&self.0.diagnostics)
    }
}

/// Full complex kernel from phaseless data, given the scatterer class.
#[pyfunction]
fn retrieve(py: Python<'_>, dataset: &PyDataset, scatterer_class: &str) -> PyResult<PyRetrieved> {
    let c = class(scatterer_class)?;
    let ds = &dataset.0;
    py.detach(|| phaseless::retrieve(ds, c))
        .map(PyRetrieved)
        .map_err(err)
}

/// Runs a scenario config; returns the exit code.
#[pyfunction]
#[pyo3(signature = (path, output_dir = None))]
fn run_config(py: Python<'_>, path: PathBuf, output_dir: Option<PathBuf>) -> i32 {
    py.detach(|| run_config_file(&path, output_dir.as_deref()).0)
}

#[pymodule]
fn ffspec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FfspecError", m.py().get_type::<FfspecError>())?;
    m.add_class::<PyScatterer>()?;
    m.add_class::<PyRule>()?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyRetrieved>()?;
    m.add_function(wrap_pyfunction!(retrieve, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
