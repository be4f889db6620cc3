//! Python bindings for `fracframe`.
//!
//! Structured results (certificates, frame reports, experiment tables) are
//! returned as plain dicts built from their JSON form.

use ff::fourier::PreparedMeasure;
use ff::frames::experiments;
use ff::frames::{EigenConfig, FrequencySet, Provenance};
use ff::measures::{AtomBudget, AtomicMeasure};
use ff::rational::{format_rational, parse_rational, RationalPoint};
use fracframe_core as ff;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyComplex;
use serde::Serialize;

create_exception!(fracframe, FracframeError, PyException);

fn err(e: ff::Error) -> PyErr {
    FracframeError::new_err(e.to_string())
}

fn budget(b: Option<usize>) -> AtomBudget {
    b.map(AtomBudget).unwrap_or_else(AtomBudget::from_env)
}

fn eigen(b: usize) -> EigenConfig {
    EigenConfig {
        budget: b,
        ..EigenConfig::default()
    }
}

fn to_dict<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| FracframeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn point(coords: &[String]) -> PyResult<RationalPoint> {
    Ok(RationalPoint(
        coords
            .iter()
            .map(|c| parse_rational(c))
            .collect::<ff::Result<_>>()
            .map_err(err)?,
    ))
}

fn column(v: &[i64]) -> Vec<Vec<i64>> {
    v.iter().map(|x| vec![*x]).collect()
}

#[pyclass(frozen, skip_from_py_object, module = "fracframe")]
#[derive(Clone)]
pub struct DigitSystem {
    inner: ff::measures::DigitSystem,
}

#[pymethods]
impl DigitSystem {
    #[new]
    fn new(matrix: Vec<Vec<i64>>, digits: Vec<Vec<i64>>) -> PyResult<Self> {
        let inner = ff::measures::DigitSystem::new(matrix, digits).map_err(err)?;
        Ok(DigitSystem { inner })
    }

    /// One-dimensional system `(n, digits)`.
    #[staticmethod]
    fn scalar(n: i64, digits: Vec<i64>) -> PyResult<Self> {
        let inner = ff::measures::DigitSystem::scalar(n, &digits).map_err(err)?;
        Ok(DigitSystem { inner })
    }

    /// Compact form `"N:b1,b2,.."`.
    #[staticmethod]
    fn parse(s: &str) -> PyResult<Self> {
        let inner = ff::measures::DigitSystem::parse_compact(s).map_err(err)?;
        Ok(DigitSystem { inner })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        let inner = ff::measures::DigitSystem::from_json(s).map_err(err)?;
        Ok(DigitSystem { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<i64>> {
        self.inner.matrix.clone()
    }

    #[getter]
    fn digits(&self) -> Vec<Vec<i64>> {
        self.inner.digits.clone()
    }

    fn validate(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &self.inner.validate().map_err(err)?)
    }

    /// Level-`n` measure.
    #[pyo3(signature = (n, budget=None))]
    fn level(&self, py: Python<'_>, n: usize, budget: Option<usize>) -> PyResult<Measure> {
        let b = self::budget(budget);
        let inner = py
            .detach(|| ff::measures::level_measure(&self.inner, n, b))
            .map_err(err)?;
        Ok(Measure { inner })
    }

    /// Fourier transform of the infinite measure at `xi`, certified to `eps`.
    #[pyo3(signature = (xi, eps=1e-12))]
    fn mu_hat<'py>(
        &self,
        py: Python<'py>,
        xi: Vec<f64>,
        eps: f64,
    ) -> PyResult<Bound<'py, PyComplex>> {
        let z = ff::fourier::mu_hat(&self.inner, &xi, eps)
            .map_err(err)?
            .value();
        Ok(PyComplex::from_doubles(py, z.re, z.im))
    }

    fn __repr__(&self) -> String {
        format!(
            "DigitSystem(matrix={:?}, digits={:?})",
            self.inner.matrix, self.inner.digits
        )
    }
}

/// Finitely supported measure with exact rational locations and weights.
#[pyclass(frozen, skip_from_py_object, module = "fracframe")]
#[derive(Clone)]
pub struct Measure {
    inner: AtomicMeasure,
}

#[pymethods]
impl Measure {
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Measure {
            inner: AtomicMeasure::from_json(s).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Total mass as a rational string.
    fn total(&self) -> String {
        format_rational(self.inner.total())
    }

    /// `(coordinates, weight)` pairs as rational strings.
    fn atoms(&self) -> Vec<(Vec<String>, String)> {
        self.inner
            .atoms()
            .iter()
            .map(|a| {
                (
                    a.location.coords().iter().map(format_rational).collect(),
                    format_rational(&a.weight),
                )
            })
            .collect()
    }

    fn locations(&self) -> Vec<Vec<f64>> {
        self.inner.float_locations()
    }

    fn weights(&self) -> Vec<f64> {
        self.inner.weights_f64()
    }

    #[pyo3(signature = (other, budget=None))]
    fn convolve(
        &self,
        py: Python<'_>,
        other: &Measure,
        budget: Option<usize>,
    ) -> PyResult<Measure> {
        let b = self::budget(budget);
        let inner = py
            .detach(|| ff::measures::convolve(&self.inner, &other.inner, b))
            .map_err(err)?;
        Ok(Measure { inner })
    }

    /// Translate by a rational vector given as strings such as `"1/3"`.
    fn translate(&self, t: Vec<String>) -> PyResult<Measure> {
        Ok(Measure {
            inner: ff::measures::translate(&self.inner, &point(&t)?).map_err(err)?,
        })
    }

    fn __add__(&self, other: &Measure) -> PyResult<Measure> {
        Ok(Measure {
            inner: ff::measures::add(&self.inner, &other.inner).map_err(err)?,
        })
    }

    /// Exact finite Fourier sum at `xi`.
    fn fourier<'py>(&self, py: Python<'py>, xi: Vec<f64>) -> PyResult<Bound<'py, PyComplex>> {
        let rows = ff::fourier::measure_grid(&self.inner, &[xi]).map_err(err)?;
        Ok(PyComplex::from_doubles(py, rows[0].re, rows[0].im))
    }

    /// Frame bounds of the exponentials at `frequencies`.
    #[pyo3(signature = (frequencies, eigen_budget=4096))]
    fn frame_bounds(
        &self,
        py: Python<'_>,
        frequencies: Vec<Vec<f64>>,
        eigen_budget: usize,
    ) -> PyResult<Py<PyAny>> {
        let lambda =
            FrequencySet::new(self.inner.dim(), frequencies, Provenance::User).map_err(err)?;
        let cfg = eigen(eigen_budget);
        let report = py
            .detach(|| ff::frames::frame_bounds(&PreparedMeasure::new(&self.inner), &lambda, &cfg))
            .map_err(err)?;
        to_dict(py, &report)
    }

    fn __repr__(&self) -> String {
        format!(
            "Measure(dim={}, atoms={}, total={})",
            self.inner.dim(),
            self.inner.len(),
            self.total()
        )
    }
}

/// Norm-criterion certificate for `(R, B, C)`.
#[pyfunction]
fn packing_norm_criterion(
    py: Python<'_>,
    matrix: Vec<Vec<i64>>,
    b: Vec<Vec<i64>>,
    c: Vec<Vec<i64>>,
) -> PyResult<Py<PyAny>> {
    to_dict(
        py,
        &ff::packing::packing_norm_criterion(&matrix, &b, &c).map_err(err)?,
    )
}

/// Finite-level separation certificate for two systems.
#[pyfunction]
#[pyo3(signature = (first, second, level, budget=None))]
fn packing_finite_level(
    py: Python<'_>,
    first: &DigitSystem,
    second: &DigitSystem,
    level: usize,
    budget: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let b = self::budget(budget);
    let cert = py
        .detach(|| {
            let a = ff::measures::attractor_points(&first.inner, level, b)?;
            let c = ff::measures::attractor_points(&second.inner, level, b)?;
            ff::packing::packing_certificate_finite_level(&a, &c)
        })
        .map_err(err)?;
    to_dict(py, &cert)
}

/// Recomputes a certificate from its JSON text; raises on mismatch.
#[pyfunction]
fn verify_certificate(py: Python<'_>, json: &str) -> PyResult<Py<PyAny>> {
    to_dict(py, &ff::packing::verify_certificate(json).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (nu, lam, t, level, budget=None))]
fn singularity_witness(
    py: Python<'_>,
    nu: &DigitSystem,
    lam: &DigitSystem,
    t: Vec<String>,
    level: usize,
    budget: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let t = point(&t)?;
    let b = self::budget(budget);
    let w = py
        .detach(|| ff::packing::singularity_witness(&nu.inner, &lam.inner, &t, level, b))
        .map_err(err)?;
    to_dict(py, &w)
}

#[pyfunction]
fn find_hadamard_partner(system: &DigitSystem) -> PyResult<Option<Vec<Vec<i64>>>> {
    ff::frames::find_hadamard_partner(&system.inner.matrix, &system.inner.digits).map_err(err)
}

/// Level-`n` spectrum generated by the Hadamard partner `l`.
#[pyfunction]
#[pyo3(signature = (system, l, n, budget=None))]
fn jp_spectrum(
    system: &DigitSystem,
    l: Vec<Vec<i64>>,
    n: usize,
    budget: Option<usize>,
) -> PyResult<Vec<Vec<f64>>> {
    let s =
        ff::frames::jp_spectrum_checked(&system.inner, &l, n, self::budget(budget)).map_err(err)?;
    Ok(s.freqs().to_vec())
}

#[pyfunction]
#[pyo3(signature = (nu, lam, t, level, frequencies, ks, eigen_budget=4096, budget=None))]
#[allow(clippy::too_many_arguments)]
fn degeneracy_experiment(
    py: Python<'_>,
    nu: &DigitSystem,
    lam: &DigitSystem,
    t: Vec<String>,
    level: usize,
    frequencies: Vec<Vec<f64>>,
    ks: Vec<u64>,
    eigen_budget: usize,
    budget: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let t = point(&t)?;
    let spec = FrequencySet::new(nu.inner.dim(), frequencies, Provenance::User).map_err(err)?;
    let (cfg, b) = (eigen(eigen_budget), self::budget(budget));
    let table = py
        .detach(|| {
            experiments::degeneracy_experiment(
                &nu.inner, &lam.inner, &t, level, &spec, &ks, &cfg, b,
            )
        })
        .map_err(err)?;
    to_dict(py, &table)
}

#[pyfunction]
#[pyo3(signature = (level, thetas_deg, collinear_levels, eigen_budget=4096, budget=None))]
fn rotation_experiment(
    py: Python<'_>,
    level: usize,
    thetas_deg: Vec<f64>,
    collinear_levels: Vec<usize>,
    eigen_budget: usize,
    budget: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let (cfg, b) = (eigen(eigen_budget), self::budget(budget));
    let table = py
        .detach(|| experiments::rotation_experiment(level, &thetas_deg, &collinear_levels, &cfg, b))
        .map_err(err)?;
    to_dict(py, &table)
}

#[pyfunction]
#[pyo3(signature = (src, src_l, dst, levels, depth_ratio=1, eigen_budget=4096, budget=None))]
#[allow(clippy::too_many_arguments)]
fn cross_bessel_experiment(
    py: Python<'_>,
    src: &DigitSystem,
    src_l: Vec<i64>,
    dst: &DigitSystem,
    levels: Vec<usize>,
    depth_ratio: usize,
    eigen_budget: usize,
    budget: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let (cfg, b) = (eigen(eigen_budget), self::budget(budget));
    let rows = py
        .detach(|| {
            experiments::cross_bessel_experiment(
                &src.inner,
                &column(&src_l),
                &dst.inner,
                &levels,
                depth_ratio,
                &cfg,
                b,
            )
        })
        .map_err(err)?;
    to_dict(py, &rows)
}

#[pymodule]
fn fracframe(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FracframeError", m.py().get_type::<FracframeError>())?;
    m.add_class::<DigitSystem>()?;
    m.add_class::<Measure>()?;
    m.add_function(wrap_pyfunction!(packing_norm_criterion, m)?)?;
    m.add_function(wrap_pyfunction!(packing_finite_level, m)?)?;
    m.add_function(wrap_pyfunction!(verify_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(singularity_witness, m)?)?;
    m.add_function(wrap_pyfunction!(find_hadamard_partner, m)?)?;
    m.add_function(wrap_pyfunction!(jp_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(degeneracy_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(rotation_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(cross_bessel_experiment, m)?)?;
    Ok(())
}
