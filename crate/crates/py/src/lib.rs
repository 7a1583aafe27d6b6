//! Python bindings: `import pysumset`.

use std::str::FromStr;
use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use sumset_core::rational;
use sumset_core::theorems::{self, PetridisOptions};
use sumset_core::{Config, Error, FiniteAbelianGroup, GroupSubset, PetridisMode, Rational};

fn err(e: Error) -> PyErr {
    match e {
        Error::CertificateUnverified { .. } | Error::TransformOverflow { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((r.to_string(),))
}

#[pyclass(name = "Group", module = "pysumset", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGroup(Arc<FiniteAbelianGroup>);

#[pymethods]
impl PyGroup {
    /// `Group("Z3xZ3")` or `Group([3, 3])`.
    #[new]
    fn new(spec: &Bound<'_, PyAny>) -> PyResult<Self> {
        let g = if let Ok(s) = spec.extract::<String>() {
            FiniteAbelianGroup::from_str(&s)
        } else {
            FiniteAbelianGroup::new(&spec.extract::<Vec<u64>>()?)
        };
        g.map(|g| PyGroup(Arc::new(g))).map_err(err)
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order()
    }

    #[getter]
    fn factors(&self) -> Vec<usize> {
        self.0.factors().to_vec()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Group('{}')", self.0)
    }
}

#[pyclass(name = "Subset", module = "pysumset", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySubset(GroupSubset);

#[pymethods]
impl PySubset {
    /// Elements are flat indices or coordinate lists.
    #[new]
    fn new(group: &PyGroup, elements: &Bound<'_, PyAny>) -> PyResult<Self> {
        let g = group.0.clone();
        if let Ok(idx) = elements.extract::<Vec<usize>>() {
            return GroupSubset::from_indices(g, idx).map(PySubset).map_err(err);
        }
        let coords: Vec<Vec<u64>> = elements.extract()?;
        let elems = coords
            .into_iter()
            .map(sumset_core::GroupElement::from)
            .collect::<Vec<_>>();
        GroupSubset::from_elements(g, &elems).map(PySubset).map_err(err)
    }

    /// Seeded Bernoulli subset; `density` is a rational string such as `"1/3"`.
    #[staticmethod]
    #[pyo3(signature = (group, density, seed=0))]
    fn random(group: &PyGroup, density: &str, seed: u64) -> PyResult<Self> {
        let d = rational::parse(density).map_err(err)?;
        GroupSubset::random(group.0.clone(), &d, seed).map(PySubset).map_err(err)
    }

    #[getter]
    fn group(&self) -> PyGroup {
        PyGroup(self.0.group_arc().clone())
    }

    fn indices(&self) -> Vec<usize> {
        self.0.indices().collect()
    }

    fn elements(&self) -> Vec<Vec<u64>> {
        self.0.elements().iter().map(|e| e.coords().to_vec()).collect()
    }

    fn measure<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.measure())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __contains__(&self, index: usize) -> bool {
        index < self.0.group().order() && self.0.contains_index(index)
    }

    fn __eq__(&self, other: &PySubset) -> bool {
        self.0 == other.0
    }

    fn __add__(&self, other: &PySubset) -> PyResult<PySubset> {
        sumset(self, other)
    }

    fn __repr__(&self) -> String {
        format!("Subset({}, {:?})", self.0.group(), self.indices())
    }
}

#[pyclass(name = "Report", module = "pysumset", frozen)]
struct PyReport(theorems::VerificationReport);

#[pymethods]
impl PyReport {
    #[getter]
    fn inequality(&self) -> String {
        self.0.inequality.to_string()
    }

    #[getter]
    fn passed(&self) -> bool {
        self.0.pass
    }

    #[getter]
    fn status(&self) -> String {
        serde_json::to_value(self.0.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }

    #[getter]
    fn lhs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.lhs)
    }

    #[getter]
    fn rhs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.rhs)
    }

    #[getter]
    fn slack<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.slack)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "Report({}, lhs={}, rhs={}, pass={})",
            self.0.inequality, self.0.lhs, self.0.rhs, self.0.pass
        )
    }
}

#[pyfunction]
fn sumset(a: &PySubset, b: &PySubset) -> PyResult<PySubset> {
    sumset_core::sumset(&a.0, &b.0).map(PySubset).map_err(err)
}

/// `mB - nB`.
#[pyfunction]
fn iterated(m: u32, b: &PySubset, n: u32) -> PyResult<PySubset> {
    sumset_core::iterated(m, &b.0, n).map(PySubset).map_err(err)
}

#[pyfunction]
fn check_plunnecke(a: &PySubset, b: &PySubset, m: u32, n: u32) -> PyResult<PyReport> {
    theorems::check_plunnecke(&a.0, &b.0, m, n).map(PyReport).map_err(err)
}

#[pyfunction]
fn check_ruzsa_triangle(a: &PySubset, b: &PySubset, c: &PySubset) -> PyResult<PyReport> {
    theorems::check_ruzsa_triangle(&a.0, &b.0, &c.0).map(PyReport).map_err(err)
}

#[pyfunction]
fn check_cauchy_davenport(a: &PySubset, b: &PySubset, p: u64) -> PyResult<PyReport> {
    theorems::check_cauchy_davenport(&a.0, &b.0, p).map(PyReport).map_err(err)
}

#[pyfunction]
fn check_nb_bound(a: &PySubset, b: &PySubset, p: u64, m: u32) -> PyResult<PyReport> {
    theorems::check_nb_bound(&a.0, &b.0, p, m).map(PyReport).map_err(err)
}

/// Returns `(X, ratio, json)`.
#[pyfunction]
#[pyo3(signature = (a, b, m_max, mode="exhaustive"))]
fn petridis<'py>(
    py: Python<'py>,
    a: &PySubset,
    b: &PySubset,
    m_max: u32,
    mode: &str,
) -> PyResult<(PySubset, Bound<'py, PyAny>, String)> {
    let mode = PetridisMode::from_str(mode).map_err(err)?;
    let c = theorems::petridis_select_with(&a.0, &b.0, &PetridisOptions::new(mode, m_max)).map_err(err)?;
    let json = serde_json::to_string(&c).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((PySubset(c.x.clone()), fraction(py, &c.ratio)?, json))
}

/// Cantor demo as a JSON string.
#[pyfunction]
fn cantor_demo(depth: u32, pairs: Vec<(u32, u32)>) -> PyResult<String> {
    let r = sumset_core::grid::cantor_demo(depth, &pairs, &Config::default()).map_err(err)?;
    serde_json::to_string(&r).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn pysumset(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroup>()?;
    m.add_class::<PySubset>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(sumset, m)?)?;
    m.add_function(wrap_pyfunction!(iterated, m)?)?;
    m.add_function(wrap_pyfunction!(check_plunnecke, m)?)?;
    m.add_function(wrap_pyfunction!(check_ruzsa_triangle, m)?)?;
    m.add_function(wrap_pyfunction!(check_cauchy_davenport, m)?)?;
    m.add_function(wrap_pyfunction!(check_nb_bound, m)?)?;
    m.add_function(wrap_pyfunction!(petridis, m)?)?;
    m.add_function(wrap_pyfunction!(cantor_demo, m)?)?;
    Ok(())
}
