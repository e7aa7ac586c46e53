//! Python bindings: graphs, `M_ef(q)`, the paracel expansion and the
//! tree-limit and decomposition checks.

use std::collections::BTreeMap;

use paracel_core::ansatz::{self, AnsatzDecomp};
use paracel_core::cluster::m_poly;
use paracel_core::harness::{run_fuzz, CheckConfig, FuzzConfig};
use paracel_core::instances::Instance;
use paracel_core::paracel::{enumerate_paracels, render_table, twin_families, verify_main_theorem};
use paracel_core::polyring::{parse_rational, Evaluation, Weights};
use paracel_core::ust::{ust_square_check, UstOutcome};
use paracel_core::{parse_graph, MPoly, Multigraph};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(err: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(err.to_string())
}

#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: Multigraph,
}

#[pymethods]
impl PyGraph {
    /// Parses the text graph format.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: parse_graph(text).map_err(value_error)?,
        })
    }

    /// One of the bundled instances: `K3`, `K4_minus_edge`, `K4`.
    #[staticmethod]
    fn bundled(name: &str) -> PyResult<Self> {
        let instance: Instance = name.parse().map_err(PyValueError::new_err)?;
        Ok(Self {
            inner: instance.graph(),
        })
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn edge_ids(&self) -> Vec<String> {
        self.inner.edge_ids()
    }

    #[getter]
    fn marks(&self) -> (String, String) {
        (self.inner.e_id().to_string(), self.inner.f_id().to_string())
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn to_text(&self) -> String {
        self.inner.to_graph_file()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(vertices={}, edges={}, e={}, f={})",
            self.inner.vertex_count(),
            self.inner.edge_count(),
            self.inner.e_id(),
            self.inner.f_id()
        )
    }
}

#[pyclass(name = "Poly", frozen)]
struct PyPoly {
    inner: MPoly,
}

#[pymethods]
impl PyPoly {
    /// Substitutes `q`; with `weights` too, returns the value as a string.
    #[pyo3(signature = (q, weights=None))]
    fn at_q(
        &self,
        py: Python<'_>,
        q: &str,
        weights: Option<BTreeMap<String, String>>,
    ) -> PyResult<Py<PyAny>> {
        let q = parse_rational(q).map_err(value_error)?;
        let weights = weights
            .map(|w| {
                w.into_iter()
                    .map(|(id, v)| Ok((id, parse_rational(&v).map_err(value_error)?)))
                    .collect::<PyResult<Weights>>()
            })
            .transpose()?;
        match self
            .inner
            .evaluate(&q, weights.as_ref())
            .map_err(value_error)?
        {
            Evaluation::Value(v) => Ok(v.to_string().into_pyobject(py)?.into_any().unbind()),
            Evaluation::Poly(p) => Ok(Py::new(py, PyPoly { inner: p })?.into_any()),
        }
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Poly({})", self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// `M_ef(q)` of a graph.
#[pyfunction]
fn mpoly(graph: &PyGraph) -> PyResult<PyPoly> {
    Ok(PyPoly {
        inner: m_poly(&graph.inner).map_err(value_error)?,
    })
}

/// `(equal, lhs, rhs)` for `M_ef(1)` against the paracel expansion.
#[pyfunction]
fn verify(graph: &PyGraph) -> PyResult<(bool, PyPoly, PyPoly)> {
    let check = verify_main_theorem(&graph.inner).map_err(value_error)?;
    Ok((
        check.is_equal(),
        PyPoly { inner: check.lhs },
        PyPoly { inner: check.rhs },
    ))
}

/// Paracels as lists of edge ids.
#[pyfunction]
fn paracels(graph: &PyGraph) -> Vec<Vec<String>> {
    let g = &graph.inner;
    enumerate_paracels(g)
        .into_iter()
        .map(|p| g.set_ids(p.set))
        .collect()
}

/// The `beta | gamma | A | B` table as text.
#[pyfunction]
fn paracel_table(graph: &PyGraph) -> String {
    render_table(&graph.inner, &twin_families(&graph.inner))
}

/// Tree-limit square check as a dict with a `kind` key.
#[pyfunction]
fn ust<'py>(py: Python<'py>, graph: &PyGraph) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    match ust_square_check(&graph.inner).map_err(value_error)? {
        UstOutcome::Square {
            q_order,
            degree,
            root,
            unit_coefficients,
        } => {
            out.set_item("kind", "square")?;
            out.set_item("q_order", q_order)?;
            out.set_item("degree", degree)?;
            out.set_item("root", root.to_string())?;
            out.set_item("unit_coefficients", unit_coefficients)?;
        }
        UstOutcome::NotSquare {
            q_order,
            degree,
            part,
        } => {
            out.set_item("kind", "not_square")?;
            out.set_item("q_order", q_order)?;
            out.set_item("degree", degree)?;
            out.set_item("part", part.to_string())?;
        }
        UstOutcome::Zero => out.set_item("kind", "zero")?,
        UstOutcome::Anomaly { q_order, part } => {
            out.set_item("kind", "anomaly")?;
            out.set_item("q_order", q_order)?;
            out.set_item("part", part.to_string())?;
        }
    }
    Ok(out)
}

/// Bundled decomposition JSON for a named instance.
#[pyfunction]
fn bundled_decomposition(name: &str) -> PyResult<String> {
    let instance: Instance = name.parse().map_err(PyValueError::new_err)?;
    Ok(ansatz::paper_decomps(instance).to_json(&instance.graph()))
}

/// Greedy decomposition JSON, or `None`.
#[pyfunction]
fn search_decomposition(graph: &PyGraph) -> Option<String> {
    ansatz::greedy_decompose(&graph.inner).map(|d| d.to_json(&graph.inner))
}

/// `(identity holds, psd on the 11-point grid)` for a decomposition.
#[pyfunction]
fn check_decomposition(graph: &PyGraph, decomp: &str) -> PyResult<(bool, bool)> {
    let g = &graph.inner;
    let d = AnsatzDecomp::from_json(g, decomp).map_err(value_error)?;
    let holds = ansatz::identity_check(g, &d).map_err(value_error)?.holds();
    let grid = ansatz::default_grid();
    let psd = d.entries.iter().all(|e| e.form.psd_sweep(&grid).passes());
    Ok((holds, psd))
}

/// Seeded fuzz run; returns the JSON summary.
#[pyfunction]
fn fuzz(vertices: usize, edges: usize, count: usize, seed: u64) -> PyResult<String> {
    let config = FuzzConfig {
        max_vertices: vertices,
        max_edges: edges,
        count,
        seed,
    };
    let summary = run_fuzz(&config, &CheckConfig::default()).map_err(value_error)?;
    serde_json::to_string(&summary).map_err(value_error)
}

#[pymodule]
fn paracel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyPoly>()?;
    m.add_function(wrap_pyfunction!(mpoly, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(paracels, m)?)?;
    m.add_function(wrap_pyfunction!(paracel_table, m)?)?;
    m.add_function(wrap_pyfunction!(ust, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(search_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(check_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(fuzz, m)?)?;
    Ok(())
}
