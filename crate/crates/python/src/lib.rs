//! Python bindings: build and load models, check embeddedness, measure volume
//! and sample the Steffen flex.

use std::path::PathBuf;

use polyflex::checker::{check_embedded, CheckOptions, CheckReport};
use polyflex::flex;
use polyflex::model::{
    exact_model, float_model, parse_model, read_model, to_json, to_obj, AnyRealization,
    DEFAULT_EPSILON,
};
use polyflex::numfield::Expr;
use polyflex::steffen;
use polyflex::{FieldElem, VertexId};
use pyo3::exceptions::{PyKeyError, PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;

type PairTuple = ((u32, u32), (u32, u32, u32));

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An exact real number from a quadratic tower.
#[pyclass(name = "Elem", module = "polyflex_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyElem {
    inner: FieldElem,
}

#[pymethods]
impl PyElem {
    /// A rational given as `"p/q"`, an integer or a decimal string.
    #[new]
    fn new(value: &str) -> PyResult<Self> {
        let mut ctx = polyflex::numfield::ExprContext::default();
        let inner = ctx.eval(&Expr::Rat(value.to_string())).map_err(err)?;
        Ok(PyElem { inner })
    }

    /// Parse the JSON expression-tree encoding.
    #[staticmethod]
    fn from_expr(json: &str) -> PyResult<Self> {
        let e: Expr = serde_json::from_str(json).map_err(err)?;
        let mut ctx = polyflex::numfield::ExprContext::default();
        Ok(PyElem {
            inner: ctx.eval(&e).map_err(err)?,
        })
    }

    fn expr(&self) -> String {
        serde_json::to_string(&Expr::from_elem(&self.inner)).expect("expressions serialize")
    }

    /// Correctly rounded decimal string.
    fn decimal(&self, digits: u32) -> String {
        self.inner.approx(digits + 5).to_decimal_string(digits)
    }

    fn sign(&self) -> i8 {
        self.inner.sign().as_i8()
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn __float__(&self) -> f64 {
        self.inner.to_f64()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Elem({})", self.inner)
    }

    fn __eq__(&self, other: &PyElem) -> bool {
        self.inner == other.inner
    }

    fn __neg__(&self) -> PyElem {
        PyElem { inner: -&self.inner }
    }

    fn __add__(&self, other: &PyElem) -> PyResult<PyElem> {
        self.inner.checked_add(&other.inner).map(|inner| PyElem { inner }).map_err(err)
    }

    fn __sub__(&self, other: &PyElem) -> PyResult<PyElem> {
        self.inner.checked_sub(&other.inner).map(|inner| PyElem { inner }).map_err(err)
    }

    fn __mul__(&self, other: &PyElem) -> PyResult<PyElem> {
        self.inner.checked_mul(&other.inner).map(|inner| PyElem { inner }).map_err(err)
    }

    fn __truediv__(&self, other: &PyElem) -> PyResult<PyElem> {
        if other.inner.is_zero() {
            return Err(PyZeroDivisionError::new_err("division by zero"));
        }
        self.inner.checked_div(&other.inner).map(|inner| PyElem { inner }).map_err(err)
    }

    /// Square root, adjoining it to the tower when needed.
    fn sqrt(&self) -> PyResult<PyElem> {
        if self.inner.is_zero() {
            return Ok(self.clone());
        }
        let t = self.inner.tower().clone();
        let (_, inner) = FieldElem::sqrt_adjoining(&t, &self.inner).map_err(err)?;
        Ok(PyElem { inner })
    }
}

/// Outcome of an embeddedness check.
#[pyclass(name = "CheckResult", module = "polyflex_py", frozen, skip_from_py_object)]
pub struct PyCheckResult {
    report: CheckReport,
}

#[pymethods]
impl PyCheckResult {
    /// `"Embedded"`, `"NotEmbedded"` or `"Inconclusive"`.
    #[getter]
    fn verdict(&self) -> String {
        format!("{:?}", self.report.verdict)
    }

    #[getter]
    fn exit_code(&self) -> i32 {
        self.report.verdict.exit_code()
    }

    #[getter]
    fn out1(&self) -> Vec<String> {
        self.report.out1_lines()
    }

    #[getter]
    fn out2(&self) -> Vec<String> {
        self.report.out2_lines()
    }

    #[getter]
    fn pairs_scanned(&self) -> usize {
        self.report.pairs_scanned
    }

    /// `[((i, j), (k, l, m)), ...]` for every intersecting pair.
    fn intersecting_pairs(&self) -> Vec<PairTuple> {
        self.report
            .intersecting_pairs()
            .into_iter()
            .map(|(e, [a, b, c])| ((e.0[0].0, e.0[1].0), (a.0, b.0, c.0)))
            .collect()
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("reports serialize")
    }

    fn __repr__(&self) -> String {
        format!(
            "CheckResult(verdict={:?}, out1={}, out2={})",
            self.report.verdict,
            self.report.out1.len(),
            self.report.out2.len()
        )
    }
}

/// A realized surface, exact or floating point.
#[pyclass(name = "Model", module = "polyflex_py", frozen, skip_from_py_object)]
pub struct PyModel {
    inner: AnyRealization,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (path, eps = None))]
    fn load(path: PathBuf, eps: Option<f64>) -> PyResult<Self> {
        Ok(PyModel {
            inner: read_model(&path, eps).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (json, eps = None))]
    fn from_json(json: &str, eps: Option<f64>) -> PyResult<Self> {
        Ok(PyModel {
            inner: parse_model(json, eps).map_err(err)?,
        })
    }

    #[getter]
    fn is_exact(&self) -> bool {
        matches!(self.inner, AnyRealization::Exact(_))
    }

    fn vertex_ids(&self) -> Vec<u32> {
        self.inner.complex().vertex_ids.iter().map(|v| v.0).collect()
    }

    fn edges(&self) -> Vec<(u32, u32)> {
        self.inner.complex().edges.iter().map(|e| (e.0[0].0, e.0[1].0)).collect()
    }

    fn faces(&self) -> Vec<(u32, u32, u32)> {
        self.inner
            .complex()
            .faces
            .iter()
            .map(|f| (f.0[0].0, f.0[1].0, f.0[2].0))
            .collect()
    }

    /// Floating-point coordinates of vertex `id`.
    fn point(&self, id: u32) -> PyResult<(f64, f64, f64)> {
        let v = VertexId(id);
        let p = match &self.inner {
            AnyRealization::Exact(r) => r.coords().get(&v).map(|p| p.to_f64()),
            AnyRealization::Float(r) => r.coords().get(&v).cloned(),
        }
        .ok_or_else(|| PyKeyError::new_err(id))?;
        Ok((p.x, p.y, p.z))
    }

    /// Exact coordinates of vertex `id`; exact models only.
    fn exact_point(&self, id: u32) -> PyResult<(PyElem, PyElem, PyElem)> {
        let AnyRealization::Exact(r) = &self.inner else {
            return Err(PyValueError::new_err("model is not exact"));
        };
        let p = r.coords().get(&VertexId(id)).ok_or_else(|| PyKeyError::new_err(id))?;
        let e = |x: &FieldElem| PyElem { inner: x.clone() };
        Ok((e(&p.x), e(&p.y), e(&p.z)))
    }

    /// Run the edge × face scan. `mode="float"` converts an exact model first.
    #[pyo3(signature = (mode = None, eps = DEFAULT_EPSILON, resolve_degenerate = false, threads = None))]
    fn check(
        &self,
        py: Python<'_>,
        mode: Option<&str>,
        eps: f64,
        resolve_degenerate: bool,
        threads: Option<usize>,
    ) -> PyResult<PyCheckResult> {
        let opts = CheckOptions { resolve_degenerate, threads };
        let report = py.detach(|| -> PyResult<CheckReport> {
            match (&self.inner, mode) {
                (AnyRealization::Exact(r), Some("float")) => {
                    check_embedded(&r.to_float(eps).map_err(err)?, opts).map_err(err)
                }
                (AnyRealization::Exact(r), None | Some("exact")) => check_embedded(r, opts).map_err(err),
                (AnyRealization::Float(r), None | Some("float")) => {
                    check_embedded(&r.to_float(eps).map_err(err)?, opts).map_err(err)
                }
                (_, Some(m)) => Err(PyValueError::new_err(format!("cannot check in mode {m:?}"))),
            }
        })?;
        Ok(PyCheckResult { report })
    }

    /// Enclosed volume: an `Elem` for exact models, a float otherwise.
    fn volume(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        match &self.inner {
            AnyRealization::Exact(r) => {
                let v = steffen::volume(r).map_err(err)?;
                Ok(Py::new(py, PyElem { inner: v })?.into_any())
            }
            AnyRealization::Float(r) => {
                let v = steffen::volume(r).map_err(err)?;
                Ok(v.into_pyobject(py)?.into_any().unbind())
            }
        }
    }

    /// JSON model text; float models keep `digits` decimals.
    #[pyo3(signature = (digits = 17))]
    fn to_json(&self, digits: usize) -> String {
        match &self.inner {
            AnyRealization::Exact(r) => to_json(&exact_model(r)),
            AnyRealization::Float(r) => match r.policy() {
                polyflex::geom::SignPolicy::Epsilon(e) => to_json(&float_model(r, digits, e)),
                polyflex::geom::SignPolicy::Exact => to_json(&float_model(r, digits, DEFAULT_EPSILON)),
            },
        }
    }

    #[pyo3(signature = (digits = 9))]
    fn to_obj(&self, digits: usize) -> String {
        match &self.inner {
            AnyRealization::Exact(r) => to_obj(r, digits),
            AnyRealization::Float(r) => to_obj(r, digits),
        }
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        std::fs::write(path, self.to_json(17)).map_err(PyErr::from)
    }

    fn __repr__(&self) -> String {
        let c = self.inner.complex();
        format!(
            "Model({}, {} vertices, {} edges, {} faces)",
            if self.is_exact() { "exact" } else { "float" },
            c.vertex_ids.len(),
            c.edges.len(),
            c.faces.len()
        )
    }
}

/// The Steffen polyhedron in exact arithmetic.
#[pyfunction]
fn build_steffen(py: Python<'_>) -> PyResult<PyModel> {
    let m = py.detach(steffen::build_steffen).map_err(err)?;
    Ok(PyModel {
        inner: AnyRealization::Exact(m.realization),
    })
}

/// Exact 187√166/12 in the Steffen tower.
#[pyfunction]
fn steffen_volume() -> PyResult<PyElem> {
    let t = steffen::canonical_tower();
    Ok(PyElem {
        inner: steffen::expected_volume(&t).map_err(err)?,
    })
}

/// The flexed polyhedron at parameter `t`, in floating point.
#[pyfunction]
#[pyo3(signature = (t, eps = DEFAULT_EPSILON))]
fn flex_frame(t: f64, eps: f64) -> PyResult<PyModel> {
    let f = flex::realize_flex(t, eps).map_err(err)?;
    Ok(PyModel {
        inner: AnyRealization::Float(f.realization),
    })
}

/// `[(t, verdict or None, error or None), ...]` for `steps + 1` parameters.
#[pyfunction]
#[pyo3(signature = (t_from, t_to, steps, eps = DEFAULT_EPSILON))]
fn flex_scan(
    py: Python<'_>,
    t_from: f64,
    t_to: f64,
    steps: usize,
    eps: f64,
) -> Vec<(f64, Option<String>, Option<String>)> {
    py.detach(|| flex::scan_embeddedness(t_from, t_to, steps, eps))
        .into_iter()
        .map(|s| (s.t, s.verdict.map(|v| format!("{v:?}")), s.error))
        .collect()
}

/// Bisect the last Embedded parameter between `lo` (Embedded) and `hi`.
#[pyfunction]
#[pyo3(signature = (lo, hi, tolerance = 1e-6, eps = DEFAULT_EPSILON))]
fn max_embedded_t(py: Python<'_>, lo: f64, hi: f64, tolerance: f64, eps: f64) -> PyResult<(f64, f64)> {
    py.detach(|| flex::max_embedded_t(lo, hi, tolerance, eps)).map_err(err)
}

/// Chord and arc travelled by v9 between `-t` and `t`.
#[pyfunction]
fn v9_displacement(t: f64) -> (f64, f64) {
    flex::v9_displacement(t)
}

#[pymodule]
fn polyflex_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyElem>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyCheckResult>()?;
    m.add_function(wrap_pyfunction!(build_steffen, m)?)?;
    m.add_function(wrap_pyfunction!(steffen_volume, m)?)?;
    m.add_function(wrap_pyfunction!(flex_frame, m)?)?;
    m.add_function(wrap_pyfunction!(flex_scan, m)?)?;
    m.add_function(wrap_pyfunction!(max_embedded_t, m)?)?;
    m.add_function(wrap_pyfunction!(v9_displacement, m)?)?;
    Ok(())
}
