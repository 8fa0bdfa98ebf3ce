//! Python bindings: representations, the identity sums, enumeration and
//! the bordered functions.

use norbury::curves::{enumerate_arcs, pairs_csv, PairKind};
use norbury::identity::{self, SeriesReport};
use norbury::limitset;
use norbury::repbuild::{self, Boundary, SurfaceId};
use norbury::C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// A representation of a surface group, Fuchsian or deformed.
#[pyclass(name = "Representation", module = "norbury_py", from_py_object)]
#[derive(Clone)]
struct PyRepresentation {
    inner: repbuild::Representation,
}

#[pymethods]
impl PyRepresentation {
    /// Fuchsian family member: surface in {"N12", "N21", "N13"}.
    #[staticmethod]
    #[pyo3(signature = (surface, params=None))]
    fn build(surface: &str, params: Option<Vec<f64>>) -> PyResult<Self> {
        let id: SurfaceId = surface.parse().map_err(|e: repbuild::RepError| PyValueError::new_err(e.to_string()))?;
        let p = params.unwrap_or_else(|| id.default_params());
        Ok(Self { inner: repbuild::build_family(id, &p).map_err(err)? })
    }

    /// N12 with the distinguished cusp replaced by a boundary of length l1.
    #[staticmethod]
    #[pyo3(signature = (ta, l1, l2=0.0))]
    fn bordered(ta: f64, l1: f64, l2: f64) -> PyResult<Self> {
        Ok(Self { inner: repbuild::build_bordered(ta, Boundary { l1, l2 }).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner: repbuild::Representation::from_json(&v).map_err(err)? })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_json()).expect("json")
    }

    /// Complex bend along a 2-sided curve.
    #[pyo3(signature = (curve, t, steps=16))]
    fn bend(&self, curve: &str, t: C64, steps: usize) -> PyResult<Self> {
        let w = self.inner.surface.parse(curve).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner: repbuild::bend(&self.inner, &w, t, steps).map_err(err)? })
    }

    /// Matrix entries (a, b, c, d) and determinant sign of the image of a word.
    fn evaluate(&self, word: &str) -> PyResult<((C64, C64, C64, C64), i8)> {
        let w = self.inner.surface.parse(word).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let m = self.inner.evaluate(&w);
        Ok(((m.a, m.b, m.c, m.d), m.det_sign))
    }

    /// Complex length of a word, continued from the Fuchsian basepoint.
    fn length(&self, word: &str) -> PyResult<C64> {
        let w = self.inner.surface.parse(word).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(self.inner.length(&w).map_err(err)?.value)
    }

    #[getter]
    fn surface(&self) -> String {
        self.inner.id.to_string()
    }

    #[getter]
    fn params(&self) -> Vec<f64> {
        self.inner.params.clone()
    }

    #[getter]
    fn is_fuchsian(&self) -> bool {
        self.inner.is_fuchsian()
    }

    fn __repr__(&self) -> String {
        format!("Representation({}, {:?}, fuchsian={})", self.inner.id, self.inner.params, self.inner.is_fuchsian())
    }
}

fn report<'py>(py: Python<'py>, r: &SeriesReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("target", r.target)?;
    d.set_item("term_count", r.term_count)?;
    d.set_item("cutoff", r.cutoff)?;
    d.set_item("tail_estimate", r.tail_estimate)?;
    Ok(d)
}

/// Cusped identity partial sum (target 1/2).
#[pyfunction]
#[pyo3(signature = (rep, cutoff=18.0))]
fn sum_identity<'py>(py: Python<'py>, rep: &PyRepresentation, cutoff: f64) -> PyResult<Bound<'py, PyDict>> {
    report(py, &identity::sum_identity(&rep.inner, cutoff).map_err(err)?)
}

/// Alternative form over band boundaries (target 1/2).
#[pyfunction]
#[pyo3(signature = (rep, cutoff=18.0))]
fn sum_alternative<'py>(py: Python<'py>, rep: &PyRepresentation, cutoff: f64) -> PyResult<Bound<'py, PyDict>> {
    report(py, &identity::sum_alternative(&rep.inner, cutoff).map_err(err)?)
}

/// Bordered identity on N12 (target l1).
#[pyfunction]
fn bordered_identity<'py>(py: Python<'py>, rep: &PyRepresentation) -> PyResult<Bound<'py, PyDict>> {
    report(py, &identity::bordered_identity_check(&rep.inner, 0.0).map_err(err)?)
}

/// Cusp pairs up to the cutoff as dicts.
#[pyfunction]
#[pyo3(signature = (rep, cutoff=12.0))]
fn enumerate_pairs<'py>(py: Python<'py>, rep: &PyRepresentation, cutoff: f64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let en = enumerate_arcs(&rep.inner, cutoff).map_err(err)?;
    en.pairs
        .iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("kind", p.kind.as_str())?;
            d.set_item("alpha", rep.inner.surface.render(&p.alpha))?;
            d.set_item("beta", rep.inner.surface.render(&p.beta))?;
            d.set_item("parity", p.parity)?;
            d.set_item("len_alpha", p.len_alpha)?;
            d.set_item("len_beta", p.len_beta)?;
            d.set_item("moebius", p.kind == PairKind::Moebius)?;
            d.set_item("direction", p.fuchsian_direction)?;
            Ok(d)
        })
        .collect()
}

/// Pair CSV text.
#[pyfunction]
#[pyo3(signature = (rep, cutoff=12.0))]
fn pairs_table(rep: &PyRepresentation, cutoff: f64) -> PyResult<String> {
    let en = enumerate_arcs(&rep.inner, cutoff).map_err(err)?;
    Ok(pairs_csv(&en.pairs, &rep.inner.surface))
}

/// Full-circle width and its expected value 1.
#[pyfunction]
#[pyo3(signature = (rep, cutoff=18.0))]
fn full_circle_width(rep: &PyRepresentation, cutoff: f64) -> PyResult<(C64, C64)> {
    let en = identity::enumerate_for(&rep.inner, cutoff).map_err(err)?;
    let w = identity::full_circle_width(&rep.inner, &en, cutoff).map_err(err)?;
    Ok((w.sum, w.expected))
}

/// Lowest point, highest point and modulus of the limit curve.
#[pyfunction]
#[pyo3(signature = (rep, max_word_len=8))]
fn height_extremes(rep: &PyRepresentation, max_word_len: usize) -> PyResult<(C64, C64, f64)> {
    let e = limitset::height_extremes(&rep.inner, max_word_len).map_err(err)?;
    Ok((e.z_minus.z, e.z_plus.z, e.modulus))
}

#[pyfunction]
fn norbury_r(x: C64, y: C64, z: C64) -> C64 {
    identity::norbury_r(x, y, z)
}

#[pyfunction]
fn norbury_d(x: C64, y: C64, z: C64) -> C64 {
    identity::norbury_d(x, y, z)
}

#[pyfunction]
fn norbury_e(x: C64, y: C64, z: C64) -> C64 {
    identity::norbury_e(x, y, z)
}

#[pyfunction]
fn norbury_d_hat(x: C64, y: C64, z: C64) -> PyResult<C64> {
    identity::norbury_d_hat(x, y, z).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn norbury_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRepresentation>()?;
    m.add_function(wrap_pyfunction!(sum_identity, m)?)?;
    m.add_function(wrap_pyfunction!(sum_alternative, m)?)?;
    m.add_function(wrap_pyfunction!(bordered_identity, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(pairs_table, m)?)?;
    m.add_function(wrap_pyfunction!(full_circle_width, m)?)?;
    m.add_function(wrap_pyfunction!(height_extremes, m)?)?;
    m.add_function(wrap_pyfunction!(norbury_r, m)?)?;
    m.add_function(wrap_pyfunction!(norbury_d, m)?)?;
    m.add_function(wrap_pyfunction!(norbury_e, m)?)?;
    m.add_function(wrap_pyfunction!(norbury_d_hat, m)?)?;
    Ok(())
}
