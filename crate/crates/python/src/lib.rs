//! Python bindings. Structured results cross the boundary as the same JSON
//! the CLI writes, decoded with the `json` module.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use lamcert::family::FamilySpec;
use lamcert::homology::{boundary_slope_of_class, BoundaryInclusionMap, PeripheralImages};
use lamcert::lattice::total_normalized_length;
use lamcert::report::{verify_report, ReportFile};
use lamcert::tube::nz_core_length_window;
use lamcert::verify::{verify_tubes as run_verify, SuiteSizes};

create_exception!(lamcert_py, HypothesisError, PyValueError, "A mathematical precondition does not hold.");

fn err(e: lamcert::Error) -> PyErr {
    if e.is_hypothesis_failure() {
        HypothesisError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_py<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Rank-2 Euclidean lattice spanned by `v1`, `v2`.
#[pyclass(name = "FlatTorusLattice", frozen)]
struct PyLattice(lamcert::FlatTorusLattice);

#[pymethods]
impl PyLattice {
    #[new]
    fn new(v1: [f64; 2], v2: [f64; 2]) -> PyResult<Self> {
        lamcert::FlatTorusLattice::new(v1, v2).map(PyLattice).map_err(err)
    }

    /// Lattice of a cusp with shape modulus `re + i·im` and area `area`.
    #[staticmethod]
    fn from_cusp_shape(re: f64, im: f64, area: f64) -> PyResult<Self> {
        lamcert::FlatTorusLattice::from_cusp_shape(re, im, area)
            .map(PyLattice)
            .map_err(err)
    }

    #[getter]
    fn area(&self) -> f64 {
        self.0.area()
    }

    fn slope_length(&self, p: i64, q: i64) -> PyResult<f64> {
        let s = lamcert::Slope::new(p, q).map_err(err)?;
        Ok(self.0.slope_length(&s))
    }

    fn normalized_length(&self, p: i64, q: i64) -> PyResult<f64> {
        let s = lamcert::Slope::new(p, q).map_err(err)?;
        Ok(self.0.normalized_length(&s))
    }

    /// `((p, q), length)` of a shortest nonzero vector.
    fn shortest_vector(&self) -> ((i64, i64), f64) {
        let (s, len) = self.0.shortest_vector();
        (s.pair(), len)
    }

    /// Enclosure `(lo, hi)` of the covering radius.
    #[pyo3(signature = (tol = 1e-12))]
    fn covering_radius(&self, tol: f64) -> PyResult<(f64, f64)> {
        let iv = self.0.covering_radius(tol).map_err(err)?;
        Ok((iv.lo, iv.hi))
    }

    fn __repr__(&self) -> String {
        let (a, b) = (self.0.v1(), self.0.v2());
        format!("FlatTorusLattice([{}, {}], [{}, {}])", a[0], a[1], b[0], b[1])
    }
}

/// A manifold description loaded from JSON.
#[pyclass(name = "Manifold", frozen)]
struct PyManifold(lamcert::ManifoldBundle);

#[pymethods]
impl PyManifold {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        lamcert::ManifoldBundle::load(path).map(PyManifold).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        lamcert::ManifoldBundle::from_json(text).map(PyManifold).map_err(err)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn n_cusps(&self) -> usize {
        self.0.cusps.len()
    }

    fn lattices(&self) -> PyResult<Vec<PyLattice>> {
        Ok(self.0.lattices().map_err(err)?.into_iter().map(PyLattice).collect())
    }

    /// Total normalized length of `"p,q;p,q;..."`.
    fn total_normalized_length(&self, slope: &str) -> PyResult<f64> {
        let s = lamcert::CompleteSlope::parse(slope).map_err(err)?;
        total_normalized_length(&self.0.lattices().map_err(err)?, &s).map_err(err)
    }

    /// Full report file for one filling, as a dict.
    fn certify<'py>(&self, py: Python<'py>, slope: &str, class: Vec<i64>) -> PyResult<Bound<'py, PyAny>> {
        let s = lamcert::CompleteSlope::parse(slope).map_err(err)?;
        let cls = lamcert::CohomologyClass::new(class);
        to_py(py, &ReportFile::certify(&self.0, &cls, &s, None).map_err(err)?)
    }

    /// Full report file for a surgery family, as a dict.
    fn family<'py>(&self, py: Python<'py>, spec_path: &str) -> PyResult<Bound<'py, PyAny>> {
        let spec = FamilySpec::load(spec_path).map_err(err)?;
        to_py(py, &ReportFile::family(&self.0, &spec).map_err(err)?)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

/// `(lo, hi)` bounds on the core length when the total normalized length is `ell`.
#[pyfunction]
fn nz_window(ell: f64) -> PyResult<(f64, f64)> {
    let w = nz_core_length_window(ell).map_err(err)?;
    Ok((w.lo, w.hi))
}

/// Boundary slope pair per cusp for a class, given the images
/// `[(meridian, longitude), ...]` of the peripheral bases. `None` where the
/// class vanishes on the cusp.
#[pyfunction]
fn boundary_slopes(class: Vec<i64>, images: Vec<(Vec<i64>, Vec<i64>)>) -> PyResult<Vec<Option<(i64, i64)>>> {
    let betti = class.len();
    let images = images
        .into_iter()
        .map(|(meridian, longitude)| PeripheralImages { meridian, longitude })
        .collect();
    let inc = BoundaryInclusionMap::new(betti, images).map_err(err)?;
    let cls = lamcert::CohomologyClass::new(class);
    let b = boundary_slope_of_class(&cls, &inc).map_err(err)?;
    Ok(b.into_iter().map(|b| b.map(|b| b.pair)).collect())
}

/// Seeded Monte-Carlo property suites; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (samples = 10_000, seed = 0))]
fn verify_tubes(py: Python<'_>, samples: usize, seed: u64) -> PyResult<Bound<'_, PyAny>> {
    let report = py.detach(|| run_verify(SuiteSizes::from_samples(samples), seed));
    to_py(py, &report)
}

/// Re-derives a saved report; returns the list of differing JSON paths.
#[pyfunction]
fn verify_report_file(path: &str) -> PyResult<Vec<String>> {
    let f = ReportFile::load(path).map_err(err)?;
    Ok(verify_report(&f).map_err(err)?.mismatches)
}

#[pymodule]
fn lamcert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLattice>()?;
    m.add_class::<PyManifold>()?;
    m.add_function(wrap_pyfunction!(nz_window, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_slopes, m)?)?;
    m.add_function(wrap_pyfunction!(verify_tubes, m)?)?;
    m.add_function(wrap_pyfunction!(verify_report_file, m)?)?;
    m.add("HypothesisError", m.py().get_type::<HypothesisError>())?;
    Ok(())
}
