//! Python bindings for `frolov-core`.

use std::sync::{Arc, Mutex};

use frolov_core as core;
use frolov_core::{EnumerationOptions, FrolovError, Integrand};
use pyo3::exceptions::{PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: FrolovError) -> PyErr {
    match e {
        FrolovError::Overflow(_) => PyOverflowError::new_err(e.to_string()),
        FrolovError::SingularMatrix | FrolovError::NonOrthogonal { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn options(tolerance: f64, threads: Option<usize>) -> EnumerationOptions {
    EnumerationOptions { tolerance, threads }
}

/// Scaled Chebyshev roots `2 cos(pi (2k - 1) / (2d))`, decreasing.
#[pyfunction]
fn chebyshev_roots(d: usize) -> PyResult<Vec<f64>> {
    core::chebyshev_roots(d).map_err(to_py)
}

/// Integer coefficients `(m_0, ..., m_{l-2})` of the column reduction of order `l`.
#[pyfunction]
fn column_reduction_coeffs(l: usize) -> PyResult<Vec<i64>> {
    Ok(core::column_reduction_coeffs(l).map_err(to_py)?.coeffs().to_vec())
}

/// The Chebyshev system of dimension `d`: bases, reduction and factorization.
#[pyclass(name = "ChebyshevSystem", frozen)]
struct PyChebyshevSystem {
    inner: Arc<core::ChebyshevSystem>,
}

#[pymethods]
impl PyChebyshevSystem {
    #[new]
    fn new(d: usize) -> PyResult<Self> {
        Ok(PyChebyshevSystem { inner: Arc::new(core::ChebyshevSystem::new(d).map_err(to_py)?) })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn admissible(&self) -> bool {
        self.inner.admissible()
    }

    #[getter]
    fn roots(&self) -> Vec<f64> {
        self.inner.roots().to_vec()
    }

    /// Vandermonde basis `T` as a list of rows.
    #[getter]
    fn vandermonde(&self) -> Vec<Vec<f64>> {
        self.inner.vandermonde().matrix().to_rows()
    }

    /// Orthogonal basis `T~` as a list of rows.
    #[getter]
    fn orthogonal(&self) -> Vec<Vec<f64>> {
        self.inner.orthogonal().matrix().to_rows()
    }

    #[getter]
    fn reduction(&self) -> Vec<Vec<i64>> {
        self.inner.reduction().to_rows()
    }

    #[getter]
    fn q(&self) -> Vec<Vec<f64>> {
        self.inner.q_factor().to_rows()
    }

    #[getter]
    fn d_factor(&self) -> Vec<f64> {
        self.inner.d_factor().to_vec()
    }

    #[getter]
    fn determinant(&self) -> f64 {
        self.inner.orthogonal().det()
    }

    fn gram_residual(&self) -> f64 {
        self.inner.gram_residual()
    }

    fn orthogonality_residual(&self) -> f64 {
        self.inner.orthogonality_residual()
    }

    fn reduction_residual(&self) -> f64 {
        self.inner.reduction_residual()
    }

    /// Basis of the dual lattice, as a list of rows.
    fn dual_basis(&self) -> PyResult<Vec<Vec<f64>>> {
        Ok(core::dual_basis(&self.inner).map_err(to_py)?.matrix().to_rows())
    }

    #[pyo3(signature = (n, tolerance = 0.0, threads = None))]
    fn count_nodes(&self, py: Python<'_>, n: u64, tolerance: f64, threads: Option<usize>) -> PyResult<CoveringStats> {
        let sys = Arc::clone(&self.inner);
        let stats = py.detach(move || core::count_nodes(&sys, n, &options(tolerance, threads))).map_err(to_py)?;
        Ok(CoveringStats::from(stats))
    }

    #[pyo3(signature = (n, tolerance = 0.0, threads = None))]
    fn enumerate_nodes(&self, py: Python<'_>, n: u64, tolerance: f64, threads: Option<usize>) -> PyResult<NodeSet> {
        let sys = Arc::clone(&self.inner);
        let set =
            py.detach(move || core::enumerate_nodes_with(&sys, n, &options(tolerance, threads))).map_err(to_py)?;
        Ok(NodeSet { inner: Arc::new(set) })
    }

    /// Frolov cubature of a built-in integrand name or a Python callable
    /// taking a list of `d` floats.
    #[pyo3(signature = (n, integrand, exact = None, tolerance = 0.0, threads = None))]
    fn integrate(
        &self,
        py: Python<'_>,
        n: u64,
        integrand: &Bound<'_, PyAny>,
        exact: Option<f64>,
        tolerance: f64,
        threads: Option<usize>,
    ) -> PyResult<CubatureResult> {
        let d = self.inner.dim();
        let failure: Arc<Mutex<Option<PyErr>>> = Arc::default();
        let mut f = if let Ok(name) = integrand.extract::<String>() {
            core::builtin_integrand(&name, d).ok_or_else(|| {
                PyValueError::new_err(format!("unknown integrand '{name}'; available: {:?}", core::BUILTIN_NAMES))
            })?
        } else if integrand.is_callable() {
            python_integrand(integrand.clone().unbind(), d, Arc::clone(&failure))
        } else {
            return Err(PyValueError::new_err("integrand must be a built-in name or a callable"));
        };
        if let Some(v) = exact {
            f = f.with_exact_integral(v);
        }
        let sys = Arc::clone(&self.inner);
        let result = py
            .detach(move || core::frolov_quadrature_with(&sys, n, &f, &options(tolerance, threads)))
            .map_err(to_py)?;
        if let Some(err) = failure.lock().unwrap().take() {
            return Err(err);
        }
        Ok(CubatureResult::from(result))
    }

    fn __repr__(&self) -> String {
        format!("ChebyshevSystem(d={}, admissible={})", self.inner.dim(), self.inner.admissible())
    }
}

/// Wrap a Python callable; the first exception raised is kept and later calls return NaN.
fn python_integrand(callable: Py<PyAny>, d: usize, failure: Arc<Mutex<Option<PyErr>>>) -> Integrand {
    Integrand::new("python", d, move |x| {
        if failure.lock().unwrap().is_some() {
            return f64::NAN;
        }
        Python::attach(|py| match callable.call1(py, (x.to_vec(),)).and_then(|v| v.extract::<f64>(py)) {
            Ok(v) => v,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                f64::NAN
            }
        })
    })
}

#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct CoveringStats {
    cube_points: u64,
    ellipsoid_points: u64,
    overhead: f64,
    bound_lower: f64,
    bound_upper: f64,
    in_regime: bool,
    overhead_limit: f64,
}

impl From<core::CoveringStats> for CoveringStats {
    fn from(s: core::CoveringStats) -> Self {
        CoveringStats {
            cube_points: s.cube_points,
            ellipsoid_points: s.ellipsoid_points,
            overhead: s.overhead,
            bound_lower: s.bound_lower,
            bound_upper: s.bound_upper,
            in_regime: s.in_regime,
            overhead_limit: s.overhead_limit,
        }
    }
}

#[pymethods]
impl CoveringStats {
    fn __repr__(&self) -> String {
        format!(
            "CoveringStats(cube_points={}, ellipsoid_points={}, overhead={:.4})",
            self.cube_points, self.ellipsoid_points, self.overhead
        )
    }
}

/// Cubature nodes with their integer preimages.
#[pyclass(frozen)]
struct NodeSet {
    inner: Arc<core::NodeSet>,
}

#[pymethods]
impl NodeSet {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn n(&self) -> u64 {
        self.inner.n()
    }

    #[getter]
    fn stats(&self) -> CoveringStats {
        CoveringStats::from(*self.inner.stats())
    }

    fn nodes(&self) -> Vec<Vec<f64>> {
        self.inner.nodes().map(<[f64]>::to_vec).collect()
    }

    fn preimages(&self) -> Vec<Vec<i64>> {
        self.inner.preimages().map(<[i64]>::to_vec).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __getitem__(&self, i: isize) -> PyResult<Vec<f64>> {
        let len = self.inner.len() as isize;
        let j = if i < 0 { i + len } else { i };
        if !(0..len).contains(&j) {
            return Err(pyo3::exceptions::PyIndexError::new_err("node index out of range"));
        }
        Ok(self.inner.node(j as usize).to_vec())
    }
}

#[pyclass(frozen, get_all)]
struct CubatureResult {
    n: u64,
    node_count: u64,
    value: f64,
    error: Option<f64>,
    warning: Option<String>,
}

impl From<core::CubatureResult> for CubatureResult {
    fn from(r: core::CubatureResult) -> Self {
        CubatureResult { n: r.n, node_count: r.node_count, value: r.value, error: r.error, warning: r.warning }
    }
}

#[pymethods]
impl CubatureResult {
    fn __repr__(&self) -> String {
        format!(
            "CubatureResult(n={}, node_count={}, value={}, error={:?})",
            self.n, self.node_count, self.value, self.error
        )
    }
}

/// Count integer points `k` with `sum_j |k_j / mu_j|^p <= R^p`.
#[pyfunction]
fn ellipsoid_count(p: f64, radius: f64, scales: Vec<f64>) -> PyResult<u64> {
    Ok(core::PEllipsoid::new(p, radius, scales).map_err(to_py)?.count())
}

/// All integer points of the ellipsoid, outermost coordinate varying slowest.
#[pyfunction]
fn ellipsoid_points(p: f64, radius: f64, scales: Vec<f64>) -> PyResult<Vec<Vec<i64>>> {
    Ok(core::PEllipsoid::new(p, radius, scales).map_err(to_py)?.enumerate().collect())
}

/// `(lower, upper)` bounds on the ellipsoid point count.
#[pyfunction]
fn ellipsoid_bounds(p: f64, radius: f64, scales: Vec<f64>) -> PyResult<(f64, f64)> {
    Ok(core::PEllipsoid::new(p, radius, scales).map_err(to_py)?.cardinality_bounds())
}

/// `(lower, upper, in_regime)` bounds on the covering ellipsoid size.
#[pyfunction]
fn kn_bounds(d: usize, n: u64) -> (f64, f64, bool) {
    let b = core::kn_bounds(d, n);
    (b.lower, b.upper, b.in_regime)
}

/// `(limit, cap, per_dim_factor)` of the relative overhead.
#[pyfunction]
fn overhead_limit(d: usize) -> (f64, f64, f64) {
    let o = core::overhead_limit(d);
    (o.limit, o.cap, o.per_dim_factor)
}

#[pymodule]
fn frolov(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChebyshevSystem>()?;
    m.add_class::<CoveringStats>()?;
    m.add_class::<NodeSet>()?;
    m.add_class::<CubatureResult>()?;
    m.add_function(wrap_pyfunction!(chebyshev_roots, m)?)?;
    m.add_function(wrap_pyfunction!(column_reduction_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(ellipsoid_count, m)?)?;
    m.add_function(wrap_pyfunction!(ellipsoid_points, m)?)?;
    m.add_function(wrap_pyfunction!(ellipsoid_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(kn_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(overhead_limit, m)?)?;
    m.add("BUILTIN_INTEGRANDS", core::BUILTIN_NAMES.to_vec())?;
    Ok(())
}
