//! Python bindings for `jmatrix-dirac`.

use jmatrix_dirac::basis::{BasisParams, MiddleBasisKind};
use jmatrix_dirac::config::RunConfig;
use jmatrix_dirac::oracle::{integrate_dirac, OracleOptions};
use jmatrix_dirac::potential::{ParityDecl, PotentialSpec, Profile};
use jmatrix_dirac::refsol::Kinematics;
use jmatrix_dirac::scattering::{self, Method, PathChoice, SolverOptions};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: jmatrix_dirac::Error) -> PyErr {
    match e {
        jmatrix_dirac::Error::Domain(_) | jmatrix_dirac::Error::Config { .. } | jmatrix_dirac::Error::Parity { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn profile(kind: &str, height: f64, width: f64, center: f64, edge: f64) -> PyResult<Profile> {
    Ok(match kind {
        "zero" => Profile::Zero,
        "gaussian" => Profile::Gaussian { height, width, center },
        "odd_gaussian" => Profile::OddGaussian { height, width, center },
        "square" => Profile::SquareBarrier {
            height,
            half_width: width,
            center,
        },
        "smoothed_step" => Profile::SmoothedStep {
            height,
            half_width: width,
            edge,
            center,
        },
        other => return Err(PyValueError::new_err(format!("unknown profile {other:?}"))),
    })
}

/// One potential channel: `Profile(kind, height, width, center, edge)`.
/// For square and smoothed-step barriers `width` is the half-width.
#[pyclass(name = "Profile", module = "diracjm", frozen, from_py_object)]
#[derive(Clone)]
struct PyProfile {
    inner: Profile,
}

#[pymethods]
impl PyProfile {
    #[new]
    #[pyo3(signature = (kind, height = 1.0, width = 1.0, center = 0.0, edge = 0.1))]
    fn new(kind: &str, height: f64, width: f64, center: f64, edge: f64) -> PyResult<Self> {
        Ok(Self {
            inner: profile(kind, height, width, center, edge)?,
        })
    }

    fn __call__(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    fn __repr__(&self) -> String {
        format!("Profile({:?})", self.inner)
    }
}

/// Vector, scalar and pseudo-scalar potentials.
#[pyclass(name = "Potential", module = "diracjm", frozen, from_py_object)]
#[derive(Clone)]
struct PyPotential {
    inner: PotentialSpec,
}

#[pymethods]
impl PyPotential {
    #[new]
    #[pyo3(signature = (v = None, s = None, u = None, parity = "auto"))]
    fn new(v: Option<PyProfile>, s: Option<PyProfile>, u: Option<PyProfile>, parity: &str) -> PyResult<Self> {
        use jmatrix_dirac::potential::Parity;
        let parity = match parity {
            "auto" => ParityDecl::Auto,
            "even" => ParityDecl::Declared(Parity::Even),
            "odd" => ParityDecl::Declared(Parity::Odd),
            "none" => ParityDecl::Declared(Parity::None),
            other => return Err(PyValueError::new_err(format!("unknown parity {other:?}"))),
        };
        let get = |p: Option<PyProfile>| p.map_or(Profile::Zero, |p| p.inner);
        Ok(Self {
            inner: PotentialSpec::new(get(v), get(s), get(u)).with_parity(parity),
        })
    }

    /// `(V, S, U)` at `x`.
    fn values(&self, x: f64) -> (f64, f64, f64) {
        (self.inner.v(x), self.inner.s(x), self.inner.u(x))
    }

    #[getter]
    fn parity(&self) -> PyResult<&'static str> {
        self.inner.effective_parity().map(|p| p.name()).map_err(to_py)
    }
}

/// Amplitudes at one energy.
#[pyclass(name = "ScatteringResult", module = "diracjm", frozen, skip_from_py_object)]
struct PyScatteringResult {
    #[pyo3(get)]
    energy: f64,
    #[pyo3(get)]
    k: f64,
    #[pyo3(get)]
    t: Complex64,
    #[pyo3(get)]
    r: Complex64,
    #[pyo3(get)]
    w_plus: Complex64,
    #[pyo3(get)]
    w_minus: Complex64,
    #[pyo3(get)]
    unitarity_defect: f64,
    #[pyo3(get)]
    coupling: f64,
    #[pyo3(get)]
    path: &'static str,
    #[pyo3(get)]
    flags: String,
}

impl From<scattering::ScatteringResult> for PyScatteringResult {
    fn from(r: scattering::ScatteringResult) -> Self {
        Self {
            energy: r.energy,
            k: r.k,
            t: r.t,
            r: r.r,
            w_plus: r.w_plus,
            w_minus: r.w_minus,
            unitarity_defect: r.unitarity_defect,
            coupling: r.coupling,
            path: r.path.name(),
            flags: r.flags.to_string(),
        }
    }
}

#[pymethods]
impl PyScatteringResult {
    #[getter]
    fn transmission(&self) -> f64 {
        self.t.norm_sqr()
    }

    #[getter]
    fn reflection(&self) -> f64 {
        self.r.norm_sqr()
    }

    fn __repr__(&self) -> String {
        format!(
            "ScatteringResult(energy={}, T={}, R={}, path={})",
            self.energy, self.t, self.r, self.path
        )
    }
}

/// J-matrix solver for one mass, potential and basis.
#[pyclass(name = "Solver", module = "diracjm", frozen, skip_from_py_object)]
struct PySolver {
    inner: scattering::Solver,
}

#[pymethods]
impl PySolver {
    #[new]
    #[pyo3(signature = (mass, potential, scale = 1.5, size = 40, tau = None, quadrature = None, method = "dressed", tail_correction = true, path = "auto"))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        mass: f64,
        potential: &PyPotential,
        scale: f64,
        size: usize,
        tau: Option<f64>,
        quadrature: Option<usize>,
        method: &str,
        tail_correction: bool,
        path: &str,
    ) -> PyResult<Self> {
        let kind = tau.map_or(MiddleBasisKind::Spinor, |tau| MiddleBasisKind::KineticBalance { tau });
        let params = match quadrature {
            Some(k) => BasisParams::with_quadrature(scale, size, k, kind),
            None => BasisParams::new(scale, size, kind),
        }
        .map_err(to_py)?;
        let method = match method {
            "dressed" => Method::Dressed,
            "literal" => Method::Literal,
            other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
        };
        let path = match path {
            "auto" => PathChoice::Auto,
            "coupled" => PathChoice::Coupled,
            "decoupled" => PathChoice::Decoupled,
            other => return Err(PyValueError::new_err(format!("unknown path {other:?}"))),
        };
        let options = SolverOptions {
            method,
            tail_correction,
            path,
            ..SolverOptions::default()
        };
        let inner = scattering::Solver::new(mass, potential.inner.clone(), params, options).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn solve(&self, py: Python<'_>, energy: f64) -> PyResult<PyScatteringResult> {
        py.detach(|| self.inner.solve(energy)).map(Into::into).map_err(to_py)
    }

    /// Results in grid order; failed points raise.
    fn sweep(&self, py: Python<'_>, energies: Vec<f64>) -> PyResult<Vec<PyScatteringResult>> {
        let results = py.detach(|| self.inner.energy_sweep(&energies));
        results.into_iter().map(|r| r.map(Into::into).map_err(to_py)).collect()
    }

    /// Corner Green elements `(G++, G--, G+-, G-+)`.
    fn corner_greens(&self, energy: f64) -> PyResult<(f64, f64, f64, f64)> {
        let c = self.inner.corner_greens(energy).map_err(to_py)?;
        Ok((c.pp, c.mm, c.pm, c.mp))
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.middle.dim()
    }

    #[getter]
    fn parity(&self) -> &'static str {
        self.inner.parity.name()
    }
}

/// `(T, R)` from direct integration of the Dirac equation.
#[pyfunction]
#[pyo3(signature = (potential, mass, energy, tolerance = 1e-12))]
fn oracle(py: Python<'_>, potential: &PyPotential, mass: f64, energy: f64, tolerance: f64) -> PyResult<(Complex64, Complex64)> {
    let kin = Kinematics::new(mass, energy, 1.0).map_err(to_py)?;
    let opts = OracleOptions {
        tolerance,
        ..OracleOptions::default()
    };
    py.detach(|| integrate_dirac(&potential.inner, &kin, &opts))
        .map(|r| (r.t, r.r))
        .map_err(to_py)
}

/// Runs a configuration file text and returns the CSV output.
#[pyfunction]
fn run_config(py: Python<'_>, text: &str) -> PyResult<String> {
    let config = RunConfig::parse(text, std::path::Path::new(".")).map_err(to_py)?;
    let mut buf = Vec::new();
    py.detach(|| jmatrix_dirac::cli::run(&config, &mut buf)).map_err(to_py)?;
    String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn diracjm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProfile>()?;
    m.add_class::<PyPotential>()?;
    m.add_class::<PySolver>()?;
    m.add_class::<PyScatteringResult>()?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
