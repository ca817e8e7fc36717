use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use pathspace::approximators;
use pathspace::harness::{run_experiment as run, ExperimentConfig};
use pathspace::metrics;
use pathspace::processes::{sample_fdd as sample, JumpLaw, ProcessKind, ProcessSampler};
use pathspace::prokhorov;
use pathspace::{io, DiscreteMeasure, Error, Norm, PlPath, StepPath};

fn err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn norm(name: &str) -> PyResult<Norm> {
    match name {
        "sup" => Ok(Norm::Sup),
        "euclidean" => Ok(Norm::Euclidean),
        other => Err(PyValueError::new_err(format!("unknown norm {other:?}"))),
    }
}

/// A step, piecewise-linear or tapered path.
#[pyclass(name = "Path", frozen, skip_from_py_object)]
struct PyPath(pathspace::Path);

#[pymethods]
impl PyPath {
    #[staticmethod]
    #[pyo3(signature = (knots, values, horizon = f64::INFINITY))]
    fn step(knots: Vec<f64>, values: Vec<f64>, horizon: f64) -> PyResult<Self> {
        Ok(Self(StepPath::new(knots, values, horizon).map_err(err)?.into()))
    }

    #[staticmethod]
    fn linear(knots: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        Ok(Self(PlPath::new(knots, values).map_err(err)?.into()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self(io::path_from_json(text).map_err(err)?))
    }

    fn to_json(&self) -> String {
        io::path_to_json(&self.0)
    }

    fn __call__(&self, t: f64) -> PyResult<f64> {
        self.0.eval(t).map_err(err)
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.0.horizon()
    }

    #[getter]
    fn knots(&self) -> Vec<f64> {
        self.0.knots()
    }

    fn restrict(&self, t: f64) -> PyResult<Self> {
        Ok(Self(self.0.restrict(t).map_err(err)?))
    }

    fn taper(&self, m: u32) -> PyResult<Self> {
        Ok(Self(approximators::taper(&self.0, m).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!("Path({})", io::path_to_json(&self.0))
    }
}

fn as_step(p: &PyPath) -> PyResult<&StepPath> {
    match &p.0 {
        pathspace::Path::Step(s) => Ok(s),
        _ => Err(PyValueError::new_err("Skorokhod distances take step paths")),
    }
}

/// A finitely supported probability measure on R^k.
#[pyclass(name = "Measure", frozen, skip_from_py_object)]
struct PyMeasure(DiscreteMeasure);

#[pymethods]
impl PyMeasure {
    #[new]
    fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> PyResult<Self> {
        let dim = atoms.first().map_or(0, Vec::len);
        Ok(Self(DiscreteMeasure::new(dim, atoms, weights).map_err(err)?))
    }

    #[staticmethod]
    fn empirical(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        Ok(Self(DiscreteMeasure::empirical(dim, &rows).map_err(err)?))
    }

    #[getter]
    fn atoms(&self) -> Vec<Vec<f64>> {
        self.0.atoms().map(<[f64]>::to_vec).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Marginal on the given 0-based coordinates.
    fn project(&self, coords: Vec<usize>) -> PyResult<Self> {
        Ok(Self(prokhorov::project_marginal(&self.0, &coords).map_err(err)?))
    }
}

#[pyfunction]
fn uniform_distance(x: &PyPath, y: &PyPath) -> PyResult<f64> {
    metrics::uniform_distance(&x.0, &y.0).map_err(err)
}

/// Returns `(value, lower_bound, upper_bound)`.
#[pyfunction]
#[pyo3(signature = (x, y, tol = 1e-9, complete = false))]
fn skorokhod_distance(x: &PyPath, y: &PyPath, tol: f64, complete: bool) -> PyResult<(f64, f64, f64)> {
    let f = if complete {
        metrics::skorokhod_circ_distance
    } else {
        metrics::skorokhod_distance
    };
    let r = f(as_step(x)?, as_step(y)?, tol).map_err(err)?;
    Ok((r.value, r.lower_bound, r.upper_bound))
}

#[pyfunction]
fn modulus(x: &PyPath, delta: f64) -> PyResult<f64> {
    metrics::modulus(&x.0, delta).map_err(err)
}

#[pyfunction]
fn two_sided_modulus(x: &PyPath, delta: f64) -> PyResult<f64> {
    metrics::two_sided_modulus(&x.0, delta, x.0.horizon()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (x, delta, resolution = 1e-3))]
fn w_prime(x: &PyPath, delta: f64, resolution: f64) -> PyResult<f64> {
    metrics::sparse_modulus_w_prime(&x.0, delta, resolution).map_err(err)
}

#[pyfunction]
fn linear_interpolant(z: Vec<f64>) -> PyResult<PyPath> {
    Ok(PyPath(approximators::linear_interpolant(&z).map_err(err)?.into()))
}

#[pyfunction]
fn step_interpolant(z: Vec<f64>) -> PyResult<PyPath> {
    Ok(PyPath(approximators::step_interpolant(&z).map_err(err)?.into()))
}

#[pyfunction]
fn halfline_step_interpolant(z: Vec<f64>, level: u32) -> PyResult<PyPath> {
    Ok(PyPath(approximators::halfline_step_interpolant(&z, level).map_err(err)?.into()))
}

/// Returns `(rho, certificate_epsilon)`.
#[pyfunction]
#[pyo3(signature = (mu, nu, norm = "sup"))]
fn prokhorov_distance(mu: &PyMeasure, nu: &PyMeasure, norm: &str) -> PyResult<(f64, f64)> {
    let n = self::norm(norm)?;
    let (rho, cert) = prokhorov::prokhorov_distance(&mu.0, &nu.0, n).map_err(err)?;
    cert.verify(&mu.0, &nu.0, n).map_err(err)?;
    Ok((rho, cert.epsilon))
}

#[pyfunction]
#[pyo3(signature = (mu, nu, norm = "sup"))]
fn prokhorov_oracle(mu: &PyMeasure, nu: &PyMeasure, norm: &str) -> PyResult<f64> {
    prokhorov::prokhorov_oracle(&mu.0, &nu.0, self::norm(norm)?).map_err(err)
}

/// Draws `n` rows of the process at `times`.
#[pyfunction]
#[pyo3(signature = (process, times, n, seed = 0, rate = 1.0))]
fn sample_fdd(process: &str, times: Vec<f64>, n: usize, seed: u64, rate: f64) -> PyResult<Vec<Vec<f64>>> {
    let kind = match process {
        "brownian" => ProcessKind::Brownian,
        "poisson" => ProcessKind::Poisson { rate },
        "compound_poisson" => ProcessKind::CompoundPoisson {
            rate,
            jump: JumpLaw::Normal { mean: 0.0, std: 1.0 },
        },
        other => return Err(PyValueError::new_err(format!("unknown process {other:?}"))),
    };
    let mut s = ProcessSampler::new(kind, seed).map_err(err)?;
    Ok(sample(&mut s, &times, n).map_err(err)?.samples().to_vec())
}

/// Runs an experiment from a JSON config and returns the report as JSON.
#[pyfunction]
fn run_experiment(config_json: &str) -> PyResult<String> {
    let cfg: ExperimentConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(run(&cfg).map_err(err)?.to_json())
}

#[pymodule]
fn _pathspace(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPath>()?;
    m.add_class::<PyMeasure>()?;
    m.add_function(wrap_pyfunction!(uniform_distance, m)?)?;
    m.add_function(wrap_pyfunction!(skorokhod_distance, m)?)?;
    m.add_function(wrap_pyfunction!(modulus, m)?)?;
    m.add_function(wrap_pyfunction!(two_sided_modulus, m)?)?;
    m.add_function(wrap_pyfunction!(w_prime, m)?)?;
    m.add_function(wrap_pyfunction!(linear_interpolant, m)?)?;
    m.add_function(wrap_pyfunction!(step_interpolant, m)?)?;
    m.add_function(wrap_pyfunction!(halfline_step_interpolant, m)?)?;
    m.add_function(wrap_pyfunction!(prokhorov_distance, m)?)?;
    m.add_function(wrap_pyfunction!(prokhorov_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(sample_fdd, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
