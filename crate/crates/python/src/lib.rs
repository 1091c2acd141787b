//! Python bindings: scenarios, presets, the scalar conditions and the two
//! worked examples. Reports cross the boundary as plain dicts.

use std::path::PathBuf;

use hymem_core::case_studies::{classify_example2, example1_phi, Example2Params};
use hymem_core::hybrid_time::io::arc_to_csv_string;
use hymem_core::lyapunov::{adt_margin, lambda_thm7, radt_margin, solve_lambda_bar};
use hymem_core::scenario::{self, ScenarioConfig};
use hymem_core::system::Solution;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: hymem_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// A validated scenario configuration.
#[pyclass(name = "Scenario", module = "hymem")]
struct PyScenario {
    cfg: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { cfg: ScenarioConfig::from_json(text).map_err(err)? })
    }

    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        Ok(Self { cfg: scenario::preset(name).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.cfg.name
    }

    fn to_json(&self) -> String {
        self.cfg.to_json()
    }

    fn with_seed(&self, seed: u64) -> Self {
        Self { cfg: self.cfg.clone().with_seed(seed) }
    }

    /// Simulate and, with `checks`, run every configured check. Relative
    /// CSV paths in the config are read from `base`.
    #[pyo3(signature = (checks = true, base = "."))]
    fn run(&self, py: Python<'_>, checks: bool, base: &str) -> PyResult<PyRun> {
        let cfg = self.cfg.clone();
        let base = PathBuf::from(base);
        let out = py
            .detach(move || scenario::run_scenario(&cfg, &base, checks))
            .map_err(err)?;
        let verdict = scenario::exit_code(out.solution.termination, &out.reports);
        Ok(PyRun {
            reports_json: serde_json::to_string(&out.reports).expect("reports serialise"),
            verdict: verdict.code(),
            notes: out.notes,
            solution: out.solution,
        })
    }

    /// Run and write the artifacts into `out_dir`; returns the report dict.
    #[pyo3(signature = (out_dir, checks = true, base = "."))]
    fn execute<'py>(
        &self,
        py: Python<'py>,
        out_dir: &str,
        checks: bool,
        base: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let cfg = self.cfg.clone();
        let (base, out) = (PathBuf::from(base), PathBuf::from(out_dir));
        let rep = py
            .detach(move || scenario::execute(&cfg, &base, checks, &out))
            .map_err(err)?;
        json_to_py(py, &serde_json::to_string(&rep).expect("report serialises"))
    }

    fn __repr__(&self) -> String {
        format!("Scenario(name={:?})", self.cfg.name)
    }
}

/// A simulated solution with its check reports.
#[pyclass(name = "Run", module = "hymem")]
struct PyRun {
    solution: Solution,
    reports_json: String,
    verdict: i32,
    notes: Vec<String>,
}

#[pymethods]
impl PyRun {
    /// `"horizon"`, `"dead-end"` or `"zeno"`.
    #[getter]
    fn termination(&self) -> String {
        format!("{:?}", self.solution.termination).to_lowercase().replace("deadend", "dead-end")
    }

    #[getter]
    fn end(&self) -> (f64, i64) {
        self.solution.end()
    }

    #[getter]
    fn final_state(&self) -> Vec<f64> {
        self.solution.final_state()
    }

    #[getter]
    fn exit_code(&self) -> i32 {
        self.verdict
    }

    #[getter]
    fn notes(&self) -> Vec<String> {
        self.notes.clone()
    }

    fn jump_times(&self) -> Vec<(f64, i64)> {
        self.solution.jumps().map(|e| (e.t, e.j)).collect()
    }

    /// Forward samples as `(t, j, x)` tuples.
    fn samples(&self) -> Vec<(f64, i64, Vec<f64>)> {
        self.solution.x.forward_samples().map(|(_, _, t, j, x)| (t, j, x.to_vec())).collect()
    }

    fn trajectory_csv(&self) -> PyResult<String> {
        arc_to_csv_string(&self.solution.x, true).map_err(err)
    }

    fn reports<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &self.reports_json)
    }

    fn __repr__(&self) -> String {
        let (t, j) = self.solution.end();
        format!("Run(termination={}, end=({t}, {j}), exit_code={})", self.termination(), self.verdict)
    }
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    scenario::preset_names()
}

/// `φ_l(τ)` of the networked loop's Lyapunov weight.
#[pyfunction]
#[pyo3(name = "example1_phi")]
fn py_example1_phi(l: u8, tau: f64) -> PyResult<f64> {
    example1_phi(l, tau).map_err(err)
}

/// Per-mode bounds and regime of a switched delay system given as JSON.
#[pyfunction]
#[pyo3(name = "classify_example2")]
fn py_classify_example2<'py>(py: Python<'py>, params_json: &str, eps: f64) -> PyResult<Bound<'py, PyAny>> {
    let p: Example2Params = serde_json::from_str(params_json)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let cls = classify_example2(&p, eps).map_err(err)?;
    json_to_py(py, &serde_json::to_string(&cls).expect("classification serialises"))
}

#[pyfunction]
#[pyo3(name = "adt_margin")]
fn py_adt_margin(lambda1: f64, mu: f64, eps: f64) -> PyResult<f64> {
    adt_margin(lambda1, mu, eps).map_err(err)
}

#[pyfunction]
#[pyo3(name = "radt_margin")]
fn py_radt_margin(lambda1: f64, mu: f64, eps: f64) -> PyResult<f64> {
    radt_margin(lambda1, mu, eps).map_err(err)
}

#[pyfunction]
#[pyo3(name = "solve_lambda_bar")]
fn py_solve_lambda_bar(lambda1: f64, lambda2: f64, delta: f64) -> PyResult<f64> {
    solve_lambda_bar(lambda1, lambda2, delta).map_err(err)
}

#[pyfunction]
#[pyo3(name = "lambda_thm7")]
fn py_lambda_thm7(lambda1: f64, lambda2: f64, mu: f64, n0: u32, delta: f64) -> PyResult<f64> {
    lambda_thm7(lambda1, lambda2, mu, n0, delta).map_err(err)
}

#[pymodule]
pub fn hymem(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyRun>()?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(py_example1_phi, m)?)?;
    m.add_function(wrap_pyfunction!(py_classify_example2, m)?)?;
    m.add_function(wrap_pyfunction!(py_adt_margin, m)?)?;
    m.add_function(wrap_pyfunction!(py_radt_margin, m)?)?;
    m.add_function(wrap_pyfunction!(py_solve_lambda_bar, m)?)?;
    m.add_function(wrap_pyfunction!(py_lambda_thm7, m)?)?;
    Ok(())
}
