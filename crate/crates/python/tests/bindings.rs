use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<R>(f: impl FnOnce(Python<'_>, &Bound<'_, PyModule>) -> PyResult<R>) -> R {
    use hymem::hymem as module;
    pyo3::append_to_inittab!(module);
    Python::attach(|py| {
        let m = py.import("hymem").expect("module imports");
        f(py, &m).expect("python call succeeds")
    })
}

#[test]
fn module_round_trip() {
    with_module(|py, m| {
        let names: Vec<String> = m.getattr("preset_names")?.call0()?.extract()?;
        assert!(names.iter().any(|n| n == "example2-case2"));

        let adt: f64 = m.getattr("adt_margin")?.call1((1.0, 2.0, 1.0))?.extract()?;
        assert!((adt - (1.0 - 2f64.ln())).abs() < 1e-12);

        let sc = m.getattr("Scenario")?.call_method1("preset", ("halving",))?;
        let kw = PyDict::new(py);
        kw.set_item("checks", false)?;
        let run = sc.call_method("run", (), Some(&kw))?;
        let end: (f64, i64) = run.getattr("end")?.extract()?;
        assert_eq!(end, (0.0, 3));
        let x: Vec<f64> = run.getattr("final_state")?.extract()?;
        assert_eq!(x, vec![1.0]);

        let sc = m.getattr("Scenario")?.call_method1("preset", ("scalar-linear",))?;
        let run = sc.call_method0("run")?;
        assert_eq!(run.getattr("exit_code")?.extract::<i32>()?, 0);
        let reports = run.call_method0("reports")?;
        assert_eq!(reports.len()?, 6);
        let first = reports.get_item(0)?;
        assert_eq!(first.get_item("check")?.extract::<String>()?, "sandwich");

        let bad = m.getattr("Scenario")?.call_method1("from_json", ("{\"name\": 1}",));
        assert!(bad.is_err_and(|e| e.is_instance_of::<pyo3::exceptions::PyValueError>(py)));
        Ok(())
    });
}
