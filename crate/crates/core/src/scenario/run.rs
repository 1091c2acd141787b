use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::artifacts::{write_report, write_trace_csv, write_trajectory, ScenarioReport, TRACES_CSV};
use super::config::{
    CertificateConfig, EnvelopeConfig, InitialSpec, InputSpec, ScenarioConfig, SystemChoice,
    VConfig,
};
use crate::case_studies::{
    build_example1, build_example2, classify_example2, example1_history, example2_certificate,
    example2_history, Example2Classification, Example2Params,
};
use crate::certificates::{
    check_decay_bound, check_growth_bound, check_iss_envelope, check_vbar_monotone,
    check_weighted_bound, run_suite_with, CertificateSpec, CheckReport, Gauge, ReportBuilder,
    Tolerance,
};
use crate::error::{Error, Result};
use crate::hybrid_time::io::read_arc_csv;
use crate::hybrid_time::{HybridArc, InputSignal, Interpolation, MemoryArc};
use crate::lyapunov::{LyapunovFunctional, LyapunovState};
use crate::system::{simulate, EventKind, SimConfig, Solution, SystemDef};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ZENO: i32 = 3;
pub const EXIT_VACUOUS: i32 = 4;

/// Everything needed to simulate and verify, resolved from a config.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub system: SystemDef,
    pub initial: MemoryArc,
    pub input: InputSignal,
    pub sim: SimConfig,
    pub certificate: Option<CertificateSpec>,
    pub tolerance: Tolerance,
    pub derivative_tolerance: Tolerance,
    pub vbar_tol: Option<f64>,
    pub envelopes: Vec<EnvelopeConfig>,
    /// Rate used by envelopes that leave `lambda` out and whose certificate
    /// has none.
    pub default_lambda: Option<f64>,
    /// Reports that need no trajectory, such as the regime conditions of
    /// the switched delay example.
    pub static_reports: Vec<CheckReport>,
    pub notes: Vec<String>,
}

/// Outcome of a scenario run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub solution: Solution,
    /// Empty when only simulating.
    pub reports: Vec<CheckReport>,
    pub notes: Vec<String>,
}

/// Summary of the verdicts that decide the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Violations,
    Zeno,
    Vacuous,
}

impl Verdict {
    pub fn code(self) -> i32 {
        match self {
            Verdict::Pass => EXIT_OK,
            Verdict::Violations => EXIT_VIOLATIONS,
            Verdict::Zeno => EXIT_ZENO,
            Verdict::Vacuous => EXIT_VACUOUS,
        }
    }
}

/// Exit code from the termination kind and the reports. Failures win over
/// a Zeno stop, which wins over vacuity. Vacuity means every gated report
/// passed without a single trigger hit.
pub fn exit_code(termination: EventKind, reports: &[CheckReport]) -> Verdict {
    if reports.iter().any(|r| !r.passed) {
        return Verdict::Violations;
    }
    if termination == EventKind::Zeno {
        return Verdict::Zeno;
    }
    let gated: Vec<&CheckReport> = reports.iter().filter(|r| r.trigger_hits.is_some()).collect();
    if !gated.is_empty() && gated.iter().all(|r| r.vacuous) {
        return Verdict::Vacuous;
    }
    Verdict::Pass
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let path = Path::new(p);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn read_csv(base: &Path, p: &str, interp: Interpolation) -> Result<HybridArc> {
    let f = File::open(resolve(base, p)).map_err(|e| Error::Config(format!("{p}: {e}")))?;
    read_arc_csv(f, interp)
}

fn scalar_linear(a: f64, b: f64, r: f64, delta: f64) -> Result<SystemDef> {
    if !(r >= 0.0 && delta >= r && delta > 0.0) {
        return Err(Error::Param(format!("need 0 <= r <= delta and delta > 0, got r={r}, delta={delta}")));
    }
    Ok(SystemDef::new("scalar-linear", delta, 1, 1)
        .with_flow(move |m, u| {
            let xr = if b != 0.0 { m.delayed(r)[0] } else { 0.0 };
            vec![a * m.now()[0] + b * xr + u[0]]
        })
        .with_max_delay(r))
}

fn halving(factor: f64) -> SystemDef {
    SystemDef::new("halving", 1.0, 1, 1)
        .with_flow_set(|_, _| false)
        .with_jump_set(|_, _| true)
        .with_jump(move |m, _| vec![factor * m.now()[0]])
}

fn zeno() -> SystemDef {
    SystemDef::new("zeno", 1.0, 1, 1).with_jump_set(|_, _| true)
}

/// Strict regime predicates of the claimed case, one sample per mode. The
/// `j` of a violation is the mode index.
fn case_conditions(
    p: &Example2Params,
    claimed: u8,
    cls: &Example2Classification,
) -> Result<CheckReport> {
    let mut b = ReportBuilder::new("example2", "case conditions", Tolerance::new(0.0, 0.0));
    for (i, m) in cls.modes.iter().enumerate() {
        b.sample();
        // (condition, lhs, rhs, strict): lhs < rhs or lhs <= rhs
        let conds: [(&str, f64, f64, bool); 3] = match claimed {
            1 => [
                ("Lambda < 1/varpi", m.big_lambda, 1.0 / p.varpi, true),
                ("Omega < 0", m.omega, 0.0, true),
                ("lambda_max(D)^2 < 1", m.d2, 1.0, true),
            ],
            2 => [
                ("Omega < -Lambda", m.omega, -m.big_lambda, true),
                ("0 <= Omega", 0.0, m.omega, false),
                ("1 < lambda_max(D)^2", 1.0, m.d2, true),
            ],
            3 => [
                ("0 < Lambda", 0.0, m.big_lambda, true),
                ("0 <= Omega", 0.0, m.omega, false),
                ("lambda_max(D)^2 < 1", m.d2, 1.0, true),
            ],
            k => return Err(Error::Config(format!("case must be 1, 2 or 3, got {k}"))),
        };
        for (cond, lhs, rhs, strict) in conds {
            let ok = if strict { lhs < rhs } else { lhs <= rhs };
            if ok {
                b.test(0.0, i as i64, cond, lhs, rhs);
            } else {
                b.fail(0.0, i as i64, cond, lhs, rhs);
            }
        }
    }
    b.note(format!("classified as {:?}", cls.case));
    b.note("violation j is the mode index");
    Ok(b.finish())
}

fn v_from_config(cert: &mut CertificateSpec, v: &VConfig, dim: usize) -> Result<()> {
    let check = |w: &[f64]| {
        if w.len() != dim {
            return Err(Error::DimensionMismatch { what: "V weights".into(), expected: dim, got: w.len() });
        }
        Ok(())
    };
    match v.clone() {
        VConfig::Quadratic { weights } => {
            check(&weights)?;
            cert.v_state = Some(LyapunovState::new(move |x| {
                x.iter().zip(&weights).map(|(v, w)| w * v * v).sum()
            }));
        }
        VConfig::QuadraticIntegral { weights, mu, r } => {
            check(&weights)?;
            if !(r > 0.0) {
                return Err(Error::Config(format!("integral window must be positive, got {r}")));
            }
            cert.v_func = Some(LyapunovFunctional::new(move |m| {
                let q = |x: &[f64]| x.iter().zip(&weights).map(|(v, w)| w * v * v).sum::<f64>();
                q(m.now()) + mu * m.integrate_time(r, q)
            }));
        }
    }
    Ok(())
}

fn explicit_certificate(c: &CertificateConfig, sys: &SystemDef) -> Result<CertificateSpec> {
    let variant = c.variant.ok_or_else(|| Error::Config("certificate needs `variant`".into()))?;
    let mut cert = CertificateSpec::new(variant);
    cert.dist_w = sys.dist_w.clone();
    if let Some(v) = &c.v {
        v_from_config(&mut cert, v, sys.state_dim)?;
    }
    for f in [&c.alpha1, &c.alpha2, &c.alpha3, &c.decrease, &c.rho, &c.gamma1, &c.gamma2]
        .into_iter()
        .flatten()
    {
        f.validate()?;
    }
    cert.alpha1 = c.alpha1.clone().map(Gauge::from);
    cert.alpha2 = c.alpha2.clone().map(Gauge::from);
    cert.alpha3 = c.alpha3.clone();
    cert.decrease = c.decrease.clone().map(Gauge::from);
    cert.rho = c.rho.clone();
    cert.gamma1 = c.gamma1.clone();
    cert.gamma2 = c.gamma2.clone();
    cert.lambda1 = c.lambda1;
    cert.lambda2 = c.lambda2;
    cert.mu = c.mu;
    cert.eps = c.eps;
    cert.n0 = c.n0;
    cert.lambda = c.lambda;
    cert.persistence = c.persistence.clone();
    cert.validate()?;
    Ok(cert)
}

/// Resolve a config into a system, initial arc, input and certificate.
/// Relative CSV paths are read from `base`.
pub fn prepare(cfg: &ScenarioConfig, base: &Path) -> Result<Prepared> {
    cfg.validate()?;
    let mut notes = Vec::new();
    let mut static_reports = Vec::new();
    let wired = cfg.certificate.as_ref().is_some_and(|c| c.wired);
    let mut default_lambda = None;

    let (system, wired_cert, default_initial): (SystemDef, Option<CertificateSpec>, Option<MemoryArc>) =
        match &cfg.system {
            SystemChoice::Example1 { params } => {
                let ex = build_example1(params)?;
                notes.extend(ex.notes.iter().cloned());
                (ex.system, Some(ex.certificate), Some(example1_history(params, 0, 1.0)?))
            }
            SystemChoice::Example2 { params, case, lambda_scale } => {
                let system = build_example2(params)?;
                let cls = classify_example2(params, params.period)?;
                notes.extend(cls.notes.iter().cloned());
                static_reports.push(case_conditions(params, *case, &cls)?);
                let cert = if wired {
                    let (c, rates) = example2_certificate(params, &cls, *lambda_scale)?;
                    if rates.lambda.is_some() {
                        notes.push(format!(
                            "certificate rates: {}",
                            serde_json::to_string(&rates).expect("rates serialise")
                        ));
                    }
                    default_lambda = rates.lambda;
                    Some(c)
                } else {
                    None
                };
                let x0 = vec![1.0; params.state_dim()];
                (system, cert, Some(example2_history(params, &x0, 0)?))
            }
            SystemChoice::ScalarLinear { a, b, r, delta } => (scalar_linear(*a, *b, *r, *delta)?, None, None),
            SystemChoice::Halving { factor } => (halving(*factor), None, None),
            SystemChoice::Zeno => (zeno(), None, None),
        };

    let initial = match &cfg.initial {
        None => match default_initial {
            Some(a) => a,
            None => MemoryArc::constant(&vec![1.0; system.state_dim], system.delta)?,
        },
        Some(InitialSpec::Constant { value, depth }) => {
            let value = match &cfg.system {
                SystemChoice::Example2 { params, .. } if value.len() == params.state_dim() => {
                    let mut z = value.clone();
                    z.extend([0.0, 0.0]);
                    z
                }
                _ => value.clone(),
            };
            MemoryArc::constant(&value, depth.unwrap_or(system.delta))?
        }
        Some(InitialSpec::Random { seed, radius }) => match &cfg.system {
            SystemChoice::Example1 { params } => example1_history(params, *seed, *radius)?,
            _ => return Err(Error::Config("random histories are only defined for example1".into())),
        },
        Some(InitialSpec::Sampled { path }) => {
            MemoryArc::new(read_csv(base, path, Interpolation::Linear)?)?
        }
    };

    let input = match &cfg.input {
        InputSpec::Zero => InputSignal::zero(system.input_dim),
        InputSpec::Constant { value } => InputSignal::constant(value),
        InputSpec::Sine { amplitude, frequency } => {
            let (a, f, dim) = (*amplitude, *frequency, system.input_dim);
            InputSignal::from_fn(dim, move |t, _| {
                vec![a * (std::f64::consts::TAU * f * t).sin(); dim]
            })
        }
        InputSpec::Sampled { path } => InputSignal::sampled(read_csv(base, path, Interpolation::Linear)?)?,
    };

    let certificate = match &cfg.certificate {
        None => None,
        Some(c) if c.wired => Some(wired_cert.ok_or_else(|| {
            Error::Config(format!("preset `{}` has no wired certificate", system.name))
        })?),
        Some(c) => Some(explicit_certificate(c, &system)?),
    };
    let cc = cfg.certificate.clone().unwrap_or_default();

    Ok(Prepared {
        system,
        initial,
        input,
        sim: cfg.sim.clone(),
        certificate,
        tolerance: cc.tolerance.unwrap_or_default(),
        derivative_tolerance: cc.derivative_tolerance.unwrap_or(Tolerance::derivative()),
        vbar_tol: cc.vbar_tol,
        envelopes: cfg.envelopes.clone(),
        default_lambda,
        static_reports,
        notes,
    })
}

fn need<T: Copy>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("envelope needs `{what}` or a certificate that sets it")))
}

fn envelope_alpha2(
    a: &Option<crate::lyapunov::ComparisonFunction>,
    cert: Option<&CertificateSpec>,
) -> Result<Gauge> {
    match (a, cert.and_then(|c| c.alpha2.clone())) {
        (Some(f), _) => Ok(Gauge::OfDistance(f.clone())),
        (None, Some(g)) => Ok(g),
        (None, None) => Err(Error::Config("envelope needs `alpha2`".into())),
    }
}

fn run_envelope(env: &EnvelopeConfig, prep: &Prepared, sol: &Solution) -> Result<CheckReport> {
    let cert = prep.certificate.as_ref();
    let sys = &prep.system;
    let dist = sys.dist_w.clone();
    let w = move |x: &[f64]| dist(x);
    let field = |f: fn(&CertificateSpec) -> Option<f64>| cert.and_then(f);
    match env {
        EnvelopeConfig::Decay { mu, lambda1, alpha2, tol } => {
            let v = cert
                .and_then(|c| c.v_state.clone())
                .ok_or_else(|| Error::Config("decay envelope needs a state-valued V".into()))?;
            check_decay_bound(
                sol,
                &v,
                need(mu.or(field(|c| c.mu)), "mu")?,
                need(lambda1.or(field(|c| c.lambda1)), "lambda1")?,
                &envelope_alpha2(alpha2, cert)?,
                &w,
                sys.delta,
                *tol,
            )
        }
        EnvelopeConfig::Weighted { mu, lambda, alpha2, tol }
        | EnvelopeConfig::Growth { mu, lambda, alpha2, tol } => {
            let v = cert
                .and_then(|c| c.v_func.clone())
                .ok_or_else(|| Error::Config("this envelope needs a functional V".into()))?;
            let f = if matches!(env, EnvelopeConfig::Weighted { .. }) {
                check_weighted_bound
            } else {
                check_growth_bound
            };
            f(
                sol,
                &v,
                need(mu.or(field(|c| c.mu)), "mu")?,
                need(lambda.or(field(|c| c.lambda)).or(prep.default_lambda), "lambda")?,
                &envelope_alpha2(alpha2, cert)?,
                &w,
                sys.delta,
                *tol,
            )
        }
        EnvelopeConfig::Iss { beta, gamma, tol } => {
            let beta = beta.clone();
            check_iss_envelope(sol, &move |r, t, j| beta.eval(r, t, j), gamma, &w, *tol)
        }
    }
}

/// Run every configured check on a solution: static reports, the
/// certificate suite, `V̄` monotonicity and the envelopes, in that order.
pub fn verify(prep: &Prepared, sol: &Solution) -> Result<Vec<CheckReport>> {
    let mut out = prep.static_reports.clone();
    let cert = prep.certificate.as_ref();
    if let Some(c) = cert {
        let domain = sol.x.domain();
        let suite = run_suite_with(c, sol, Some(&domain), prep.tolerance, prep.derivative_tolerance)?;
        out.extend(suite);
        if let (Some(tol), Some(v)) = (prep.vbar_tol, c.v_state.as_ref()) {
            out.push(check_vbar_monotone(v, sol, sol.delta, tol)?);
        }
    }
    for env in &prep.envelopes {
        out.push(run_envelope(env, prep, sol)?);
    }
    Ok(out)
}

/// Simulate, then verify when `with_checks` is set.
pub fn run_scenario(cfg: &ScenarioConfig, base: &Path, with_checks: bool) -> Result<RunOutcome> {
    let prep = prepare(cfg, base)?;
    let solution = simulate(&prep.system, &prep.initial, &prep.input, &prep.sim)?;
    let reports = if with_checks { verify(&prep, &solution)? } else { Vec::new() };
    Ok(RunOutcome { solution, reports, notes: prep.notes })
}

/// Output directory of a config: `output_dir` or `out/<name>`, relative to `base`.
pub fn output_dir(cfg: &ScenarioConfig, base: &Path) -> PathBuf {
    match &cfg.output_dir {
        Some(d) => resolve(base, d),
        None => base.join("out").join(&cfg.name),
    }
}

/// Run a scenario and write its artifacts into `out`: the trajectory files
/// always, `report.json` (and `traces.csv` when asked) with checks.
pub fn execute(cfg: &ScenarioConfig, base: &Path, with_checks: bool, out: &Path) -> Result<ScenarioReport> {
    let run = run_scenario(cfg, base, with_checks)?;
    write_trajectory(out, &run.solution)?;
    let verdict = exit_code(run.solution.termination, &run.reports);
    let (end_t, end_j) = run.solution.end();
    let report = ScenarioReport {
        name: cfg.name.clone(),
        system: system_name(&cfg.system).to_string(),
        termination: run.solution.termination,
        end_t,
        end_j,
        verdict,
        exit_code: verdict.code(),
        notes: run.notes,
        reports: run.reports,
    };
    if with_checks {
        write_report(out, &report)?;
        if cfg.trace_csv {
            let f = File::create(out.join(TRACES_CSV))?;
            write_trace_csv(&report.reports, std::io::BufWriter::new(f))?;
        }
    }
    Ok(report)
}

fn system_name(s: &SystemChoice) -> &'static str {
    match s {
        SystemChoice::Example1 { .. } => "example1",
        SystemChoice::Example2 { .. } => "example2",
        SystemChoice::ScalarLinear { .. } => "scalar-linear",
        SystemChoice::Halving { .. } => "halving",
        SystemChoice::Zeno => "zeno",
    }
}
