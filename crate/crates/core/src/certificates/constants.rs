use super::report::{combine, CheckReport, ReportBuilder, Tolerance};
use super::spec::{CertificateSpec, Gauge, Variant};
use crate::error::Result;
use crate::hybrid_time::HybridTimeDomain;
use crate::lyapunov::{
    adt_margin, check_dwell_band, check_persistence, check_small_gain, default_class_grid,
    default_gain_grid, lambda_thm7, radt_margin, solve_lambda_bar, validate_class, FunctionClass,
};

/// Scalar and domain-level conditions of a certificate: class membership of
/// the comparison functions on the default grid, small gain, dwell-time
/// margins, the rate band, the dwell band and persistence. Domain-level
/// parts are skipped with a note when `domain` is `None`.
pub fn check_constants(
    spec: &CertificateSpec,
    delta: f64,
    domain: Option<&HybridTimeDomain>,
) -> Result<CheckReport> {
    spec.validate()?;
    let name = spec.variant.name();
    let grid = default_class_grid();
    let mut parts: Vec<CheckReport> = Vec::new();
    let mut notes: Vec<String> = Vec::new();

    for (g, label) in [(&spec.alpha1, "alpha1"), (&spec.alpha2, "alpha2")] {
        if let Some(Gauge::OfDistance(c)) = g {
            parts.push(tag(validate_class(c, FunctionClass::KInf, &grid), label));
        }
    }
    if let Some(Gauge::OfDistance(c)) = &spec.decrease {
        parts.push(tag(validate_class(c, FunctionClass::Pd, &grid), "decrease"));
    }
    if let Some(c) = &spec.alpha3 {
        parts.push(tag(validate_class(c, FunctionClass::Pd, &grid), "alpha3"));
    }
    if let Some(c) = &spec.rho {
        let class = if spec.variant.is_razumikhin() { FunctionClass::Pd } else { FunctionClass::KInf };
        parts.push(tag(validate_class(c, class, &grid), "rho"));
    }
    for (g, label) in [(&spec.gamma1, "gamma1"), (&spec.gamma2, "gamma2")] {
        if let Some(c) = g {
            parts.push(tag(validate_class(c, FunctionClass::Nondecreasing, &grid), label));
        }
    }

    let gain = default_gain_grid();
    if let Some(g1) = &spec.gamma1 {
        parts.push(tag(check_small_gain(g1, &gain), "gamma1 small gain"));
    }
    if spec.variant == Variant::ThmA {
        parts.push(tag(check_small_gain(spec.req(&spec.rho, "rho")?, &gain), "rho small gain"));
    }

    let mut b = ReportBuilder::new(name, "margins", Tolerance::new(0.0, 0.0));
    match spec.variant {
        Variant::ThmE => {
            let m = adt_margin(spec.num(spec.lambda1, "lambda1")?, spec.num(spec.mu, "mu")?, spec.num(spec.eps, "eps")?)?;
            strict(&mut b, "lambda1 eps - ln mu > 0", m);
        }
        Variant::ThmF => {
            let m = radt_margin(spec.num(spec.lambda1, "lambda1")?, spec.num(spec.mu, "mu")?, spec.num(spec.eps, "eps")?)?;
            strict(&mut b, "lambda1 eps + ln mu < 0", -m);
        }
        Variant::ThmH => {
            let l1 = spec.num(spec.lambda1, "lambda1")?;
            let l2 = spec.num(spec.lambda2, "lambda2")?;
            let mu = spec.num(spec.mu, "mu")?;
            let eps = spec.num(spec.eps, "eps")?;
            let lam = spec.num(spec.lambda, "lambda")?;
            let bar = solve_lambda_bar(l1, l2, delta)?;
            b.note(format!("lambda_bar = {bar:.12}"));
            strict(&mut b, "lambda > 0", lam);
            strict(&mut b, "lambda < lambda_bar", bar - lam);
            strict(&mut b, "eps lambda - ln mu > 0", eps * lam - mu.ln());
        }
        Variant::ThmI => {
            let mu = spec.num(spec.mu, "mu")?;
            let eps = spec.num(spec.eps, "eps")?;
            let lam = lambda_thm7(
                spec.num(spec.lambda1, "lambda1")?,
                spec.num(spec.lambda2, "lambda2")?,
                mu,
                *spec.req(&spec.n0, "n0")?,
                delta,
            )?;
            b.note(format!("lambda = {lam:.12}"));
            strict(&mut b, "ln mu + eps lambda < 0", -(mu.ln() + eps * lam));
        }
        _ => {}
    }
    parts.push(b.finish());

    if let (Some(eps), Some(n0)) = (spec.eps, spec.n0) {
        match domain {
            Some(d) => parts.push(check_dwell_band(d, eps, n0)?),
            None => notes.push("dwell band not checked: no domain supplied".into()),
        }
    }
    if let Some(p) = &spec.persistence {
        match domain {
            Some(d) => parts.push(check_persistence(d, p)?),
            None => notes.push("persistence not checked: no domain supplied".into()),
        }
    }

    let mut r = combine(name, "constants", &parts);
    for p in &parts {
        if !p.passed {
            r.notes.push(format!("failed: {}", p.check));
        }
    }
    r.notes.extend(notes);
    Ok(r)
}

fn tag(mut r: CheckReport, label: &str) -> CheckReport {
    r.check = format!("{label}: {}", r.check);
    r
}

/// Record `margin > 0` with no tolerance.
fn strict(b: &mut ReportBuilder, cond: &str, margin: f64) {
    b.sample();
    if !(margin > 0.0) {
        b.fail(0.0, 0, cond, -margin, 0.0);
    } else {
        b.test(0.0, 0, cond, -margin, 0.0);
    }
}
