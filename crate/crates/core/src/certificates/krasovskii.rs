use super::report::{CheckReport, ReportBuilder, Tolerance};
use super::spec::{CertificateSpec, Variant};
use super::{jump_pairs, on_flow};
use crate::error::{Error, Result};
use crate::lyapunov::{dini_functional_deriv, FunctionalSeries};
use crate::system::{euclid, Solution};

/// Flow and jump hypotheses of a functional certificate, gated by
/// `V(φ) ≥ ρ(|u|)`. Flow uses the upper right Dini derivative along the
/// stored solution; jumps compare `V` on the memory windows just before
/// and just after.
pub fn check_krasovskii(spec: &CertificateSpec, sol: &Solution, tol: Tolerance) -> Result<CheckReport> {
    if spec.variant.is_razumikhin() {
        return Err(Error::Schema(format!("{} is not a functional variant", spec.variant)));
    }
    let v = spec.v_func()?;
    let rho = spec.req(&spec.rho, "rho")?;
    let series = FunctionalSeries::new(sol, |m| v.eval(m))?;
    let first = sol.x.global_index(sol.x.forward_start(), 0);
    let k_of = |p: usize, i: usize| sol.x.global_index(p, i) - first;
    let w = &*spec.dist_w;
    let mut b = ReportBuilder::new(spec.variant.name(), "krasovskii", tol).gated().traced();
    b.note("per-selection check: derivative taken along the simulated flow");

    let mut skipped = 0usize;
    for (p, i, t, j, x) in sol.x.forward_samples() {
        if !on_flow(sol, p) {
            continue;
        }
        let k = k_of(p, i);
        let vk = series.value(k);
        b.sample();
        if vk < rho.eval(euclid(sol.input_at(p, i))) {
            continue;
        }
        let d = match dini_functional_deriv(|m| v.eval(m), sol, t, j) {
            Ok(d) => d,
            Err(Error::OutOfDomain { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        b.hit();
        let (cond, rhs) = match spec.variant {
            Variant::ThmG | Variant::PropGJump => (
                "D+V <= -alpha3(|x|_W)",
                -spec.req(&spec.decrease, "decrease")?.at_state(x, w),
            ),
            Variant::PropGFlow => ("D+V <= 0", 0.0),
            Variant::ThmH => (
                "D+V <= -lambda1 V + lambda2 Vhat",
                -spec.num(spec.lambda1, "lambda1")? * vk
                    + spec.num(spec.lambda2, "lambda2")? * series.vhat(k),
            ),
            Variant::ThmI => (
                "D+V <= lambda1 V + lambda2 Vhat",
                spec.num(spec.lambda1, "lambda1")? * vk
                    + spec.num(spec.lambda2, "lambda2")? * series.vhat(k),
            ),
            _ => unreachable!("functional variants only"),
        };
        b.test(t, j, cond, d, rhs);
    }
    if skipped > 0 {
        b.note(format!("{skipped} flow samples had no room ahead for a difference quotient"));
    }

    let n = sol.x.dim();
    for jp in jump_pairs(sol) {
        let k = k_of(jp.pre, jp.pre_i);
        let before = series.value(k);
        let after = series.value(k + 1);
        b.sample();
        if before < rho.eval(euclid(sol.input_at(jp.pre, jp.pre_i))) {
            continue;
        }
        b.hit();
        let (t, j) = (jp.t, jp.j);
        let x = sol.x.pieces()[jp.pre].state(jp.pre_i, n);
        match spec.variant {
            Variant::ThmG | Variant::PropGFlow => {
                let a3 = spec.req(&spec.decrease, "decrease")?.at_state(x, w);
                b.test(t, j, "V+ <= V - alpha3(|x|_W)", after, before - a3);
            }
            Variant::PropGJump => {
                b.test(t, j, "V+ <= V", after, before);
            }
            Variant::ThmH | Variant::ThmI => {
                b.test(t, j, "V+ <= mu V", after, spec.num(spec.mu, "mu")? * before);
            }
            _ => unreachable!("functional variants only"),
        }
    }
    Ok(b.finish())
}
