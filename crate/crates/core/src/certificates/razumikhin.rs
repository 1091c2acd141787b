use super::report::{CheckReport, ReportBuilder, Tolerance};
use super::spec::{CertificateSpec, Variant};
use super::{jump_pairs, on_flow};
use crate::error::{Error, Result};
use crate::hybrid_time::Memory;
use crate::lyapunov::{directional_deriv, LyapunovState, VbarSeries};
use crate::system::{euclid, Solution};

fn razumikhin_only(spec: &CertificateSpec) -> Result<()> {
    if spec.variant.is_razumikhin() {
        Ok(())
    } else {
        Err(Error::Schema(format!("{} is not a Razumikhin variant", spec.variant)))
    }
}

/// `α₁ ≤ V ≤ α₂` at every forward sample. Razumikhin variants compare
/// against the current state; functional variants use `|φ(0,0)|_W` on the
/// left and `‖φ‖_W` on the right.
pub fn check_sandwich(spec: &CertificateSpec, sol: &Solution) -> Result<CheckReport> {
    let a1 = spec.req(&spec.alpha1, "alpha1")?;
    let a2 = spec.req(&spec.alpha2, "alpha2")?;
    let w = spec.dist_w.clone();
    let mut b = ReportBuilder::new(spec.variant.name(), "sandwich", Tolerance::default());
    if spec.variant.is_razumikhin() {
        let v = spec.v_state()?;
        for (_, _, t, j, x) in sol.x.forward_samples() {
            b.sample();
            let vx = v.eval(x);
            b.test(t, j, "alpha1 <= V", a1.at_state(x, &*w), vx);
            b.test(t, j, "V <= alpha2", vx, a2.at_state(x, &*w));
        }
    } else {
        let v = spec.v_func()?;
        let norms = VbarSeries::new(&sol.x, |x| w(x));
        for (p, i, t, j, x) in sol.x.forward_samples() {
            b.sample();
            let m = Memory::new(&sol.x, t, j, sol.delta)?;
            let vm = v.eval(&m);
            let sup = norms.at(&sol.x, p, i, sol.delta, |x| w(x))?;
            b.test(t, j, "alpha1 <= V", a1.at_state(x, &*w), vm);
            b.test(t, j, "V <= alpha2", vm, a2.on_window(&m, sup));
        }
    }
    Ok(b.finish())
}

/// Flow hypothesis of a Razumikhin certificate, evaluated at every flow
/// sample where `V ≥ max{γ₁(V̄), γ₂(|u|)}`, along the stored derivative.
pub fn check_razumikhin_flow(
    spec: &CertificateSpec,
    sol: &Solution,
    tol: Tolerance,
) -> Result<CheckReport> {
    razumikhin_only(spec)?;
    let v = spec.v_state()?;
    let g1 = spec.req(&spec.gamma1, "gamma1")?;
    let g2 = spec.req(&spec.gamma2, "gamma2")?;
    let vf = |x: &[f64]| v.eval(x);
    let series = VbarSeries::new(&sol.x, vf);
    let n = sol.x.dim();
    let mut b = ReportBuilder::new(spec.variant.name(), "flow", tol).gated().traced();
    b.note("per-selection check: derivative taken along the simulated flow");
    for (p, i, t, j, x) in sol.x.forward_samples() {
        if !on_flow(sol, p) {
            continue;
        }
        let Some(f) = sol.x.pieces()[p].deriv(i, n) else {
            continue;
        };
        b.sample();
        let vx = series.value(sol.x.global_index(p, i));
        let vb = series.at(&sol.x, p, i, sol.delta, vf)?;
        let un = euclid(sol.input_at(p, i));
        if vx < g1.eval(vb).max(g2.eval(un)) {
            continue;
        }
        b.hit();
        let d = directional_deriv(vf, x, f)?;
        let (cond, rhs) = match spec.variant {
            Variant::ThmA => ("V° <= -alpha3(V)", -spec.req(&spec.alpha3, "alpha3")?.eval(vx)),
            Variant::ThmB | Variant::PropD => (
                "V° <= -rho(|x|_W)",
                -spec.req(&spec.decrease, "decrease")?.at_state(x, &*spec.dist_w),
            ),
            Variant::PropC => ("V° <= 0", 0.0),
            Variant::ThmE => ("V° <= -lambda1 V", -spec.num(spec.lambda1, "lambda1")? * vx),
            Variant::ThmF => ("V° <= lambda1 V", spec.num(spec.lambda1, "lambda1")? * vx),
            _ => unreachable!("checked above"),
        };
        b.test(t, j, cond, d, rhs);
    }
    Ok(b.finish())
}

/// Jump hypothesis of a Razumikhin certificate at every jump of the
/// stored solution. Variant A is unconditional; the others are gated by
/// the same trigger as the flow check.
pub fn check_razumikhin_jump(
    spec: &CertificateSpec,
    sol: &Solution,
    tol: Tolerance,
) -> Result<CheckReport> {
    razumikhin_only(spec)?;
    let v = spec.v_state()?;
    let vf = |x: &[f64]| v.eval(x);
    let series = VbarSeries::new(&sol.x, vf);
    let n = sol.x.dim();
    let gated = spec.variant != Variant::ThmA;
    let mut b = ReportBuilder::new(spec.variant.name(), "jump", tol);
    if gated {
        b = b.gated();
    }
    for jp in jump_pairs(sol) {
        b.sample();
        let x = sol.x.pieces()[jp.pre].state(jp.pre_i, n);
        let g = sol.x.pieces()[jp.pre + 1].state(0, n);
        let vx = vf(x);
        let vg = vf(g);
        let vb = series.at(&sol.x, jp.pre, jp.pre_i, sol.delta, vf)?;
        let (t, j) = (jp.t, jp.j);
        if spec.variant == Variant::ThmA {
            b.test(t, j, "V(g) <= rho(Vbar)", vg, spec.req(&spec.rho, "rho")?.eval(vb));
            continue;
        }
        let g1 = spec.req(&spec.gamma1, "gamma1")?;
        let g2 = spec.req(&spec.gamma2, "gamma2")?;
        let un = euclid(sol.input_at(jp.pre, jp.pre_i));
        if vx < g1.eval(vb).max(g2.eval(un)) {
            continue;
        }
        b.hit();
        match spec.variant {
            Variant::ThmB | Variant::PropC => {
                let r = spec.req(&spec.decrease, "decrease")?.at_state(x, &*spec.dist_w);
                b.test(t, j, "V(g) - V <= -rho(|x|_W)", vg - vx, -r);
            }
            Variant::PropD => {
                b.test(t, j, "V(g) <= V", vg, vx);
            }
            Variant::ThmE | Variant::ThmF => {
                b.test(t, j, "V(g) <= mu V", vg, spec.num(spec.mu, "mu")? * vx);
            }
            _ => unreachable!("checked above"),
        }
    }
    Ok(b.finish())
}

/// `V̄(A^Δ_{[t,j]}x)` never increases by more than `tol` between
/// consecutive forward samples.
pub fn check_vbar_monotone(v: &LyapunovState, sol: &Solution, delta: f64, tol: f64) -> Result<CheckReport> {
    let vf = |x: &[f64]| v.eval(x);
    let series = VbarSeries::new(&sol.x, vf);
    let mut b = ReportBuilder::new("vbar", "vbar monotone", Tolerance::new(tol, 0.0));
    let mut prev: Option<f64> = None;
    for (p, i, t, j, _) in sol.x.forward_samples() {
        let cur = series.at(&sol.x, p, i, delta, vf)?;
        if let Some(before) = prev {
            b.sample();
            b.test(t, j, "Vbar(t,j) <= Vbar(prev)", cur, before);
        }
        prev = Some(cur);
    }
    Ok(b.finish())
}
