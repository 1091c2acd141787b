use serde::{Deserialize, Serialize};

use super::report::{CheckReport, ReportBuilder, Tolerance};
use super::spec::Gauge;
use crate::error::Result;
use crate::hybrid_time::Memory;
use crate::lyapunov::{ComparisonFunction, LyapunovFunctional, LyapunovState};
use crate::system::{euclid, Solution};

/// A parametric class-KLL bound `β(r, t, j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KllBound {
    /// `c · r · e^{-a t} · e^{-b j}`.
    Exp { c: f64, a: f64, b: f64 },
    /// `c · r^p · e^{-a t} · e^{-b j}`.
    PowerExp { c: f64, p: f64, a: f64, b: f64 },
}

impl KllBound {
    pub fn eval(&self, r: f64, t: f64, j: i64) -> f64 {
        match *self {
            KllBound::Exp { c, a, b } => c * r * (-a * t - b * j as f64).exp(),
            KllBound::PowerExp { c, p, a, b } => c * r.powf(p) * (-a * t - b * j as f64).exp(),
        }
    }
}

/// `α₂(‖A^Δ_{[0,0]}x‖_W)`.
fn initial_bound(sol: &Solution, alpha2: &Gauge, delta: f64, w: &dyn Fn(&[f64]) -> f64) -> Result<f64> {
    let m = Memory::new(&sol.x, 0.0, 0, delta)?;
    let sup = m.sup_over(w);
    Ok(alpha2.on_window(&m, sup))
}

/// `V(x(t,j)) ≤ μ^j e^{-λ₁ t} α₂(‖A^Δ_{[0,0]}x‖_W)` at every forward
/// sample, within `tol·(1 + rhs)`.
#[allow(clippy::too_many_arguments)]
pub fn check_decay_bound(
    sol: &Solution,
    v: &LyapunovState,
    mu: f64,
    lambda1: f64,
    alpha2: &Gauge,
    dist_w: &dyn Fn(&[f64]) -> f64,
    delta: f64,
    tol: f64,
) -> Result<CheckReport> {
    let a = initial_bound(sol, alpha2, delta, dist_w)?;
    let mut b = ReportBuilder::new("envelope", "decay bound", Tolerance::new(tol, tol)).traced();
    for (_, _, t, j, x) in sol.x.forward_samples() {
        b.sample();
        let rhs = mu.powi(j as i32) * (-lambda1 * t).exp() * a;
        b.test(t, j, "V <= mu^j e^{-lambda1 t} alpha2", v.eval(x), rhs);
    }
    Ok(b.finish())
}

/// `e^{λt} V(A^Δ_{[t,j]}x) ≤ μ^j α₂(‖A^Δ_{[0,0]}x‖_W)` at every forward
/// sample.
#[allow(clippy::too_many_arguments)]
pub fn check_weighted_bound(
    sol: &Solution,
    v: &LyapunovFunctional,
    mu: f64,
    lambda: f64,
    alpha2: &Gauge,
    dist_w: &dyn Fn(&[f64]) -> f64,
    delta: f64,
    tol: f64,
) -> Result<CheckReport> {
    let a = initial_bound(sol, alpha2, delta, dist_w)?;
    let mut b = ReportBuilder::new("envelope", "weighted bound", Tolerance::new(tol, 0.0)).traced();
    for (_, _, t, j, _) in sol.x.forward_samples() {
        b.sample();
        let m = Memory::new(&sol.x, t, j, delta)?;
        let lhs = (lambda * t).exp() * v.eval(&m);
        b.test(t, j, "e^{lambda t} V <= mu^j alpha2", lhs, mu.powi(j as i32) * a);
    }
    Ok(b.finish())
}

/// `V(A^Δ_{[t,j]}x) ≤ μ^j e^{λt} α₂(‖A^Δ_{[0,0]}x‖_W)` at every forward
/// sample.
#[allow(clippy::too_many_arguments)]
pub fn check_growth_bound(
    sol: &Solution,
    v: &LyapunovFunctional,
    mu: f64,
    lambda: f64,
    alpha2: &Gauge,
    dist_w: &dyn Fn(&[f64]) -> f64,
    delta: f64,
    tol: f64,
) -> Result<CheckReport> {
    let a = initial_bound(sol, alpha2, delta, dist_w)?;
    let mut b = ReportBuilder::new("envelope", "growth bound", Tolerance::new(tol, 0.0)).traced();
    for (_, _, t, j, _) in sol.x.forward_samples() {
        b.sample();
        let m = Memory::new(&sol.x, t, j, delta)?;
        let rhs = mu.powi(j as i32) * (lambda * t).exp() * a;
        b.test(t, j, "V <= mu^j e^{lambda t} alpha2", v.eval(&m), rhs);
    }
    Ok(b.finish())
}

/// `|x(t,j)|_W ≤ max{β(‖A^Δ_{[0,0]}x‖_W, t, j), γ(‖u‖_{(t,j)})}` at every
/// forward sample. The input sup runs over the recorded input samples up
/// to `(t, j)`.
pub fn check_iss_envelope(
    sol: &Solution,
    beta: &dyn Fn(f64, f64, i64) -> f64,
    gamma: &ComparisonFunction,
    dist_w: &dyn Fn(&[f64]) -> f64,
    tol: f64,
) -> Result<CheckReport> {
    let r0 = sol.initial().sup_over(dist_w);
    let mut b = ReportBuilder::new("envelope", "iss", Tolerance::new(tol, 0.0)).traced();
    let mut u_sup = 0.0f64;
    for (p, i, t, j, x) in sol.x.forward_samples() {
        b.sample();
        u_sup = u_sup.max(euclid(sol.input_at(p, i)));
        let rhs = beta(r0, t, j).max(gamma.eval(u_sup));
        b.test(t, j, "|x|_W <= max(beta, gamma)", dist_w(x), rhs);
    }
    Ok(b.finish())
}
