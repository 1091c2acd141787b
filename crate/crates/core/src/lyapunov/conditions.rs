use serde::{Deserialize, Serialize};

use super::comparison::ComparisonFunction;
use crate::certificates::{CheckReport, ReportBuilder, Tolerance};
use crate::error::{Error, Result};
use crate::hybrid_time::HybridTimeDomain;

/// `λ₁ε - ln μ`; the average dwell-time condition holds when positive.
pub fn adt_margin(lambda1: f64, mu: f64, eps: f64) -> Result<f64> {
    if !(mu >= 1.0) {
        return Err(Error::Domain(format!("average dwell time needs μ ≥ 1, got {mu}")));
    }
    if !(lambda1 > 0.0 && eps > 0.0) {
        return Err(Error::Domain("average dwell time needs λ₁ > 0 and ε > 0".into()));
    }
    Ok(lambda1 * eps - mu.ln())
}

/// `λ₁ε + ln μ`; the reverse average dwell-time condition holds when negative.
pub fn radt_margin(lambda1: f64, mu: f64, eps: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Domain(format!("reverse dwell time needs μ in (0, 1), got {mu}")));
    }
    if !(lambda1 > 0.0 && eps > 0.0) {
        return Err(Error::Domain("reverse dwell time needs λ₁ > 0 and ε > 0".into()));
    }
    Ok(lambda1 * eps + mu.ln())
}

/// `Γ(λ) = λ - λ₁ + λ₂ e^{λ(Δ+1)}`.
pub fn lambda_bar_residual(lambda: f64, lambda1: f64, lambda2: f64, delta: f64) -> f64 {
    lambda - lambda1 + lambda2 * (lambda * (delta + 1.0)).exp()
}

pub const ROOT_TOL: f64 = 1e-10;
pub const ROOT_MAX_ITER: usize = 200;

/// The unique positive root of [`lambda_bar_residual`], by bisection on
/// `[0, λ₁]`.
pub fn solve_lambda_bar(lambda1: f64, lambda2: f64, delta: f64) -> Result<f64> {
    if !(lambda1 > lambda2 && lambda2 >= 0.0) || !delta.is_finite() || delta < 0.0 {
        return Err(Error::Domain(format!(
            "λ̄ needs λ₁ > λ₂ ≥ 0 and finite Δ ≥ 0, got λ₁={lambda1}, λ₂={lambda2}, Δ={delta}"
        )));
    }
    if lambda2 == 0.0 {
        return Ok(lambda1);
    }
    let g = |l: f64| lambda_bar_residual(l, lambda1, lambda2, delta);
    let (mut lo, mut hi) = (0.0, lambda1);
    for _ in 0..ROOT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let r = g(mid);
        if r.abs() <= ROOT_TOL && hi - lo < 1e-12 {
            return Ok(mid);
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let root = 0.5 * (lo + hi);
    if g(root).abs() > ROOT_TOL {
        return Err(Error::Domain(format!(
            "λ̄ bisection stalled with residual {}",
            g(root)
        )));
    }
    Ok(root)
}

/// `λ₁ + λ₂ μ^{-N₀} e^{Δ+1}`.
pub fn lambda_thm7(lambda1: f64, lambda2: f64, mu: f64, n0: u32, delta: f64) -> Result<f64> {
    if !(lambda1 >= 0.0 && lambda2 >= 0.0) {
        return Err(Error::Domain("λ₁ and λ₂ must be nonnegative".into()));
    }
    if !(mu > 0.0 && mu < 1.0) || n0 == 0 {
        return Err(Error::Domain(format!("need μ in (0, 1) and N₀ ≥ 1, got μ={mu}, N₀={n0}")));
    }
    Ok(lambda1 + lambda2 * mu.powi(-(n0 as i32)) * (delta + 1.0).exp())
}

/// Points at which domain-level conditions are checked: both endpoints
/// and eight interior points of every forward segment.
fn probe_points(d: &HybridTimeDomain) -> Vec<(f64, i64)> {
    let mut out = Vec::new();
    for seg in d.forward_part() {
        out.push((seg.t_lo, seg.j));
        if seg.t_hi > seg.t_lo {
            for k in 1..=8 {
                out.push((seg.t_lo + (seg.t_hi - seg.t_lo) * k as f64 / 9.0, seg.j));
            }
            out.push((seg.t_hi, seg.j));
        }
    }
    out
}

/// `j ∈ [t/ε - N₀, t/ε + N₀]` on the forward part of `d`.
pub fn check_dwell_band(d: &HybridTimeDomain, eps: f64, n0: u32) -> Result<CheckReport> {
    if !(eps > 0.0) || n0 == 0 {
        return Err(Error::Domain(format!("need ε > 0 and N₀ ≥ 1, got ε={eps}, N₀={n0}")));
    }
    let tol = Tolerance::new(1e-9, 0.0);
    let mut b = ReportBuilder::new("dwell", "dwell band", tol);
    let n0 = n0 as f64;
    for (t, j) in probe_points(d) {
        b.sample();
        let c = t / eps;
        b.test(t, j, "j ≤ t/ε + N0", j as f64, c + n0);
        b.test(t, j, "j ≥ t/ε - N0", c - n0, j as f64);
    }
    Ok(b.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PersistenceTarget {
    /// Ordinary time grows with hybrid time.
    Flow,
    /// The jump count grows with hybrid time.
    Jump,
}

/// Persistent flow or jumps: `t + j ≥ T` implies `t > γ_δ(T) - N_δ`
/// (flow) or `j > γ_δ(T) - N_δ` (jump).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersistenceSpec {
    pub gamma: ComparisonFunction,
    pub n_delta: f64,
    pub target: PersistenceTarget,
}

pub fn check_persistence(d: &HybridTimeDomain, spec: &PersistenceSpec) -> Result<CheckReport> {
    if !(spec.n_delta > 0.0) {
        return Err(Error::Domain(format!("N_δ must be positive, got {}", spec.n_delta)));
    }
    let name = match spec.target {
        PersistenceTarget::Flow => "persistent flow",
        PersistenceTarget::Jump => "persistent jumps",
    };
    // Strict inequality: no tolerance in the accepting direction.
    let mut b = ReportBuilder::new("persistence", name, Tolerance::new(0.0, 0.0));
    for (t, j) in probe_points(d) {
        let s = t + j as f64;
        if s <= 0.0 {
            continue;
        }
        b.sample();
        let bound = spec.gamma.eval(s) - spec.n_delta;
        let have = match spec.target {
            PersistenceTarget::Flow => t,
            PersistenceTarget::Jump => j as f64,
        };
        if !(have > bound) {
            b.fail(t, j, name, bound, have);
        }
    }
    Ok(b.finish())
}
