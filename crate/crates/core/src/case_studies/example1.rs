//! Networked control loop with a transmission timer and a constant delay,
//! certified by a Lyapunov-Razumikhin function with timer-dependent weights.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::certificates::{CertificateSpec, Gauge, Variant};
use crate::error::{Error, Result};
use crate::hybrid_time::{hermite, HybridArc, MemoryArc};
use crate::lyapunov::{ComparisonFunction, LyapunovState, PersistenceSpec, PersistenceTarget};
use crate::system::SystemDef;

/// Largest admissible `τ_mati`.
pub const TAU_BAR: f64 = 0.04125;

/// Step of the precomputed timer tables.
pub const PHI_STEP: f64 = 1e-5;
/// The tables extend to this `τ`, past [`TAU_BAR`], so finite differences
/// near the end of an interval stay inside.
pub const PHI_SPAN: f64 = 0.06;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Example1Params {
    /// Constant delay (s).
    pub r: f64,
    /// Minimum time between transmissions (s).
    pub eps: f64,
    pub tau_mati: f64,
    pub tau_mad: f64,
}

impl Default for Example1Params {
    fn default() -> Self {
        Self {
            r: 0.02,
            eps: 0.01,
            tau_mati: 0.04,
            tau_mad: 0.02,
        }
    }
}

impl Example1Params {
    pub fn validate(&self) -> Result<()> {
        let ok = self.r > 0.0
            && 0.0 < self.eps
            && self.eps < self.tau_mati
            && self.tau_mati <= TAU_BAR
            && 0.0 <= self.tau_mad
            && self.tau_mad <= self.tau_mati;
        if ok {
            Ok(())
        } else {
            Err(Error::Param(format!(
                "need r > 0, 0 < eps < tau_mati <= {TAU_BAR} and 0 <= tau_mad <= tau_mati; got {self:?}"
            )))
        }
    }

    /// `Δ = r + r/ε + 1`.
    pub fn delta(&self) -> f64 {
        self.r + self.r / self.eps + 1.0
    }
}

/// Right-hand sides of the two timer Riccati equations.
fn riccati(l: usize, p: f64) -> f64 {
    const Q: f64 = 64.0 / 7.0;
    match l {
        0 => -8.0 * p - Q * p * p - 8.0,
        _ => -10.0 * p - Q * p * p - 15.0,
    }
}

/// Dense RK4 solution of one timer equation with its derivative at each node.
struct PhiTable {
    val: Vec<f64>,
    der: Vec<f64>,
}

impl PhiTable {
    fn build(l: usize, p0: f64) -> Self {
        let n = (PHI_SPAN / PHI_STEP).round() as usize;
        let h = PHI_STEP;
        let mut val = Vec::with_capacity(n + 1);
        let mut p = p0;
        for _ in 0..=n {
            val.push(p);
            let k1 = riccati(l, p);
            let k2 = riccati(l, p + 0.5 * h * k1);
            let k3 = riccati(l, p + 0.5 * h * k2);
            let k4 = riccati(l, p + h * k3);
            p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        let der = val.iter().map(|&p| riccati(l, p)).collect();
        Self { val, der }
    }

    fn eval(&self, tau: f64) -> f64 {
        let last = self.val.len() - 1;
        let s = (tau / PHI_STEP).clamp(0.0, last as f64);
        let i = (s.floor() as usize).min(last - 1);
        let (t0, t1) = (i as f64 * PHI_STEP, (i + 1) as f64 * PHI_STEP);
        let mut out = [0.0];
        hermite(
            t0,
            &[self.val[i]],
            &[self.der[i]],
            t1,
            &[self.val[i + 1]],
            &[self.der[i + 1]],
            tau.clamp(0.0, PHI_SPAN),
            &mut out,
        );
        out[0]
    }
}

fn tables() -> &'static [PhiTable; 2] {
    static T: OnceLock<[PhiTable; 2]> = OnceLock::new();
    T.get_or_init(|| [PhiTable::build(0, 2.0), PhiTable::build(1, 2.2)])
}

/// Timer weight `φ_l(τ)` for `τ ∈ [0, τ̄]`.
pub fn example1_phi(l: u8, tau: f64) -> Result<f64> {
    if l > 1 {
        return Err(Error::Domain(format!("logic variable must be 0 or 1, got {l}")));
    }
    if !(0.0..=TAU_BAR).contains(&tau) {
        return Err(Error::Domain(format!("tau = {tau} outside [0, {TAU_BAR}]")));
    }
    Ok(tables()[l as usize].eval(tau))
}

/// `φ_l(τ)` without the range check, for evaluating `V` near interval ends.
fn phi_raw(l: f64, tau: f64) -> f64 {
    tables()[usize::from(l >= 0.5)].eval(tau)
}

/// `V = x² + φ_l(τ)(e + s)²` on the state `(x, e, s, τ, l)`.
pub fn example1_v(z: &[f64]) -> f64 {
    let w = z[1] + z[2];
    z[0] * z[0] + phi_raw(z[4], z[3]) * w * w
}

/// `|(x, e, s)|`.
pub fn example1_dist(z: &[f64]) -> f64 {
    (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt()
}

/// Numerical checks of the side assumptions on the timer weights, as
/// human-readable findings.
pub fn phi_assumptions(p: &Example1Params) -> Vec<String> {
    let mut out = Vec::new();
    let grid = |hi: f64| (0..=400).map(move |k| hi * k as f64 / 400.0);
    let bound = 0.5 * phi_raw(1.0, 0.0);
    let worst = grid(p.tau_mati)
        .map(|t| (t, phi_raw(0.0, t)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    if worst.1 < bound {
        out.push(format!(
            "phi_0(tau) >= 0.5 phi_1(0) = {bound} fails: phi_0({:.5}) = {:.6}",
            worst.0, worst.1
        ));
    } else {
        out.push(format!("phi_0(tau) >= {bound} holds on [0, tau_mati]"));
    }
    let worst = grid(p.tau_mad)
        .map(|t| (t, phi_raw(1.0, t) - phi_raw(0.0, t)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    if worst.1 < 0.0 {
        out.push(format!(
            "phi_1(tau) >= phi_0(tau) fails at tau = {:.5} (gap {:.6})",
            worst.0, worst.1
        ));
    } else {
        out.push("phi_1(tau) >= phi_0(tau) holds on [0, tau_mad]".into());
    }
    for l in 0..2u8 {
        let (lo, hi) = grid(p.tau_mati).map(|t| phi_raw(l as f64, t)).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), v| (lo.min(v), hi.max(v)),
        );
        out.push(format!("phi_{l} ranges over [{lo:.6}, {hi:.6}] on [0, tau_mati]"));
    }
    out
}

/// The built example: system, certificate and build-time findings.
#[derive(Debug, Clone)]
pub struct Example1 {
    pub params: Example1Params,
    pub system: SystemDef,
    pub certificate: CertificateSpec,
    pub notes: Vec<String>,
}

/// State `(x, e, s, τ, l)`, scalar input. The delayed term reads
/// `x(t - r)` at the largest jump index present at that time.
pub fn build_example1(p: &Example1Params) -> Result<Example1> {
    p.validate()?;
    let Example1Params { r, eps, tau_mati, tau_mad } = p.clone();
    let in_c = move |z: &[f64]| {
        let tau = z[3];
        if z[4] < 0.5 {
            (0.0..=tau_mati).contains(&tau)
        } else {
            (0.0..=tau_mad).contains(&tau)
        }
    };
    let in_d = move |z: &[f64]| {
        let tau = z[3];
        if z[4] < 0.5 {
            (eps..=tau_mati).contains(&tau)
        } else {
            (0.0..=tau_mad).contains(&tau)
        }
    };
    let system = SystemDef::new("example1", p.delta(), 5, 1)
        .with_flow(move |m, u| {
            let z = m.now();
            let xr = m.delayed(r)[0];
            let (x, e) = (z[0], z[1]);
            vec![
                -7.0 * x + xr + e + u[0],
                5.0 * x - xr - e + u[0],
                0.0,
                1.0,
                0.0,
            ]
        })
        .with_flow_set(move |m, _| in_c(m.now()))
        .with_jump_set(move |m, _| in_d(m.now()))
        .with_jump(|m, _| {
            let z = m.now();
            if z[4] < 0.5 {
                vec![z[0], 0.5 * z[1], 0.0, 0.0, 1.0]
            } else {
                let w = z[1] + z[2];
                vec![z[0], w, -w, z[3], 0.0]
            }
        })
        .with_dist_w(example1_dist)
        .with_max_delay(r);

    let mut c = CertificateSpec::new(Variant::PropD);
    c.dist_w = Arc::new(example1_dist);
    c.v_state = Some(LyapunovState::new(example1_v));
    c.alpha1 = Some(Gauge::of_state("x^2", |z| z[0] * z[0]));
    c.alpha2 = Some(Gauge::of_state("x^2 + 2.2 (e+s)^2", |z| {
        z[0] * z[0] + 2.2 * (z[1] + z[2]).powi(2)
    }));
    c.decrease = Some(Gauge::of_state("x^2 + e^2", |z| z[0] * z[0] + z[1] * z[1]));
    c.gamma1 = Some(ComparisonFunction::linear(0.5));
    c.gamma2 = Some(ComparisonFunction::power(1.0, 2.0));
    c.persistence = Some(PersistenceSpec {
        gamma: ComparisonFunction::linear(0.5),
        n_delta: 1.0,
        target: PersistenceTarget::Jump,
    });
    c.validate()?;

    Ok(Example1 {
        params: p.clone(),
        system,
        certificate: c,
        notes: phi_assumptions(p),
    })
}

/// A random initial memory arc on `[-Δ, 0]`: piecewise-linear `x` and `e`
/// with `|(x, e)| ≤ radius` at every knot, `s = τ = l = 0`.
pub fn example1_history(p: &Example1Params, seed: u64, radius: f64) -> Result<MemoryArc> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let depth = p.delta();
    let knots = 60usize;
    let mut vals = Vec::with_capacity(knots + 1);
    for _ in 0..=knots {
        let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let rad: f64 = radius * rng.random::<f64>().sqrt();
        vals.push((rad * ang.cos(), rad * ang.sin()));
    }
    let arc = HybridArc::history_from_fn(5, depth, knots, |s| {
        let k = (((s + depth) / depth) * knots as f64).round() as usize;
        let (x, e) = vals[k.min(knots)];
        vec![x, e, 0.0, 0.0, 0.0]
    })?;
    MemoryArc::new(arc)
}
