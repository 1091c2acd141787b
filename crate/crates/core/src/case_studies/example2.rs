//! Impulsive switched linear systems with a constant delay, certified by a
//! Lyapunov-Krasovskii functional with an exponentially weighted integral.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::certificates::{CertificateSpec, Gauge, Variant};
use crate::error::{Error, Result};
use crate::hybrid_time::{Memory, MemoryArc};
use crate::lyapunov::{solve_lambda_bar, ComparisonFunction, LyapunovFunctional};
use crate::system::SystemDef;

/// One mode `p`: `ẋ = A x + B x(t-r) + C u`, `x⁺ = D x`, with functional
/// weights `σ_p`, `μ_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example2Mode {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    pub sigma: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example2Params {
    pub modes: Vec<Example2Mode>,
    /// Delay (s).
    pub r: f64,
    /// Impulse period (s).
    pub period: f64,
    #[serde(default)]
    pub eta: f64,
    /// Scale of the input trigger.
    #[serde(default = "one")]
    pub varpi: f64,
}

fn one() -> f64 {
    1.0
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if nr == 0 || nc == 0 {
        return Err(Error::DimensionMismatch { what: what.into(), expected: 1, got: 0 });
    }
    for row in rows {
        if row.len() != nc {
            return Err(Error::DimensionMismatch { what: what.into(), expected: nc, got: row.len() });
        }
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

/// Largest eigenvalue of the symmetric part.
pub fn lambda_max_sym(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    s.symmetric_eigen().eigenvalues.max()
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().max()
}

/// Mode matrices checked for consistent dimensions.
#[derive(Debug, Clone)]
struct Mats {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl Example2Params {
    pub fn state_dim(&self) -> usize {
        self.modes.first().map_or(0, |m| m.a.len())
    }

    pub fn input_dim(&self) -> usize {
        self.modes.first().and_then(|m| m.c.first()).map_or(0, Vec::len)
    }

    /// `Δ = r + ⌊r/δ⌋ + 1`: enough hybrid depth to reach `r` seconds back
    /// across the impulses in between.
    pub fn delta(&self) -> f64 {
        self.r + (self.r / self.period).floor() + 1.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::Param("at least one mode is required".into()));
        }
        if !(self.r > 0.0 && self.period > 0.0 && self.eta >= 0.0 && self.varpi > 0.0) {
            return Err(Error::Param(format!(
                "need r > 0, period > 0, eta >= 0, varpi > 0; got r={}, period={}, eta={}, varpi={}",
                self.r, self.period, self.eta, self.varpi
            )));
        }
        for (k, m) in self.modes.iter().enumerate() {
            if !(m.sigma > 0.0 && m.mu > 0.0) {
                return Err(Error::Param(format!("mode {k}: sigma and mu must be positive")));
            }
        }
        self.mats().map(|_| ())
    }

    fn mats(&self) -> Result<Vec<Mats>> {
        let n = self.state_dim();
        let m = self.input_dim();
        let shape = |x: &DMatrix<f64>, r: usize, c: usize, what: &str| {
            if x.nrows() != r {
                Err(Error::DimensionMismatch { what: format!("rows of {what}"), expected: r, got: x.nrows() })
            } else if x.ncols() != c {
                Err(Error::DimensionMismatch { what: format!("columns of {what}"), expected: c, got: x.ncols() })
            } else {
                Ok(())
            }
        };
        self.modes
            .iter()
            .enumerate()
            .map(|(k, md)| {
                let a = matrix(&md.a, &format!("A[{k}]"))?;
                let b = matrix(&md.b, &format!("B[{k}]"))?;
                let c = matrix(&md.c, &format!("C[{k}]"))?;
                let d = matrix(&md.d, &format!("D[{k}]"))?;
                shape(&a, n, n, &format!("A[{k}]"))?;
                shape(&b, n, n, &format!("B[{k}]"))?;
                shape(&c, n, m, &format!("C[{k}]"))?;
                shape(&d, n, n, &format!("D[{k}]"))?;
                Ok(Mats { a, b, c, d })
            })
            .collect()
    }
}

/// Which of the three stability regimes every mode falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Example2Case {
    /// Stable flow and stabilising jumps.
    Case1,
    /// Stable flow, destabilising jumps.
    Case2,
    /// Unstable flow, stabilising jumps.
    Case3,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeClass {
    /// `2σλ_max(A) + μ + σλ_max(B) + σλ_max(C)`.
    pub big_lambda: f64,
    /// `σλ_max(B) - μ e^{-ηε}`.
    pub omega: f64,
    /// `λ_max(D)²`.
    pub d2: f64,
    /// Root of the per-case rate equation, when defined.
    pub lambda_bar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example2Classification {
    pub modes: Vec<ModeClass>,
    pub case: Example2Case,
    /// `max_p λ̄_p` for Cases 2 and 3.
    pub lambda_bar: Option<f64>,
    pub notes: Vec<String>,
}

/// Smallest positive root of `-λ + Λ + Ω e^{λ(Δ+1)} = 0`, if any.
fn growth_root(big_lambda: f64, omega: f64, delta: f64) -> Option<f64> {
    let g = |l: f64| -l + big_lambda + omega * (l * (delta + 1.0)).exp();
    if omega == 0.0 {
        return (big_lambda > 0.0).then_some(big_lambda);
    }
    // g is convex with its minimum at l*.
    let l_star = (1.0 / (omega * (delta + 1.0))).ln() / (delta + 1.0);
    if !(l_star > 0.0) || g(l_star) > 0.0 || g(0.0) <= 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, l_star);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Per-mode `Λ_p`, `Ω_p`, `λ_max(D_p)²` and the regime they share.
/// `eps` is the time argument in the `e^{-ηε}` weight of `Ω_p`.
pub fn classify_example2(p: &Example2Params, eps: f64) -> Result<Example2Classification> {
    let mats = p.mats()?;
    let delta = p.delta();
    let mut modes = Vec::new();
    for (md, m) in p.modes.iter().zip(&mats) {
        let s = md.sigma;
        let big_lambda = 2.0 * s * lambda_max_sym(&m.a) + md.mu + s * spectral_norm(&m.b) + s * spectral_norm(&m.c);
        let omega = s * spectral_norm(&m.b) - md.mu * (-p.eta * eps).exp();
        let d2 = spectral_norm(&m.d).powi(2);
        modes.push(ModeClass { big_lambda, omega, d2, lambda_bar: None });
    }
    let all = |f: &dyn Fn(&ModeClass) -> bool| modes.iter().all(f);
    let case = if all(&|m| m.big_lambda < 1.0 / p.varpi && m.omega < 0.0 && m.d2 < 1.0) {
        Example2Case::Case1
    } else if all(&|m| -m.big_lambda > m.omega && m.omega >= 0.0 && m.d2 > 1.0) {
        Example2Case::Case2
    } else if all(&|m| m.big_lambda > 0.0 && m.omega >= 0.0 && m.d2 < 1.0) {
        Example2Case::Case3
    } else {
        Example2Case::Unclassified
    };
    let mut notes = Vec::new();
    for m in modes.iter_mut() {
        m.lambda_bar = match case {
            Example2Case::Case2 => Some(solve_lambda_bar(-m.big_lambda, m.omega, delta)?),
            Example2Case::Case3 => growth_root(m.big_lambda, m.omega, delta),
            _ => None,
        };
    }
    let lambda_bar = match case {
        Example2Case::Case2 | Example2Case::Case3 => modes
            .iter()
            .map(|m| m.lambda_bar)
            .collect::<Option<Vec<f64>>>()
            .map(|v| v.into_iter().fold(f64::NEG_INFINITY, f64::max)),
        _ => None,
    };
    if case == Example2Case::Case3 {
        if modes.iter().any(|m| m.d2 < 2.0) {
            notes.push(
                "side condition with ln(lambda_max(D)^2 - 1) is undefined for lambda_max(D)^2 <= 1; \
                 the functional certificate is checked directly instead"
                    .into(),
            );
        }
        if lambda_bar.is_none() {
            notes.push("growth-rate root does not exist for some mode".into());
        }
    }
    Ok(Example2Classification { modes, case, lambda_bar, notes })
}

/// State `(x, p, τ)` with `x ∈ Rⁿ`; `p` holds the mode index as a real.
pub fn build_example2(p: &Example2Params) -> Result<SystemDef> {
    p.validate()?;
    let mats = Arc::new(p.mats()?);
    let n = p.state_dim();
    let n_modes = p.modes.len();
    let (r, period) = (p.r, p.period);
    let mode = move |z: &[f64]| (z[n].round().max(0.0) as usize).min(n_modes - 1);
    let fm = mats.clone();
    let gm = mats;
    Ok(SystemDef::new("example2", p.delta(), n + 2, p.input_dim())
        .with_flow(move |m, u| {
            let z = m.now();
            let md = &fm[mode(z)];
            let x = DMatrix::from_column_slice(n, 1, &z[..n]);
            let xr = DMatrix::from_column_slice(n, 1, &m.delayed(r)[..n]);
            let uu = DMatrix::from_column_slice(u.len(), 1, u);
            let dx = &md.a * x + &md.b * xr + &md.c * uu;
            let mut out = dx.as_slice().to_vec();
            out.push(0.0);
            out.push(1.0);
            out
        })
        .with_flow_set(move |m, _| (0.0..=period).contains(&m.now()[n + 1]))
        .with_jump_set(move |m, _| m.now()[n + 1] >= period)
        .with_jump_set_valued(move |m, _| {
            let z = m.now();
            let x = DMatrix::from_column_slice(n, 1, &z[..n]);
            let xd = &gm[mode(z)].d * x;
            (0..n_modes)
                .map(|q| {
                    let mut out = xd.as_slice().to_vec();
                    out.push(q as f64);
                    out.push(0.0);
                    out
                })
                .collect()
        })
        .with_dist_w(move |z| crate::system::euclid(&z[..n]))
        .with_max_delay(r))
}

/// `V(φ) = σ_p|ψ(0,0)|² + μ_p ∫_{-r}^0 e^{-ητ(s)} |ψ(s)|² ds`, trapezoid rule
/// on the stored grid.
pub fn example2_functional(p: &Example2Params) -> LyapunovFunctional {
    let n = p.state_dim();
    let (r, eta) = (p.r, p.eta);
    let w: Vec<(f64, f64)> = p.modes.iter().map(|m| (m.sigma, m.mu)).collect();
    LyapunovFunctional::new(move |m: &Memory<'_>| {
        let z = m.now();
        let k = (z[n].round().max(0.0) as usize).min(w.len() - 1);
        let (sigma, mu) = w[k];
        let now: f64 = z[..n].iter().map(|v| v * v).sum();
        let int = m.integrate_time(r, |y| {
            (-eta * y[n + 1]).exp() * y[..n].iter().map(|v| v * v).sum::<f64>()
        });
        sigma * now + mu * int
    })
}

/// A constant initial history `(x0, mode, 0)` of time depth `Δ`.
pub fn example2_history(p: &Example2Params, x0: &[f64], mode: usize) -> Result<MemoryArc> {
    if x0.len() != p.state_dim() {
        return Err(Error::DimensionMismatch {
            what: "initial x".into(),
            expected: p.state_dim(),
            got: x0.len(),
        });
    }
    let mut z = x0.to_vec();
    z.push(mode as f64);
    z.push(0.0);
    MemoryArc::constant(&z, p.delta())
}

fn scalar_mode(a: f64, b: f64, c: f64, d: f64, sigma: f64, mu: f64) -> Example2Mode {
    Example2Mode {
        a: vec![vec![a]],
        b: vec![vec![b]],
        c: vec![vec![c]],
        d: vec![vec![d]],
        sigma,
        mu,
    }
}

/// Shipped scalar instance for case `k` (1, 2 or 3).
pub fn example2_preset(k: u8) -> Result<Example2Params> {
    let (mode, period) = match k {
        1 => (scalar_mode(-3.0, 0.5, 1.0, 0.5, 1.0, 1.0), 1.0),
        2 => (scalar_mode(-1.0, 0.05, 0.0, 1.2, 1.0, 0.05), 1.0),
        3 => (scalar_mode(1.0, 1.0, 0.0, 0.5, 1.0, 1.0), 0.25),
        _ => return Err(Error::Param(format!("no preset for case {k}"))),
    };
    Ok(Example2Params { modes: vec![mode], r: 0.1, period, eta: 0.0, varpi: 1.0 })
}

/// Settings of the functional certificate derived from the per-mode bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example2Rates {
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub mu: Option<f64>,
    pub lambda: Option<f64>,
    /// Supremum of admissible decay rates, when the regime has one.
    pub lambda_bar: Option<f64>,
}

/// Certificate for the regime of `cls`. `lambda_scale` picks the decay rate
/// for the destabilising-jump regime as a fraction of `λ̄`.
pub fn example2_certificate(
    p: &Example2Params,
    cls: &Example2Classification,
    lambda_scale: f64,
) -> Result<(CertificateSpec, Example2Rates)> {
    let mats = p.mats()?;
    let n = p.state_dim();
    let delta = p.delta();
    let sig_min = p.modes.iter().map(|m| m.sigma).fold(f64::INFINITY, f64::min);
    let upper = p.modes.iter().map(|m| m.sigma + m.mu * p.r).fold(0.0, f64::max);
    let c_gain = p
        .modes
        .iter()
        .zip(&mats)
        .map(|(m, x)| m.sigma * spectral_norm(&x.c))
        .fold(0.0, f64::max);
    let trigger = if c_gain > 0.0 { p.varpi * c_gain } else { 1.0 };

    let variant = match cls.case {
        Example2Case::Case1 | Example2Case::Unclassified => Variant::ThmG,
        Example2Case::Case2 => Variant::ThmH,
        Example2Case::Case3 => Variant::ThmI,
    };
    let mut c = CertificateSpec::new(variant);
    c.dist_w = Arc::new(move |z: &[f64]| crate::system::euclid(&z[..n]));
    c.v_func = Some(example2_functional(p));
    c.alpha1 = Some(Gauge::OfDistance(ComparisonFunction::power(sig_min, 2.0)));
    c.alpha2 = Some(Gauge::OfDistance(ComparisonFunction::power(upper, 2.0)));
    c.rho = Some(ComparisonFunction::power(trigger, 2.0));
    let mut rates = Example2Rates { lambda1: None, lambda2: None, mu: None, lambda: None, lambda_bar: None };
    let eps = p.period;
    match variant {
        Variant::ThmG => {
            let k = cls
                .modes
                .iter()
                .map(|m| (1.0 / p.varpi - m.big_lambda).min(1.0 - m.d2))
                .fold(f64::INFINITY, f64::min);
            let k = if k > 0.0 { k } else { 1e-3 };
            c.decrease = Some(Gauge::OfDistance(ComparisonFunction::power(k, 2.0)));
        }
        Variant::ThmH => {
            let l1 = cls
                .modes
                .iter()
                .zip(&p.modes)
                .map(|(m, md)| -m.big_lambda / md.sigma)
                .fold(f64::INFINITY, f64::min);
            let l2 = cls
                .modes
                .iter()
                .zip(&p.modes)
                .map(|(m, md)| (m.omega + 2.0 * l1 * md.mu * p.r) / md.sigma)
                .fold(0.0, f64::max);
            let mu = cls.modes.iter().map(|m| m.d2).fold(1.0, f64::max);
            let bar = solve_lambda_bar(l1, l2, delta)?;
            let lam = lambda_scale * bar;
            c.lambda1 = Some(l1);
            c.lambda2 = Some(l2);
            c.mu = Some(mu);
            c.eps = Some(eps);
            c.n0 = Some(1);
            c.lambda = Some(lam);
            rates = Example2Rates {
                lambda1: Some(l1),
                lambda2: Some(l2),
                mu: Some(mu),
                lambda: Some(lam),
                lambda_bar: Some(bar),
            };
        }
        Variant::ThmI => {
            let l1 = cls
                .modes
                .iter()
                .zip(&p.modes)
                .map(|(m, md)| m.big_lambda / md.sigma)
                .fold(0.0, f64::max);
            let l2 = cls
                .modes
                .iter()
                .zip(&p.modes)
                .map(|(m, md)| m.omega.max(0.0) / md.sigma)
                .fold(0.0, f64::max);
            let mu = cls
                .modes
                .iter()
                .zip(&p.modes)
                .map(|(m, md)| (md.sigma * m.d2 + md.mu * p.r) / (md.sigma + md.mu * p.r))
                .fold(0.0, f64::max);
            c.lambda1 = Some(l1);
            c.lambda2 = Some(l2);
            c.mu = Some(mu);
            c.eps = Some(eps);
            c.n0 = Some(1);
            let lam = crate::lyapunov::lambda_thm7(l1, l2, mu, 1, delta)?;
            rates = Example2Rates {
                lambda1: Some(l1),
                lambda2: Some(l2),
                mu: Some(mu),
                lambda: Some(lam),
                lambda_bar: None,
            };
        }
        _ => unreachable!(),
    }
    c.validate()?;
    Ok((c, rates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid_time::InputSignal;
    use crate::system::{simulate, SimConfig};

    fn single(a: f64, b: f64, c: f64, d: f64, sigma: f64, mu: f64) -> Example2Params {
        Example2Params {
            modes: vec![scalar_mode(a, b, c, d, sigma, mu)],
            r: 0.1,
            period: 1.0,
            eta: 0.0,
            varpi: 1.0,
        }
    }

    #[test]
    fn classification_examples() {
        let c1 = classify_example2(&single(-3.0, 0.5, 1.0, 0.5, 1.0, 1.0), 1.0).unwrap();
        assert_eq!(c1.case, Example2Case::Case1);
        let m = &c1.modes[0];
        assert!((m.big_lambda + 3.5).abs() < 1e-12 && (m.omega + 0.5).abs() < 1e-12);
        assert!((m.d2 - 0.25).abs() < 1e-12);

        let c2 = classify_example2(&single(-3.0, 1.0, 0.0, 1.5, 1.0, 1.0), 1.0).unwrap();
        assert_eq!(c2.case, Example2Case::Case2);
        assert!((c2.modes[0].big_lambda + 4.0).abs() < 1e-12 && c2.modes[0].omega.abs() < 1e-12);
        assert!((c2.modes[0].d2 - 2.25).abs() < 1e-12);
        assert!((c2.lambda_bar.unwrap() - 4.0).abs() < 1e-9);

        let c3 = classify_example2(&single(1.0, 1.0, 0.0, 0.5, 1.0, 1.0), 1.0).unwrap();
        assert_eq!(c3.case, Example2Case::Case3);
        assert!((c3.modes[0].big_lambda - 4.0).abs() < 1e-12);
        assert_eq!(c3.lambda_bar, Some(4.0));
        assert!(!c3.notes.is_empty());
    }

    #[test]
    fn sigma_scaling_keeps_signs() {
        let base = single(-1.0, 0.05, 0.0, 1.2, 1.0, 0.05);
        let mut scaled = base.clone();
        scaled.modes[0].sigma *= 3.0;
        scaled.modes[0].mu *= 3.0;
        let a = classify_example2(&base, 1.0).unwrap();
        let b = classify_example2(&scaled, 1.0).unwrap();
        assert_eq!(a.case, b.case);
        assert!((b.modes[0].big_lambda - 3.0 * a.modes[0].big_lambda).abs() < 1e-12);
        assert!((b.modes[0].omega - 3.0 * a.modes[0].omega).abs() < 1e-12);
    }

    #[test]
    fn non_symmetric_a_uses_symmetric_part() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        assert!((lambda_max_sym(&m) - 1.0).abs() < 1e-12);
        assert!((spectral_norm(&m) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_errors() {
        let mut p = single(-1.0, 0.0, 1.0, 1.0, 1.0, 1.0);
        p.modes[0].b = vec![vec![1.0, 2.0]];
        assert!(matches!(build_example2(&p), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn case1_decays_with_zero_input() {
        let p = example2_preset(1).unwrap();
        let sys = build_example2(&p).unwrap();
        let phi = example2_history(&p, &[1.0], 0).unwrap();
        let cfg = SimConfig { h: 1e-3, horizon_t: 4.5, ..SimConfig::default() };
        let sol = simulate(&sys, &phi, &InputSignal::zero(1), &cfg).unwrap();
        assert_eq!(sol.jumps().count(), 4);
        assert!(sol.final_state()[0].abs() < 1e-3);
    }

    #[test]
    fn shallow_history_rejected() {
        let p = example2_preset(1).unwrap();
        let sys = build_example2(&p).unwrap();
        let phi = MemoryArc::constant(&[1.0, 0.0, 0.0], 0.05).unwrap();
        let cfg = SimConfig::default();
        assert!(matches!(
            simulate(&sys, &phi, &InputSignal::zero(1), &cfg),
            Err(Error::BadInitial(_))
        ));
    }

    #[test]
    fn two_modes_seeded_selection_is_repeatable() {
        let mut p = single(-1.0, 0.1, 0.0, 0.9, 1.0, 1.0);
        p.modes.push(scalar_mode(-2.0, 0.1, 0.0, 0.8, 1.0, 1.0));
        let sys = build_example2(&p).unwrap();
        let phi = example2_history(&p, &[1.0], 0).unwrap();
        let cfg = SimConfig {
            horizon_t: 10.5,
            selection: crate::system::Selection::Random,
            seed: 11,
            ..SimConfig::default()
        };
        let modes = |s: &crate::system::Solution| -> Vec<usize> {
            s.x.forward_pieces().iter().map(|pc| pc.x[1] as usize).collect()
        };
        let a = simulate(&sys, &phi, &InputSignal::zero(1), &cfg).unwrap();
        let b = simulate(&sys, &phi, &InputSignal::zero(1), &cfg).unwrap();
        assert_eq!(modes(&a), modes(&b));
        assert!(modes(&a).iter().any(|&m| m == 1));
    }

    #[test]
    fn shipped_rates() {
        let p = example2_preset(2).unwrap();
        let cls = classify_example2(&p, p.period).unwrap();
        assert_eq!(cls.case, Example2Case::Case2);
        let (_, r) = example2_certificate(&p, &cls, 0.5).unwrap();
        assert!((r.lambda1.unwrap() - 1.9).abs() < 1e-12);
        assert!((r.lambda2.unwrap() - 0.019).abs() < 1e-12);
        assert!((r.mu.unwrap() - 1.44).abs() < 1e-12);

        let p = example2_preset(3).unwrap();
        let cls = classify_example2(&p, p.period).unwrap();
        let (c, r) = example2_certificate(&p, &cls, 0.5).unwrap();
        assert_eq!(c.variant, Variant::ThmI);
        assert!((r.mu.unwrap() - 0.35 / 1.1).abs() < 1e-12);
        assert!((r.lambda.unwrap() - 4.0).abs() < 1e-12);
    }
}
