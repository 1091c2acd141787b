use crate::error::{Error, Result};
use crate::hybrid_time::Memory;
use crate::system::Solution;

/// Step sizes for the Clarke-derivative quotient.
pub const CLARKE_STEPS: [f64; 2] = [1e-4, 1e-5];
/// Step sizes for the Dini-derivative quotient along a solution.
pub const DINI_STEPS: [f64; 2] = [1e-3, 1e-4];
/// Shortest usable step when a flow interval ends before the nominal steps.
pub const DINI_MIN_STEP: f64 = 1e-7;

/// `V°(x, f)` approximated by the largest Richardson-extrapolated forward
/// quotient `2 q(h/2) - q(h)`, `q(h) = (V(x + h f) - V(x)) / h`, over
/// [`CLARKE_STEPS`]. Second order for smooth `V`; exact for positively
/// homogeneous kinks at `x`.
pub fn directional_deriv(v: impl Fn(&[f64]) -> f64, x: &[f64], f: &[f64]) -> Result<f64> {
    if x.len() != f.len() {
        return Err(Error::DimensionMismatch {
            what: "direction".into(),
            expected: x.len(),
            got: f.len(),
        });
    }
    let v0 = v(x);
    if !v0.is_finite() {
        return Err(Error::NonFinite("V(x)".into()));
    }
    if f.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    let mut y = x.to_vec();
    let mut quotient = |h: f64| -> Result<f64> {
        for k in 0..x.len() {
            y[k] = x[k] + h * f[k];
        }
        let q = (v(&y) - v0) / h;
        if q.is_finite() {
            Ok(q)
        } else {
            Err(Error::NonFinite("difference quotient".into()))
        }
    };
    let mut best = f64::NEG_INFINITY;
    for h in CLARKE_STEPS {
        let est = 2.0 * quotient(0.5 * h)? - quotient(h)?;
        best = best.max(est);
    }
    Ok(best)
}

/// `D⁺V(A^Δ_{[t,j]}x)` along the stored solution: the largest quotient
/// `(V(A^Δ_{[t+h,j]}x) - V(A^Δ_{[t,j]}x)) / h` over the steps in
/// [`DINI_STEPS`] that stay on the flow interval. When none fits, the
/// remaining length of the interval is used if it is at least
/// [`DINI_MIN_STEP`]; otherwise the point has no room ahead and
/// `OutOfDomain` is returned.
pub fn dini_functional_deriv(
    v: impl Fn(&Memory<'_>) -> f64,
    sol: &Solution,
    t: f64,
    j: i64,
) -> Result<f64> {
    let x = &sol.x;
    let p = x.piece_index(t, j).ok_or(Error::OutOfDomain { t, j })?;
    if p < x.n_memory() {
        return Err(Error::OutOfDomain { t, j });
    }
    let room = x.pieces()[p].t_hi() - t;
    let mut steps: Vec<f64> = DINI_STEPS.iter().copied().filter(|&h| h <= room).collect();
    if steps.is_empty() {
        if room < DINI_MIN_STEP {
            return Err(Error::OutOfDomain { t, j });
        }
        steps.push(room);
    }
    let v0 = v(&Memory::new(x, t, j, sol.delta)?);
    let mut best = f64::NEG_INFINITY;
    for h in steps {
        let v1 = v(&Memory::new(x, t + h, j, sol.delta)?);
        best = best.max((v1 - v0) / h);
    }
    if !best.is_finite() {
        return Err(Error::NonFinite("Dini quotient".into()));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid_time::{InputSignal, MemoryArc};
    use crate::system::{simulate, SimConfig, SystemDef};

    #[test]
    fn clarke_examples() {
        let sq = |x: &[f64]| x[0] * x[0];
        assert!((directional_deriv(sq, &[2.0], &[-2.0]).unwrap() + 8.0).abs() < 1e-3);
        let abs = |x: &[f64]| x[0].abs();
        assert!((directional_deriv(abs, &[0.0], &[1.0]).unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(directional_deriv(sq, &[3.0], &[0.0]).unwrap(), 0.0);
        assert!(directional_deriv(|_: &[f64]| f64::NAN, &[0.0], &[1.0]).is_err());
    }

    fn decay_solution(history: f64) -> Solution {
        let sys = SystemDef::new("decay", 0.5, 1, 1).with_flow(|m, _| vec![-m.now()[0]]);
        let phi = MemoryArc::constant(&[history], 1.0).unwrap();
        let cfg = SimConfig { h: 1e-3, horizon_t: 1.0, ..SimConfig::default() };
        simulate(&sys, &phi, &InputSignal::zero(1), &cfg).unwrap()
    }

    #[test]
    fn dini_examples() {
        let sol = decay_solution(1.0);
        let d = dini_functional_deriv(|m| m.now()[0].powi(2), &sol, 0.0, 0).unwrap();
        assert!((d + 2.0).abs() < 1e-2, "{d}");
        let d = dini_functional_deriv(|_| 4.0, &sol, 0.5, 0).unwrap();
        assert_eq!(d, 0.0);
        assert!(dini_functional_deriv(|_| 0.0, &sol, 1.0, 0).is_err());

        let still = SystemDef::new("still", 0.5, 1, 1);
        let phi = MemoryArc::constant(&[1.0], 1.0).unwrap();
        let cfg = SimConfig { h: 1e-3, horizon_t: 1.0, ..SimConfig::default() };
        let sol = simulate(&still, &phi, &InputSignal::zero(1), &cfg).unwrap();
        let lkf = |m: &Memory<'_>| m.integrate_time(0.5, |x| x[0] * x[0]);
        let d = dini_functional_deriv(lkf, &sol, 0.2, 0).unwrap();
        assert!(d.abs() < 1e-3, "{d}");
    }
}
