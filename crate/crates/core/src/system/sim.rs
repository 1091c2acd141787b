use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Priority, Selection, SimConfig};
use super::SystemDef;
use crate::error::{Error, Result};
use crate::hybrid_time::{hermite, HybridArc, InputSignal, InputTrace, Memory, MemoryArc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Jump,
    FlowExit,
    DeadEnd,
    Horizon,
    Zeno,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub j: i64,
    pub kind: EventKind,
    /// Index of the selected jump-map candidate, for jumps.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub choice: Option<usize>,
}

/// A simulated solution pair.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Memory part is the initial arc; forward part is computed.
    pub x: HybridArc,
    /// Input on the forward sample grid of `x`.
    pub u: HybridArc,
    pub events: Vec<Event>,
    pub termination: EventKind,
    pub delta: f64,
    pub event_tol: f64,
}

impl Solution {
    /// `A^Δ_{[t,j]}x`.
    pub fn memory_at(&self, t: f64, j: i64) -> Result<Memory<'_>> {
        Memory::new(&self.x, t, j, self.delta)
    }

    /// `A^Δ_{[0,0]}x`.
    pub fn initial(&self) -> Memory<'_> {
        Memory::new(&self.x, 0.0, 0, self.delta).expect("solution starts at (0, 0)")
    }

    pub fn jumps(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.kind == EventKind::Jump)
    }

    pub fn end(&self) -> (f64, i64) {
        self.x.end()
    }

    /// Final state.
    pub fn final_state(&self) -> Vec<f64> {
        let (t, j) = self.end();
        self.x.eval(t, j).expect("end lies in the domain")
    }

    /// Input value stored at forward sample `(piece, i)` of `x`.
    pub fn input_at(&self, piece: usize, i: usize) -> &[f64] {
        let fp = piece - self.x.n_memory();
        self.u.pieces()[fp].state(i, self.u.dim())
    }
}

/// Picks elements of set-valued maps.
#[derive(Debug, Clone)]
pub struct Selector {
    policy: Selection,
    rng: ChaCha8Rng,
}

impl Selector {
    pub fn new(policy: Selection, seed: u64) -> Self {
        Self {
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn pick(&mut self, n: usize) -> usize {
        match self.policy {
            Selection::First => 0,
            Selection::Random => self.rng.random_range(0..n),
        }
    }
}

fn axpy(x: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(xi, ki)| xi + a * ki).collect()
}

fn select_flow(
    sys: &SystemDef,
    m: &Memory<'_>,
    u: &[f64],
    sel: &mut Selector,
) -> Option<Vec<f64>> {
    let mut list = (sys.flow_map)(m, u);
    if list.is_empty() {
        return None;
    }
    let i = sel.pick(list.len());
    Some(list.swap_remove(i))
}

fn check_dim(what: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            what: what.into(),
            expected: n,
            got: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(what.into()));
    }
    Ok(())
}

/// Derivative at the last stored sample, evaluating `F` if none is stored.
fn last_derivative(
    sys: &SystemDef,
    history: &HybridArc,
    u: &InputSignal,
    sel: &mut Selector,
) -> Result<Vec<f64>> {
    let piece = history.pieces().last().expect("history has pieces");
    let n = history.dim();
    if let Some(d) = piece.deriv(piece.len() - 1, n) {
        return Ok(d.to_vec());
    }
    let (t, j) = (piece.t_hi(), piece.j);
    let m = Memory::with_head(history, t, piece.state(piece.len() - 1, n), sys.delta)?;
    select_flow(sys, &m, &u.value(t, j), sel).ok_or(Error::EmptyFlowSet { t, j })
}

fn rk4(
    sys: &SystemDef,
    history: &HybridArc,
    u: &InputSignal,
    k1: &[f64],
    h: f64,
    sel: &mut Selector,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let piece = history.pieces().last().expect("history has pieces");
    let n = history.dim();
    let (t, j) = (piece.t_hi(), piece.j);
    let x0 = piece.state(piece.len() - 1, n);
    let mut stage = |tau: f64, x: &[f64], fallback: &[f64]| -> Result<Vec<f64>> {
        let m = Memory::with_head(history, tau, x, sys.delta)?;
        let f = select_flow(sys, &m, &u.value(tau, j), sel).unwrap_or_else(|| fallback.to_vec());
        check_dim("flow map value", &f, n)?;
        Ok(f)
    };
    let x2 = axpy(x0, 0.5 * h, k1);
    let k2 = stage(t + 0.5 * h, &x2, k1)?;
    let x3 = axpy(x0, 0.5 * h, &k2);
    let k3 = stage(t + 0.5 * h, &x3, &k2)?;
    let x4 = axpy(x0, h, &k3);
    let k4 = stage(t + h, &x4, &k3)?;
    let x1: Vec<f64> = (0..n)
        .map(|i| x0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    let f1 = stage(t + h, &x1, &k4)?;
    Ok((x1, f1))
}

/// One classical Runge-Kutta step of size `h` from the last stored sample
/// of `history`. Every stage evaluates `F` on the memory window of the
/// history extended by the stage state. Returns the new state and the
/// derivative at it.
pub fn step_flow(
    sys: &SystemDef,
    history: &HybridArc,
    u: &InputSignal,
    h: f64,
    sel: &mut Selector,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let k1 = last_derivative(sys, history, u, sel)?;
    rk4(sys, history, u, &k1, h, sel)
}

fn bisect(
    mut stay: impl FnMut(f64) -> bool,
    t_in: f64,
    t_out: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    if !stay(t_in) || stay(t_out) {
        return Err(Error::NoBracket { lo: t_in, hi: t_out });
    }
    let (mut lo, mut hi) = (t_in, t_out);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if stay(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Locate where `pred` switches from true to false on `[t_in, t_out]` by
/// bisection; the result is within `tol / 2` of the switching time.
pub fn detect_flow_exit(
    pred: impl FnMut(f64) -> bool,
    t_in: f64,
    t_out: f64,
    tol: f64,
) -> Result<f64> {
    let (lo, hi) = bisect(pred, t_in, t_out, tol)?;
    Ok(0.5 * (lo + hi))
}

/// Simulate a solution pair from the initial memory arc `phi0`.
pub fn simulate(
    sys: &SystemDef,
    phi0: &MemoryArc,
    u: &InputSignal,
    cfg: &SimConfig,
) -> Result<Solution> {
    cfg.validate()?;
    let n = sys.state_dim;
    if phi0.dim() != n {
        return Err(Error::DimensionMismatch {
            what: "initial arc".into(),
            expected: n,
            got: phi0.dim(),
        });
    }
    if u.dim() != sys.input_dim {
        return Err(Error::DimensionMismatch {
            what: "input".into(),
            expected: sys.input_dim,
            got: u.dim(),
        });
    }
    if !(sys.delta.is_finite() && sys.delta >= 0.0) {
        return Err(Error::Param(format!("memory size must be finite, got {}", sys.delta)));
    }
    let depth = phi0.depth();
    if depth > -sys.delta + 1e-9 {
        return Err(Error::BadInitial(format!(
            "initial arc depth {depth} is shallower than -Δ = {}",
            -sys.delta
        )));
    }
    let time_depth = -phi0.arc().pieces()[0].t_lo();
    if sys.max_delay > time_depth + 1e-12 {
        return Err(Error::BadInitial(format!(
            "initial arc covers {time_depth} s of history but the flow map reads {} s back",
            sys.max_delay
        )));
    }

    let mut sel = Selector::new(cfg.selection, cfg.seed);
    let jump_first = cfg.priority == Priority::JumpFirst;
    let mut pieces = phi0.arc().pieces().to_vec();
    let n_memory = pieces.len();
    let head = phi0.head().to_vec();
    pieces.push(crate::hybrid_time::Piece {
        j: 0,
        t: vec![0.0],
        x: head.clone(),
        dx: Some(vec![0.0; n]),
    });
    let mut arc = HybridArc::from_parts_unchecked(n, pieces, n_memory, cfg.interpolation);
    let mut trace = InputTrace::default();
    let mut events = Vec::new();

    let (mut t, mut j) = (0.0_f64, 0_i64);
    let u0 = u.value(0.0, 0);
    {
        let m = Memory::new(&arc, 0.0, 0, sys.delta)?;
        let c = (sys.flow_set)(&m, &u0);
        let d = (sys.jump_set)(&m, &u0);
        if !(c || d) {
            return Err(Error::BadInitial(
                "(A[0,0]x, u(0,0)) lies in neither C nor D".into(),
            ));
        }
    }
    refresh_derivative(sys, &mut arc, &u0, &mut sel)?;
    trace.push(0.0, 0, &u0);

    // Set after an exit was located at the last point of C outside D.
    let mut at_boundary = false;
    // Set after an exit was located at the first point of D.
    let mut entered_d = false;
    let mut jumps_here = 0usize;
    let horizon_eps = 1e-12 * cfg.horizon_t.abs().max(1.0);
    let termination;
    loop {
        if t >= cfg.horizon_t - horizon_eps || j >= cfg.horizon_j {
            termination = EventKind::Horizon;
            break;
        }
        let u_now = u.value(t, j);
        let (c, d) = {
            let m = Memory::new(&arc, t, j, sys.delta)?;
            ((sys.flow_set)(&m, &u_now), (sys.jump_set)(&m, &u_now))
        };
        if d && (jump_first || !c || at_boundary || entered_d) {
            if jumps_here >= cfg.zeno_guard {
                termination = EventKind::Zeno;
                break;
            }
            let (g, choice) = {
                let m = Memory::new(&arc, t, j, sys.delta)?;
                let mut list = (sys.jump_map)(&m, &u_now);
                if list.is_empty() {
                    return Err(Error::EmptyJumpSet { t, j });
                }
                let i = sel.pick(list.len());
                (list.swap_remove(i), i)
            };
            check_dim("jump map value", &g, n)?;
            events.push(Event {
                t,
                j,
                kind: EventKind::Jump,
                choice: Some(choice),
            });
            j += 1;
            jumps_here += 1;
            at_boundary = false;
            entered_d = false;
            arc.push_piece(j, t, &g, &vec![0.0; n]);
            let u_new = u.value(t, j);
            refresh_derivative(sys, &mut arc, &u_new, &mut sel)?;
            trace.push(t, j, &u_new);
            continue;
        }
        if at_boundary || !c {
            termination = EventKind::DeadEnd;
            break;
        }

        let mut h = cfg.h.min(cfg.horizon_t - t);
        if cfg.horizon_t - (t + h) < 1e-6 * cfg.h {
            h = cfg.horizon_t - t;
        }
        let x0 = {
            let p = arc.pieces().last().unwrap();
            p.state(p.len() - 1, n).to_vec()
        };
        let k1 = last_derivative(sys, &arc, u, &mut sel)?;
        let (x1, f1) = rk4(sys, &arc, u, &k1, h, &mut sel)?;
        let t1 = t + h;
        let stay = |tau: f64, x: &[f64]| -> Result<bool> {
            let m = Memory::with_head(&arc, tau, x, sys.delta)?;
            let uu = u.value(tau, j);
            let c = (sys.flow_set)(&m, &uu);
            Ok(c && !(jump_first && (sys.jump_set)(&m, &uu)))
        };
        if stay(t1, &x1)? {
            arc.push_sample(t1, &x1, &f1);
            trace.push(t1, j, &u.value(t1, j));
            t = t1;
            jumps_here = 0;
            entered_d = false;
            continue;
        }

        let dense = |tau: f64| -> Vec<f64> {
            let mut out = vec![0.0; n];
            hermite(t, &x0, &k1, t1, &x1, &f1, tau, &mut out);
            out
        };
        let mut err = None;
        let bracket = bisect(
            |tau| {
                let x = if tau == t { x0.clone() } else { dense(tau) };
                stay(tau, &x).unwrap_or_else(|e| {
                    err = Some(e);
                    false
                })
            },
            t,
            t1,
            cfg.event_tol,
        );
        if let Some(e) = err {
            return Err(e);
        }
        let (lo, hi) = match bracket {
            Ok(b) => b,
            // Leaving immediately: the current point is the boundary.
            Err(Error::NoBracket { .. }) => (t, t),
            Err(e) => return Err(e),
        };
        let x_hi = dense(hi);
        let d_hi = {
            let m = Memory::with_head(&arc, hi, &x_hi, sys.delta)?;
            (sys.jump_set)(&m, &u.value(hi, j))
        };
        let to_d = d_hi && hi > t;
        let target = if to_d { hi } else { lo };
        at_boundary = !to_d;
        entered_d = to_d;
        if target > t {
            let (xt, ft) = rk4(sys, &arc, u, &k1, target - t, &mut sel)?;
            arc.push_sample(target, &xt, &ft);
            trace.push(target, j, &u.value(target, j));
            t = target;
            jumps_here = 0;
        }
        events.push(Event {
            t,
            j,
            kind: EventKind::FlowExit,
            choice: None,
        });
    }
    events.push(Event {
        t,
        j,
        kind: termination,
        choice: None,
    });
    Ok(Solution {
        x: arc,
        u: trace.finish(sys.input_dim),
        events,
        termination,
        delta: sys.delta,
        event_tol: cfg.event_tol,
    })
}

/// Evaluate `F` at the last stored sample and store it as that sample's
/// derivative. Outside `C` the derivative is left at zero.
fn refresh_derivative(
    sys: &SystemDef,
    arc: &mut HybridArc,
    u: &[f64],
    sel: &mut Selector,
) -> Result<()> {
    let (t, j) = arc.end();
    let f = {
        let m = Memory::new(arc, t, j, sys.delta)?;
        if (sys.flow_set)(&m, u) {
            let f = select_flow(sys, &m, u, sel).ok_or(Error::EmptyFlowSet { t, j })?;
            check_dim("flow map value", &f, sys.state_dim)?;
            Some(f)
        } else {
            None
        }
    };
    if let Some(f) = f {
        arc.set_last_deriv(&f);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay() -> SystemDef {
        SystemDef::new("decay", 1.0, 1, 1).with_flow(|m, _| vec![-m.now()[0]])
    }

    fn cfg(h: f64, t: f64) -> SimConfig {
        SimConfig {
            h,
            horizon_t: t,
            ..SimConfig::default()
        }
    }

    #[test]
    fn scalar_decay_matches_exponential() {
        let phi = MemoryArc::constant(&[1.0], 1.0).unwrap();
        let sol = simulate(&decay(), &phi, &InputSignal::zero(1), &cfg(1e-3, 1.0)).unwrap();
        let x = sol.final_state()[0];
        assert!((x - (-1.0f64).exp()).abs() < 1e-6, "{x}");
        assert_eq!(sol.termination, EventKind::Horizon);
        assert_eq!(sol.end().0, 1.0);
    }

    fn started(dx: f64) -> HybridArc {
        let phi = MemoryArc::constant(&[1.0], 1.0).unwrap();
        let mut arc = phi.arc().clone();
        arc.push_piece(0, 0.0, &[1.0], &[dx]);
        arc
    }

    #[test]
    fn single_step_values() {
        let mut sel = Selector::new(Selection::First, 0);
        let (x, _) =
            step_flow(&decay(), &started(-1.0), &InputSignal::zero(1), 0.1, &mut sel).unwrap();
        assert!((x[0] - 0.904_837_418_0).abs() < 1e-7);

        let still = SystemDef::new("still", 1.0, 1, 1);
        let (x, f) =
            step_flow(&still, &started(0.0), &InputSignal::zero(1), 0.1, &mut sel).unwrap();
        assert_eq!((x[0], f[0]), (1.0, 0.0));
    }

    #[test]
    fn delayed_single_step_is_linear() {
        let sys = SystemDef::new("lag", 1.0, 1, 1)
            .with_flow(|m, _| m.delayed(1.0))
            .with_max_delay(1.0);
        let phi = MemoryArc::constant(&[1.0], 1.0).unwrap();
        let h = 0.01;
        let sol = simulate(&sys, &phi, &InputSignal::zero(1), &cfg(h, h)).unwrap();
        assert!((sol.final_state()[0] - (1.0 + h)).abs() < 1e-15);
    }

    #[test]
    fn halving_jumps() {
        let sys = SystemDef::new("halving", 0.0, 1, 1)
            .with_flow_set(|_, _| false)
            .with_jump_set(|_, _| true)
            .with_jump(|m, _| vec![m.now()[0] / 2.0]);
        let phi = MemoryArc::constant(&[8.0], 1.0).unwrap();
        let c = SimConfig {
            horizon_j: 3,
            ..SimConfig::default()
        };
        let sol = simulate(&sys, &phi, &InputSignal::zero(1), &c).unwrap();
        assert_eq!(sol.x.eval(0.0, 3).unwrap(), vec![1.0]);
        assert_eq!(sol.jumps().count(), 3);
    }

    #[test]
    fn zeno_guard_stops() {
        let sys = SystemDef::new("zeno", 0.0, 1, 1).with_jump_set(|_, _| true);
        let phi = MemoryArc::constant(&[1.0], 1.0).unwrap();
        let c = SimConfig {
            zeno_guard: 5,
            ..SimConfig::default()
        };
        let sol = simulate(&sys, &phi, &InputSignal::zero(1), &c).unwrap();
        assert_eq!(sol.termination, EventKind::Zeno);
        assert_eq!(sol.jumps().count(), 5);
    }

    #[test]
    fn timer_exit_and_dead_end() {
        let sys = SystemDef::new("timer", 0.0, 1, 1)
            .with_flow(|_, _| vec![1.0])
            .with_flow_set(|m, _| m.now()[0] <= 1.0);
        let phi = MemoryArc::constant(&[0.0], 1.0).unwrap();
        let c = SimConfig {
            h: 0.03,
            horizon_t: 5.0,
            ..SimConfig::default()
        };
        let sol = simulate(&sys, &phi, &InputSignal::zero(1), &c).unwrap();
        assert_eq!(sol.termination, EventKind::DeadEnd);
        assert!((sol.end().0 - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn bad_initial_conditions() {
        let sys = SystemDef::new("nowhere", 1.0, 1, 1).with_flow_set(|_, _| false);
        let phi = MemoryArc::constant(&[0.0], 1.0).unwrap();
        assert!(matches!(
            simulate(&sys, &phi, &InputSignal::zero(1), &SimConfig::default()),
            Err(Error::BadInitial(_))
        ));
        let shallow = MemoryArc::constant(&[0.0], 0.5).unwrap();
        assert!(matches!(
            simulate(&decay(), &shallow, &InputSignal::zero(1), &SimConfig::default()),
            Err(Error::BadInitial(_))
        ));
        let lag = decay().with_max_delay(2.0);
        assert!(matches!(
            simulate(&lag, &phi, &InputSignal::zero(1), &SimConfig::default()),
            Err(Error::BadInitial(_))
        ));
        assert!(matches!(
            simulate(&decay(), &phi, &InputSignal::zero(2), &SimConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn exit_detection() {
        let t = detect_flow_exit(|t| t <= 1.0, 0.0, 2.0, 1e-10).unwrap();
        assert!((t - 1.0).abs() <= 1e-10);
        let t = detect_flow_exit(|t| (-t).exp() >= 0.5, 0.0, 1.0, 1e-10).unwrap();
        assert!((t - 2f64.ln()).abs() <= 1e-10);
        assert!(matches!(
            detect_flow_exit(|_| false, 0.0, 1.0, 1e-6),
            Err(Error::NoBracket { .. })
        ));
    }
}
