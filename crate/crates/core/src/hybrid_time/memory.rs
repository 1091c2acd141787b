//! The memory operator `A^Δ_{[t,j]}` as a borrowed view into an arc.

use super::arc::{HybridArc, Interpolation, MemoryArc, Piece};
use super::domain::TIME_EPS;
use crate::error::{Error, Result};

/// The depth-`Δ` window of an arc, re-centred at an anchor `(t, j)`.
///
/// Coordinates passed to [`Memory::at`] are relative: `(s, k)` refers to the
/// arc value at `(t + s, j + k)`. During integration the view can carry a
/// `head` state at an anchor time past the last stored sample; lookups
/// between the two are interpolated linearly.
#[derive(Debug, Clone)]
pub struct Memory<'a> {
    arc: &'a HybridArc,
    t: f64,
    j: i64,
    delta: f64,
    delta_inf: f64,
    anchor_piece: usize,
    start_piece: usize,
    start_time: f64,
    head: Option<&'a [f64]>,
    now: Vec<f64>,
}

/// Global sample indices covered by a window anchored on a stored sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRange {
    /// First stored sample at or after the window start.
    pub first: usize,
    /// The anchor sample.
    pub last: usize,
    /// Piece and time of the window start when it falls strictly between samples.
    pub start_point: Option<(usize, f64)>,
}

impl<'a> Memory<'a> {
    /// `A^Δ_{[t,j]}x` for `(t, j)` on a stored piece of `arc`.
    pub fn new(arc: &'a HybridArc, t: f64, j: i64, delta: f64) -> Result<Self> {
        let p = arc.piece_index(t, j).ok_or(Error::OutOfDomain { t, j })?;
        if j < 0 || t < -TIME_EPS || (p < arc.n_memory() && (t.abs() > TIME_EPS || j != 0)) {
            return Err(Error::OutOfDomain { t, j });
        }
        Self::build(arc, p, t, j, delta, None)
    }

    /// A view whose current state `head` sits at time `t` on the last piece,
    /// at or after its final stored sample.
    pub fn with_head(
        arc: &'a HybridArc,
        t: f64,
        head: &'a [f64],
        delta: f64,
    ) -> Result<Self> {
        let p = arc.pieces().len() - 1;
        let piece = &arc.pieces()[p];
        if t < piece.t_hi() - TIME_EPS {
            return Err(Error::OutOfDomain { t, j: piece.j });
        }
        if head.len() != arc.dim() {
            return Err(Error::DimensionMismatch {
                what: "head state".into(),
                expected: arc.dim(),
                got: head.len(),
            });
        }
        Self::build(arc, p, t, piece.j, delta, Some(head))
    }

    fn build(
        arc: &'a HybridArc,
        anchor_piece: usize,
        t: f64,
        j: i64,
        delta: f64,
        head: Option<&'a [f64]>,
    ) -> Result<Self> {
        let target = t + j as f64 - delta;
        let pieces = arc.pieces();
        let mut start = None;
        for p in (0..=anchor_piece).rev() {
            let piece = &pieces[p];
            let hi = if p == anchor_piece { t } else { piece.t_hi() };
            let sig_lo = piece.t_lo() + piece.j as f64;
            let sig_hi = hi + piece.j as f64;
            if sig_lo <= target + TIME_EPS {
                let sig = sig_hi.min(target);
                let time = (sig - piece.j as f64).max(piece.t_lo()).min(hi);
                start = Some((p, time));
                break;
            }
        }
        let (start_piece, start_time) = start.unwrap_or((0, pieces[0].t_lo()));
        let start_sigma = start_time + pieces[start_piece].j as f64;
        let delta_inf = t + j as f64 - start_sigma;
        let now = match head {
            Some(h) => h.to_vec(),
            None => {
                let mut v = vec![0.0; arc.dim()];
                arc.eval_piece_into(anchor_piece, t, &mut v);
                v
            }
        };
        Ok(Self {
            arc,
            t,
            j,
            delta,
            delta_inf,
            anchor_piece,
            start_piece,
            start_time,
            head,
            now,
        })
    }

    pub fn arc(&self) -> &'a HybridArc {
        self.arc
    }

    pub fn anchor(&self) -> (f64, i64) {
        (self.t, self.j)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The `Δ_inf` of the window: the smallest achieved depth `≥ Δ`, or the
    /// whole history when it is shallower than `Δ`.
    pub fn delta_inf(&self) -> f64 {
        self.delta_inf
    }

    /// Minimum of `s + k` over the window.
    pub fn depth(&self) -> f64 {
        -self.delta_inf
    }

    pub fn dim(&self) -> usize {
        self.arc.dim()
    }

    /// `φ(0, 0)`.
    pub fn now(&self) -> &[f64] {
        &self.now
    }

    fn last_stored(&self) -> f64 {
        self.arc.pieces()[self.anchor_piece].t_hi()
    }

    fn eval_abs(&self, p: usize, time: f64, out: &mut [f64]) {
        if p == self.anchor_piece {
            if let Some(h) = self.head {
                let t_last = self.last_stored();
                if time > t_last && self.t > t_last {
                    let piece = &self.arc.pieces()[p];
                    let x_last = piece.state(piece.len() - 1, self.dim());
                    let w = (time - t_last) / (self.t - t_last);
                    for k in 0..out.len() {
                        out[k] = x_last[k] + w * (h[k] - x_last[k]);
                    }
                    return;
                }
            }
        }
        self.arc.eval_piece_into(p, time, out);
    }

    /// `φ(s, k)` for `s ≤ 0`, `k ≤ 0` inside the window.
    pub fn at(&self, s: f64, k: i64) -> Result<Vec<f64>> {
        let (time, jj) = (self.t + s, self.j + k);
        if s > TIME_EPS || k > 0 || s + (k as f64) < -self.delta_inf - 1e-9 {
            return Err(Error::OutOfDomain { t: s, j: k });
        }
        if s.abs() <= TIME_EPS && k == 0 {
            return Ok(self.now.clone());
        }
        let p = (self.start_piece..=self.anchor_piece)
            .rev()
            .find(|&p| {
                let piece = &self.arc.pieces()[p];
                let hi = if p == self.anchor_piece { self.t } else { piece.t_hi() };
                let lo = if p == self.start_piece { self.start_time } else { piece.t_lo() };
                piece.j == jj && time >= lo - TIME_EPS && time <= hi + TIME_EPS
            })
            .ok_or(Error::OutOfDomain { t: s, j: k })?;
        let mut out = vec![0.0; self.dim()];
        self.eval_abs(p, time, &mut out);
        Ok(out)
    }

    /// `φ(-r, k(-r))` with `k(s) = max{k | (s, k) ∈ dom φ}`. Times older
    /// than the window are clamped to the window start.
    pub fn delayed(&self, r: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.delayed_into(r, &mut out);
        out
    }

    pub fn delayed_into(&self, r: f64, out: &mut [f64]) {
        let time = self.t - r;
        for p in (self.start_piece..=self.anchor_piece).rev() {
            let piece = &self.arc.pieces()[p];
            let lo = if p == self.start_piece { self.start_time } else { piece.t_lo() };
            if time >= lo - TIME_EPS {
                self.eval_abs(p, time.max(lo), out);
                return;
            }
        }
        self.eval_abs(self.start_piece, self.start_time, out);
    }

    /// Visit every sample of the window in domain order as `(s, k, x)`,
    /// starting with the (possibly interpolated) window start and ending with
    /// `φ(0, 0)`.
    pub fn for_each_sample(&self, mut f: impl FnMut(f64, i64, &[f64])) {
        let n = self.dim();
        let mut buf = vec![0.0; n];
        for p in self.start_piece..=self.anchor_piece {
            let piece = &self.arc.pieces()[p];
            let k = piece.j - self.j;
            let lo = if p == self.start_piece { self.start_time } else { f64::NEG_INFINITY };
            let hi = if p == self.anchor_piece { self.t } else { f64::INFINITY };
            let first = piece.t.partition_point(|&s| s < lo);
            if p == self.start_piece && (first == piece.len() || piece.t[first] > lo) {
                self.eval_abs(p, lo, &mut buf);
                f(lo - self.t, k, &buf);
            }
            let mut last_t = f64::NEG_INFINITY;
            for i in first..piece.len() {
                let ti = piece.t[i];
                if ti > hi {
                    break;
                }
                f(ti - self.t, k, piece.state(i, n));
                last_t = ti;
            }
            if p == self.anchor_piece && last_t < self.t {
                f(0.0, 0, &self.now);
            }
        }
    }

    /// `sup` of `w` over the window samples.
    pub fn sup_over(&self, mut w: impl FnMut(&[f64]) -> f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        self.for_each_sample(|_, _, x| best = best.max(w(x)));
        best
    }

    /// Trapezoid approximation of `∫_{-r}^{0} w(φ(s, k(s))) ds`. Each flow
    /// interval of the window contributes over its own time span.
    pub fn integrate_time(&self, r: f64, mut w: impl FnMut(&[f64]) -> f64) -> f64 {
        let n = self.dim();
        let from = self.t - r;
        let mut total = 0.0;
        let mut buf = vec![0.0; n];
        for p in self.start_piece..=self.anchor_piece {
            let piece = &self.arc.pieces()[p];
            let lo_p = if p == self.start_piece { self.start_time } else { piece.t_lo() };
            let hi_p = if p == self.anchor_piece { self.t } else { piece.t_hi() };
            let lo = lo_p.max(from);
            let hi = hi_p;
            if hi <= lo {
                continue;
            }
            self.eval_abs(p, lo, &mut buf);
            let mut prev_t = lo;
            let mut prev_w = w(&buf);
            let first = piece.t.partition_point(|&s| s <= lo);
            for i in first..piece.len() {
                let ti = piece.t[i];
                if ti >= hi {
                    break;
                }
                let wi = w(piece.state(i, n));
                total += 0.5 * (ti - prev_t) * (prev_w + wi);
                prev_t = ti;
                prev_w = wi;
            }
            let w_hi = if p == self.anchor_piece {
                w(&self.now)
            } else {
                self.eval_abs(p, hi, &mut buf);
                w(&buf)
            };
            total += 0.5 * (hi - prev_t) * (prev_w + w_hi);
        }
        total
    }

    /// Global sample indices of the window when anchored on a stored sample.
    pub fn sample_range(&self) -> Option<WindowRange> {
        if self.head.is_some() {
            return None;
        }
        let arc = self.arc;
        let anchor = &arc.pieces()[self.anchor_piece];
        let ia = anchor.t.partition_point(|&s| s <= self.t);
        if ia == 0 || anchor.t[ia - 1] != self.t {
            return None;
        }
        let last = arc.global_index(self.anchor_piece, ia - 1);
        let sp = &arc.pieces()[self.start_piece];
        let is = sp.t.partition_point(|&s| s < self.start_time);
        let exact = is < sp.len() && sp.t[is] == self.start_time;
        let first = arc.global_index(self.start_piece, is);
        Some(WindowRange {
            first,
            last,
            start_point: (!exact).then_some((self.start_piece, self.start_time)),
        })
    }

    /// State at the window start.
    pub fn start_state(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_abs(self.start_piece, self.start_time, &mut out);
        out
    }

    /// Materialise the window as a stand-alone memory arc in `(s, k)`
    /// coordinates.
    pub fn to_arc(&self) -> MemoryArc {
        let n = self.dim();
        let mut pieces: Vec<Piece> = Vec::new();
        self.for_each_sample(|s, k, x| {
            let s = if s.abs() < TIME_EPS { 0.0 } else { s };
            match pieces.last_mut() {
                Some(p) if p.j == k => {
                    if s > *p.t.last().unwrap() {
                        p.t.push(s);
                        p.x.extend_from_slice(x);
                    }
                }
                _ => pieces.push(Piece {
                    j: k,
                    t: vec![s],
                    x: x.to_vec(),
                    dx: None,
                }),
            }
        });
        let arc = HybridArc::new(n, pieces, Interpolation::Linear)
            .expect("window of a valid arc is a valid memory arc");
        MemoryArc::new(arc).expect("window has no forward part")
    }
}

impl MemoryArc {
    /// View anchored at `(0, 0)`.
    pub fn view(&self, delta: f64) -> Memory<'_> {
        let arc = self.arc();
        let p = arc.pieces().len() - 1;
        Memory::build(arc, p, 0.0, 0, delta, None).expect("memory arc view")
    }
}

/// `A^Δ_{[t,j]}x`, materialised.
pub fn memory_operator(x: &HybridArc, t: f64, j: i64, delta: f64) -> Result<MemoryArc> {
    if !x.domain().contains_forward(t, j) {
        return Err(Error::OutOfDomain { t, j });
    }
    Ok(Memory::new(x, t, j, delta)?.to_arc())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn piece(j: i64, t: Vec<f64>, x: Vec<f64>) -> Piece {
        Piece { j, t, x, dx: None }
    }

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    #[test]
    fn constant_window() {
        let arc = HybridArc::new(
            1,
            vec![
                piece(0, vec![-1.0, 0.0], vec![3.0, 3.0]),
                piece(0, grid(0.0, 2.0, 4), vec![3.0; 5]),
            ],
            Interpolation::Linear,
        )
        .unwrap();
        let m = memory_operator(&arc, 1.0, 0, 1.0).unwrap();
        assert!((m.depth() + 1.0).abs() < 1e-12);
        m.arc().all_samples().for_each(|(_, _, _, _, x)| assert_eq!(x, &[3.0]));
    }

    #[test]
    fn affine_window_is_shift() {
        let ts = grid(0.0, 3.0, 30);
        let xs = ts.clone();
        let arc = HybridArc::new(
            1,
            vec![piece(0, grid(-2.0, 0.0, 2), vec![0.0; 3]), piece(0, ts, xs)],
            Interpolation::Linear,
        )
        .unwrap();
        let m = memory_operator(&arc, 2.0, 0, 1.0).unwrap();
        for &s in &[-1.0, -0.75, -0.5, -0.05, 0.0] {
            let v = m.eval(s, 0).unwrap()[0];
            assert!((v - (2.0 + s)).abs() < 1e-12, "s={s} v={v}");
        }
        assert!((m.depth() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn jump_inside_window_gives_two_segments() {
        let arc = HybridArc::new(
            1,
            vec![
                piece(0, vec![-2.0, 0.0], vec![1.0, 1.0]),
                piece(0, vec![0.0, 1.0], vec![1.0, 1.0]),
                piece(1, vec![1.0, 1.5], vec![2.0, 2.0]),
            ],
            Interpolation::Linear,
        )
        .unwrap();
        let v = Memory::new(&arc, 1.5, 1, 1.0).unwrap();
        // target σ = 2.5 - 1 = 1.5 lies in the gap (1.0, 2.0): Δ_inf = 1.5.
        assert!((v.delta_inf() - 1.5).abs() < 1e-12);
        let m = v.to_arc();
        let ks: Vec<i64> = m.arc().pieces().iter().map(|p| p.j).collect();
        assert_eq!(ks, vec![-1, 0]);
        assert_eq!(m.eval(-0.5, -1).unwrap(), vec![1.0]);
        assert_eq!(m.eval(-0.5, 0).unwrap(), vec![2.0]);
        assert_eq!(m.eval(0.0, 0).unwrap(), vec![2.0]);
        // with a deeper Δ the window reaches into the flow before the jump
        let v = Memory::new(&arc, 1.5, 1, 1.5).unwrap();
        assert!((v.delta_inf() - 1.5).abs() < 1e-12);
        let v = Memory::new(&arc, 1.5, 1, 1.75).unwrap();
        assert!((v.delta_inf() - 1.75).abs() < 1e-12);
        assert_eq!(v.to_arc().arc().pieces()[0].t[0], -0.75);
    }

    #[test]
    fn shallow_history_returns_everything() {
        let arc = HybridArc::new(
            1,
            vec![piece(0, vec![-0.5, 0.0], vec![1.0, 1.0]), piece(0, vec![0.0, 0.2], vec![1.0, 1.0])],
            Interpolation::Linear,
        )
        .unwrap();
        let v = Memory::new(&arc, 0.2, 0, 5.0).unwrap();
        assert!((v.delta_inf() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn delayed_lookup_takes_latest_index() {
        let arc = HybridArc::new(
            1,
            vec![
                piece(0, vec![-3.0, 0.0], vec![0.0, 0.0]),
                piece(0, vec![0.0, 1.0], vec![0.0, 1.0]),
                piece(1, vec![1.0, 2.0], vec![10.0, 11.0]),
            ],
            Interpolation::Linear,
        )
        .unwrap();
        let v = Memory::new(&arc, 2.0, 1, 3.0).unwrap();
        assert_eq!(v.delayed(1.0), vec![10.0]);
        assert_eq!(v.delayed(1.5), vec![0.5]);
        assert_eq!(v.delayed(0.0), vec![11.0]);
    }

    #[test]
    fn head_interpolates_beyond_stored_samples() {
        let arc = HybridArc::new(
            1,
            vec![piece(0, vec![-1.0, 0.0], vec![0.0, 0.0]), piece(0, vec![0.0], vec![0.0])],
            Interpolation::Linear,
        )
        .unwrap();
        let head = [1.0];
        let v = Memory::with_head(&arc, 0.1, &head, 1.0).unwrap();
        assert_eq!(v.now(), &[1.0]);
        assert!((v.delayed(0.05)[0] - 0.5).abs() < 1e-12);
        assert_eq!(v.delayed(0.5), vec![0.0]);
    }

    #[test]
    fn integral_of_constant_window() {
        let arc = HybridArc::new(
            1,
            vec![piece(0, grid(-2.0, 0.0, 20), vec![2.0; 21]), piece(0, grid(0.0, 1.0, 10), vec![2.0; 11])],
            Interpolation::Linear,
        )
        .unwrap();
        let v = Memory::new(&arc, 0.55, 0, 1.5).unwrap();
        let i = v.integrate_time(0.3, |x| x[0] * x[0]);
        assert!((i - 1.2).abs() < 1e-12);
    }

    #[test]
    fn sample_range_covers_window() {
        let arc = HybridArc::new(
            1,
            vec![piece(0, grid(-2.0, 0.0, 4), vec![0.0; 5]), piece(0, grid(0.0, 1.0, 4), vec![0.0; 5])],
            Interpolation::Linear,
        )
        .unwrap();
        let v = Memory::new(&arc, 0.5, 0, 1.2).unwrap();
        let r = v.sample_range().unwrap();
        assert_eq!(r.last, 5 + 2);
        assert_eq!(r.first, 3);
        let (sp, st) = r.start_point.unwrap();
        assert_eq!(sp, 0);
        assert!((st + 0.7).abs() < 1e-12);
        let mut count = 0;
        v.for_each_sample(|_, _, _| count += 1);
        // start point, -0.5, 0.0 (memory), 0.0, 0.25, 0.5 (forward)
        assert_eq!(count, 6);
    }
}
