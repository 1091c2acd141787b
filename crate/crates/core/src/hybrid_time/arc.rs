use serde::{Deserialize, Serialize};

use super::domain::{depth, validate_domain, HybridTimeDomain, Segment, TIME_EPS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    Linear,
    #[default]
    CubicHermite,
}

/// Samples of one flow interval. States are stored row-major, `dim` values
/// per sample; `dx` holds the matching derivatives when known.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub j: i64,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub dx: Option<Vec<f64>>,
}

impl Piece {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_lo(&self) -> f64 {
        self.t[0]
    }

    pub fn t_hi(&self) -> f64 {
        *self.t.last().expect("piece has samples")
    }

    pub fn state(&self, i: usize, dim: usize) -> &[f64] {
        &self.x[i * dim..(i + 1) * dim]
    }

    pub fn deriv(&self, i: usize, dim: usize) -> Option<&[f64]> {
        self.dx.as_ref().map(|d| &d[i * dim..(i + 1) * dim])
    }
}

/// Cubic Hermite interpolation on `[t0, t1]`.
#[allow(clippy::too_many_arguments)]
pub fn hermite(
    t0: f64,
    x0: &[f64],
    f0: &[f64],
    t1: f64,
    x1: &[f64],
    f1: &[f64],
    t: f64,
    out: &mut [f64],
) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    for k in 0..out.len() {
        out[k] = h00 * x0[k] + h10 * h * f0[k] + h01 * x1[k] + h11 * h * f1[k];
    }
}

fn lerp(t0: f64, x0: &[f64], t1: f64, x1: &[f64], t: f64, out: &mut [f64]) {
    let w = (t - t0) / (t1 - t0);
    for k in 0..out.len() {
        out[k] = x0[k] + w * (x1[k] - x0[k]);
    }
}

/// A sampled hybrid arc with memory. Pieces correspond one-to-one with the
/// segments of its hybrid time domain.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridArc {
    dim: usize,
    pieces: Vec<Piece>,
    n_memory: usize,
    interp: Interpolation,
    offsets: Vec<usize>,
}

impl HybridArc {
    pub fn new(dim: usize, pieces: Vec<Piece>, interp: Interpolation) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                what: "state".into(),
                expected: 1,
                got: 0,
            });
        }
        for (p, piece) in pieces.iter().enumerate() {
            if piece.t.is_empty() {
                return Err(Error::Order {
                    index: p,
                    t_lo: f64::NAN,
                    t_hi: f64::NAN,
                });
            }
            if piece.x.len() != piece.t.len() * dim {
                return Err(Error::DimensionMismatch {
                    what: format!("samples of piece {p}"),
                    expected: piece.t.len() * dim,
                    got: piece.x.len(),
                });
            }
            if let Some(dx) = &piece.dx {
                if dx.len() != piece.x.len() {
                    return Err(Error::DimensionMismatch {
                        what: format!("derivatives of piece {p}"),
                        expected: piece.x.len(),
                        got: dx.len(),
                    });
                }
            }
            for w in piece.t.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::Order {
                        index: p,
                        t_lo: w[0],
                        t_hi: w[1],
                    });
                }
            }
            if piece.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("state in piece {p}")));
            }
        }
        let segs: Vec<Segment> = pieces
            .iter()
            .map(|p| Segment::new(p.t_lo(), p.t_hi(), p.j))
            .collect();
        let d = validate_domain(&segs)?;
        let n_memory = d.memory_part().len();
        let mut arc = Self {
            dim,
            pieces,
            n_memory,
            interp,
            offsets: Vec::new(),
        };
        arc.rebuild_offsets();
        Ok(arc)
    }

    /// Assemble without validation; used by the simulator, which constructs
    /// domains that are valid by construction.
    pub(crate) fn from_parts_unchecked(
        dim: usize,
        pieces: Vec<Piece>,
        n_memory: usize,
        interp: Interpolation,
    ) -> Self {
        let mut arc = Self {
            dim,
            pieces,
            n_memory,
            interp,
            offsets: Vec::new(),
        };
        arc.rebuild_offsets();
        arc
    }

    fn rebuild_offsets(&mut self) {
        self.offsets.clear();
        let mut acc = 0;
        for p in &self.pieces {
            self.offsets.push(acc);
            acc += p.len();
        }
        self.offsets.push(acc);
    }

    /// A memory arc holding `value` on `[-time_depth, 0]` with `j = 0`.
    pub fn constant_history(value: &[f64], time_depth: f64) -> Result<Self> {
        Self::history_from_fn(value.len(), time_depth, 1, |_| value.to_vec())
    }

    /// A single-interval memory arc on `[-time_depth, 0]` sampled at
    /// `intervals + 1` equally spaced points.
    pub fn history_from_fn(
        dim: usize,
        time_depth: f64,
        intervals: usize,
        f: impl Fn(f64) -> Vec<f64>,
    ) -> Result<Self> {
        if !(time_depth > 0.0) || intervals == 0 {
            return Err(Error::BadInitial(format!(
                "history needs positive depth and at least one interval, got {time_depth} / {intervals}"
            )));
        }
        let mut t = Vec::with_capacity(intervals + 1);
        let mut x = Vec::with_capacity((intervals + 1) * dim);
        for i in 0..=intervals {
            let s = if i == intervals {
                0.0
            } else {
                -time_depth + time_depth * i as f64 / intervals as f64
            };
            let v = f(s);
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "history sample".into(),
                    expected: dim,
                    got: v.len(),
                });
            }
            t.push(s);
            x.extend(v);
        }
        Self::new(
            dim,
            vec![Piece { j: 0, t, x, dx: None }],
            Interpolation::Linear,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interp
    }

    pub fn set_interpolation(&mut self, interp: Interpolation) {
        self.interp = interp;
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn n_memory(&self) -> usize {
        self.n_memory
    }

    pub fn memory_pieces(&self) -> &[Piece] {
        &self.pieces[..self.n_memory]
    }

    pub fn forward_pieces(&self) -> &[Piece] {
        &self.pieces[self.n_memory..]
    }

    /// Index into [`Self::pieces`] of the first forward piece.
    pub fn forward_start(&self) -> usize {
        self.n_memory
    }

    pub fn total_samples(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    /// Global index of sample `i` of piece `p`, in domain order.
    pub fn global_index(&self, p: usize, i: usize) -> usize {
        self.offsets[p] + i
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn domain(&self) -> HybridTimeDomain {
        let segs: Vec<Segment> = self
            .pieces
            .iter()
            .map(|p| Segment::new(p.t_lo(), p.t_hi(), p.j))
            .collect();
        validate_domain(&segs).expect("arc pieces always form a valid domain")
    }

    pub fn depth(&self) -> f64 {
        depth(&self.domain())
    }

    /// The last stored time and jump index.
    pub fn end(&self) -> (f64, i64) {
        let p = self.pieces.last().expect("arc has pieces");
        (p.t_hi(), p.j)
    }

    /// Locate the piece holding `(t, j)`.
    pub fn piece_index(&self, t: f64, j: i64) -> Option<usize> {
        let mem = if self.n_memory > 0 && j <= 0 {
            let k = self.pieces[0].j;
            let idx = j - k;
            (idx >= 0 && (idx as usize) < self.n_memory).then_some(idx as usize)
        } else {
            None
        };
        let fwd = if j >= 0 {
            let idx = self.n_memory + j as usize;
            (idx < self.pieces.len()).then_some(idx)
        } else {
            None
        };
        let inside = |p: usize| {
            let piece = &self.pieces[p];
            t >= piece.t_lo() - TIME_EPS && t <= piece.t_hi() + TIME_EPS
        };
        match (mem, fwd) {
            (Some(m), Some(f)) => {
                if t >= 0.0 && inside(f) {
                    Some(f)
                } else if inside(m) {
                    Some(m)
                } else {
                    None
                }
            }
            (Some(p), None) | (None, Some(p)) => inside(p).then_some(p),
            (None, None) => None,
        }
    }

    /// Interpolate piece `p` at time `t` into `out`.
    pub fn eval_piece_into(&self, p: usize, t: f64, out: &mut [f64]) {
        let piece = &self.pieces[p];
        let n = self.dim;
        let i = piece.t.partition_point(|&s| s <= t);
        if i == 0 {
            out.copy_from_slice(piece.state(0, n));
            return;
        }
        if i == piece.len() || piece.t[i - 1] == t {
            out.copy_from_slice(piece.state(i - 1, n));
            return;
        }
        let (t0, t1) = (piece.t[i - 1], piece.t[i]);
        let (x0, x1) = (piece.state(i - 1, n), piece.state(i, n));
        match (self.interp, &piece.dx) {
            (Interpolation::CubicHermite, Some(_)) => {
                let f0 = piece.deriv(i - 1, n).unwrap();
                let f1 = piece.deriv(i, n).unwrap();
                hermite(t0, x0, f0, t1, x1, f1, t, out);
            }
            _ => lerp(t0, x0, t1, x1, t, out),
        }
    }

    pub fn eval(&self, t: f64, j: i64) -> Result<Vec<f64>> {
        let p = self.piece_index(t, j).ok_or(Error::OutOfDomain { t, j })?;
        let mut out = vec![0.0; self.dim];
        self.eval_piece_into(p, t, &mut out);
        Ok(out)
    }

    /// Iterate over forward samples as `(piece, sample, t, j, x)`.
    pub fn forward_samples(&self) -> impl Iterator<Item = (usize, usize, f64, i64, &[f64])> + '_ {
        let n = self.dim;
        (self.n_memory..self.pieces.len()).flat_map(move |p| {
            let piece = &self.pieces[p];
            (0..piece.len()).map(move |i| (p, i, piece.t[i], piece.j, piece.state(i, n)))
        })
    }

    /// Iterate over all samples in domain order.
    pub fn all_samples(&self) -> impl Iterator<Item = (usize, usize, f64, i64, &[f64])> + '_ {
        let n = self.dim;
        (0..self.pieces.len()).flat_map(move |p| {
            let piece = &self.pieces[p];
            (0..piece.len()).map(move |i| (p, i, piece.t[i], piece.j, piece.state(i, n)))
        })
    }

    /// Append a sample to the last piece.
    pub(crate) fn push_sample(&mut self, t: f64, x: &[f64], dx: &[f64]) {
        let p = self.pieces.last_mut().expect("arc has pieces");
        p.t.push(t);
        p.x.extend_from_slice(x);
        if let Some(d) = p.dx.as_mut() {
            d.extend_from_slice(dx);
        }
        *self.offsets.last_mut().unwrap() += 1;
    }

    /// Start a new forward piece with index `j` at `(t, x)`.
    pub(crate) fn push_piece(&mut self, j: i64, t: f64, x: &[f64], dx: &[f64]) {
        self.pieces.push(Piece {
            j,
            t: vec![t],
            x: x.to_vec(),
            dx: Some(dx.to_vec()),
        });
        let end = *self.offsets.last().unwrap();
        self.offsets.push(end + 1);
    }

    /// Overwrite the stored derivative of the last sample.
    pub(crate) fn set_last_deriv(&mut self, dx: &[f64]) {
        let n = self.dim;
        let p = self.pieces.last_mut().expect("arc has pieces");
        if let Some(d) = p.dx.as_mut() {
            let len = d.len();
            d[len - n..].copy_from_slice(dx);
        }
    }

    /// Keep only the memory part.
    pub fn memory_only(&self) -> Result<MemoryArc> {
        let pieces = self.pieces[..self.n_memory].to_vec();
        if pieces.is_empty() {
            return Err(Error::BadInitial("arc has no memory part".into()));
        }
        MemoryArc::new(HybridArc::new(self.dim, pieces, self.interp)?)
    }
}

/// A hybrid arc whose domain lies in `R≤0 × Z≤0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryArc(HybridArc);

impl MemoryArc {
    pub fn new(arc: HybridArc) -> Result<Self> {
        if arc.n_memory != arc.pieces.len() {
            return Err(Error::Anchor(
                "memory arc must not have a forward part".into(),
            ));
        }
        Ok(Self(arc))
    }

    /// Constant history on `[-time_depth, 0]`.
    pub fn constant(value: &[f64], time_depth: f64) -> Result<Self> {
        Self::new(HybridArc::constant_history(value, time_depth)?)
    }

    pub fn arc(&self) -> &HybridArc {
        &self.0
    }

    pub fn into_arc(self) -> HybridArc {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn depth(&self) -> f64 {
        self.0.depth()
    }

    /// `-Δ-1 ≤ depth ≤ -Δ`, with a small tolerance.
    pub fn in_m_delta(&self, delta: f64) -> bool {
        let d = self.depth();
        d >= -delta - 1.0 - 1e-9 && d <= -delta + 1e-9
    }

    pub fn eval(&self, s: f64, k: i64) -> Result<Vec<f64>> {
        self.0.eval(s, k)
    }

    /// The value at `(0, 0)`.
    pub fn head(&self) -> &[f64] {
        let p = self.0.pieces.last().expect("memory arc has pieces");
        p.state(p.len() - 1, self.0.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn piece(j: i64, t: Vec<f64>, x: Vec<f64>) -> Piece {
        Piece { j, t, x, dx: None }
    }

    #[test]
    fn sample_points_exact_and_linear_midpoint() {
        let arc = HybridArc::new(
            1,
            vec![piece(0, vec![0.0, 1.0], vec![0.0, 2.0])],
            Interpolation::Linear,
        )
        .unwrap();
        assert_eq!(arc.eval(0.0, 0).unwrap(), vec![0.0]);
        assert_eq!(arc.eval(1.0, 0).unwrap(), vec![2.0]);
        assert_eq!(arc.eval(0.5, 0).unwrap(), vec![1.0]);
        assert!(matches!(arc.eval(1.5, 0), Err(Error::OutOfDomain { .. })));
        assert!(arc.eval(0.5, 1).is_err());
    }

    #[test]
    fn hermite_matches_cubic() {
        let ts: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let xs: Vec<f64> = ts.iter().map(|t| t * t * t).collect();
        let dxs: Vec<f64> = ts.iter().map(|t| 3.0 * t * t).collect();
        let arc = HybridArc::new(
            1,
            vec![Piece {
                j: 0,
                t: ts,
                x: xs,
                dx: Some(dxs),
            }],
            Interpolation::CubicHermite,
        )
        .unwrap();
        for &t in &[0.05, 0.333, 0.71, 0.999] {
            let v = arc.eval(t, 0).unwrap()[0];
            assert!((v - t * t * t).abs() < 1e-6, "t={t} v={v}");
        }
    }

    #[test]
    fn memory_and_forward_zero_pieces() {
        let arc = HybridArc::new(
            1,
            vec![
                piece(0, vec![-1.0, 0.0], vec![5.0, 5.0]),
                piece(0, vec![0.0, 1.0], vec![5.0, 6.0]),
                piece(1, vec![1.0, 2.0], vec![0.0, 1.0]),
            ],
            Interpolation::Linear,
        )
        .unwrap();
        assert_eq!(arc.n_memory(), 1);
        assert_eq!(arc.eval(-0.5, 0).unwrap(), vec![5.0]);
        assert_eq!(arc.eval(0.5, 0).unwrap(), vec![5.5]);
        assert_eq!(arc.eval(1.0, 1).unwrap(), vec![0.0]);
        assert_eq!(arc.eval(1.0, 0).unwrap(), vec![6.0]);
        assert_eq!(arc.total_samples(), 6);
        assert_eq!(arc.forward_samples().count(), 4);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(HybridArc::new(1, vec![piece(0, vec![0.0, 0.0], vec![1.0, 1.0])], Interpolation::Linear).is_err());
        assert!(HybridArc::new(2, vec![piece(0, vec![0.0, 1.0], vec![1.0, 1.0])], Interpolation::Linear).is_err());
    }

    #[test]
    fn memory_arc_membership() {
        let m = MemoryArc::constant(&[1.0], 1.5).unwrap();
        assert!(m.in_m_delta(1.0));
        assert!(m.in_m_delta(0.5));
        assert!(!m.in_m_delta(2.0));
        assert_eq!(m.head(), &[1.0]);
    }
}
