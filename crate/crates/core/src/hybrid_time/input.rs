use std::fmt;
use std::sync::Arc;

use super::arc::{HybridArc, Interpolation, Piece};
use super::domain::HybridTime;
use crate::error::{Error, Result};

type InputFn = Arc<dyn Fn(f64, i64) -> Vec<f64> + Send + Sync>;

/// A hybrid input `u`. Its memory part is the single point `(0, 0)`.
///
/// Sampled inputs are read with previous-sample hold within each jump index;
/// indices past the last stored piece reuse the last piece's final value.
#[derive(Clone)]
pub enum InputSignal {
    Constant(Vec<f64>),
    Sampled(HybridArc),
    Function { dim: usize, f: InputFn },
}

impl fmt::Debug for InputSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Self::Sampled(a) => f.debug_tuple("Sampled").field(&a.total_samples()).finish(),
            Self::Function { dim, .. } => f.debug_struct("Function").field("dim", dim).finish(),
        }
    }
}

impl InputSignal {
    pub fn zero(dim: usize) -> Self {
        Self::Constant(vec![0.0; dim])
    }

    pub fn constant(v: &[f64]) -> Self {
        Self::Constant(v.to_vec())
    }

    pub fn from_fn(dim: usize, f: impl Fn(f64, i64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self::Function { dim, f: Arc::new(f) }
    }

    /// A sampled input; it must not have a memory part.
    pub fn sampled(arc: HybridArc) -> Result<Self> {
        if arc.n_memory() > 0 {
            return Err(Error::Anchor("an input has no memory part".into()));
        }
        Ok(Self::Sampled(arc))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Constant(v) => v.len(),
            Self::Sampled(a) => a.dim(),
            Self::Function { dim, .. } => *dim,
        }
    }

    /// `u(t, j)` with previous-sample hold.
    pub fn value(&self, t: f64, j: i64) -> Vec<f64> {
        match self {
            Self::Constant(v) => v.clone(),
            Self::Function { f, .. } => f(t, j),
            Self::Sampled(a) => {
                let n = a.dim();
                let pieces = a.pieces();
                let idx = pieces
                    .iter()
                    .rposition(|p| p.j <= j)
                    .unwrap_or(0);
                let p = &pieces[idx];
                let i = if p.j < j {
                    p.len() - 1
                } else {
                    p.t.partition_point(|&s| s <= t).saturating_sub(1)
                };
                p.state(i, n).to_vec()
            }
        }
    }
}

/// Recorder used while simulating: stores `u` on the same grid as `x`.
#[derive(Debug, Clone, Default)]
pub(crate) struct InputTrace {
    pieces: Vec<Piece>,
}

impl InputTrace {
    pub fn push(&mut self, t: f64, j: i64, u: &[f64]) {
        match self.pieces.last_mut() {
            Some(p) if p.j == j => {
                p.t.push(t);
                p.x.extend_from_slice(u);
            }
            _ => self.pieces.push(Piece {
                j,
                t: vec![t],
                x: u.to_vec(),
                dx: None,
            }),
        }
    }

    pub fn finish(self, dim: usize) -> HybridArc {
        HybridArc::from_parts_unchecked(dim.max(1), self.pieces, 0, Interpolation::Linear)
    }
}

/// `‖u‖_{[from, to]}`: the larger of the sup over jump points `Γ(u)` and the
/// sup over the remaining samples in the window (the essential sup is
/// approximated by the sample sup).
pub fn sup_norm_input(u: &HybridArc, from: HybridTime, to: HybridTime) -> Result<f64> {
    if !from.precedes_eq(&to) {
        return Err(Error::Domain("window start must precede its end".into()));
    }
    let d = u.domain();
    for h in [from, to] {
        if !d.contains(h.t, h.j) {
            return Err(Error::OutOfDomain { t: h.t, j: h.j });
        }
    }
    let (lo, hi) = (from.length(), to.length());
    let n = u.dim();
    let pieces = u.pieces();
    let mut at_jumps: f64 = 0.0;
    let mut elsewhere: f64 = 0.0;
    for (p, piece) in pieces.iter().enumerate() {
        let has_next = p + 1 < pieces.len();
        for i in 0..piece.len() {
            let s = piece.t[i] + piece.j as f64;
            if s < lo - 1e-12 || s > hi + 1e-12 {
                continue;
            }
            let norm = piece.state(i, n).iter().map(|v| v * v).sum::<f64>().sqrt();
            if has_next && i + 1 == piece.len() {
                at_jumps = at_jumps.max(norm);
            } else {
                elsewhere = elsewhere.max(norm);
            }
        }
    }
    Ok(at_jumps.max(elsewhere))
}

/// `‖φ‖_W`: sup of `dist_w` over window samples with `s + k ∈ [-Δ-1, 0]`.
pub fn memory_sup_distance(
    phi: &crate::hybrid_time::MemoryArc,
    delta: f64,
    dist_w: impl Fn(&[f64]) -> f64,
) -> f64 {
    phi.arc()
        .all_samples()
        .filter(|(_, _, s, k, _)| s + *k as f64 >= -delta - 1.0 - 1e-12)
        .map(|(_, _, _, _, x)| dist_w(x))
        .fold(0.0, f64::max)
}
