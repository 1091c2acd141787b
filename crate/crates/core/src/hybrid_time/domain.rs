use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used when comparing segment endpoints.
pub const TIME_EPS: f64 = 1e-12;

/// A point `(t, j)` of a hybrid time domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridTime {
    pub t: f64,
    pub j: i64,
}

impl HybridTime {
    pub fn new(t: f64, j: i64) -> Self {
        Self { t, j }
    }

    /// `t + j`, the quantity that orders hybrid times.
    pub fn length(&self) -> f64 {
        self.t + self.j as f64
    }

    /// `self ⪯ other`.
    pub fn precedes_eq(&self, other: &HybridTime) -> bool {
        self.length() <= other.length()
    }

    /// `self ≺ other`.
    pub fn precedes(&self, other: &HybridTime) -> bool {
        self.length() < other.length()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_lo: f64,
    pub t_hi: f64,
    pub j: i64,
}

impl Segment {
    pub fn new(t_lo: f64, t_hi: f64, j: i64) -> Self {
        Self { t_lo, t_hi, j }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_lo - TIME_EPS && t <= self.t_hi + TIME_EPS
    }

    pub fn len(&self) -> f64 {
        self.t_hi - self.t_lo
    }

    pub fn is_point(&self) -> bool {
        self.t_hi <= self.t_lo
    }
}

/// A compact hybrid time domain with memory.
///
/// Segments are kept in domain order: the memory part (`j ≤ 0`, `t ≤ 0`)
/// first, then the forward part (`j ≥ 0`, `t ≥ 0`). Index `0` may carry two
/// segments, one ending at `t = 0` in the memory part and one starting there in
/// the forward part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct HybridTimeDomain {
    segments: Vec<Segment>,
    n_memory: usize,
}

impl TryFrom<Vec<Segment>> for HybridTimeDomain {
    type Error = Error;

    fn try_from(segments: Vec<Segment>) -> Result<Self> {
        validate_domain(&segments)
    }
}

impl From<HybridTimeDomain> for Vec<Segment> {
    fn from(d: HybridTimeDomain) -> Self {
        d.segments
    }
}

fn classify_memory(segments: &[Segment]) -> usize {
    let mut n = segments.iter().take_while(|s| s.j < 0).count();
    if let Some(s) = segments.get(n) {
        let paired = segments.get(n + 1).is_some_and(|next| next.j == 0);
        // a lone point at (0, 0) closing a list with earlier jumps ends a memory arc
        let closing = n > 0 && n + 1 == segments.len() && s.t_hi <= 0.0;
        if s.j == 0 && (paired || s.t_lo < 0.0 || closing) {
            n += 1;
        }
    }
    n
}

/// Validate a list of `(t_lo, t_hi, j)` segments as a compact hybrid time
/// domain with memory.
pub fn validate_domain(segments: &[Segment]) -> Result<HybridTimeDomain> {
    if segments.is_empty() {
        return Err(Error::Anchor("empty segment list".into()));
    }
    for (i, s) in segments.iter().enumerate() {
        if !(s.t_lo.is_finite() && s.t_hi.is_finite()) {
            return Err(Error::NonFinite(format!("segment {i} endpoints")));
        }
        if s.t_lo > s.t_hi {
            return Err(Error::Order {
                index: i,
                t_lo: s.t_lo,
                t_hi: s.t_hi,
            });
        }
    }
    let n_memory = classify_memory(segments);
    let (mem, fwd) = segments.split_at(n_memory);

    if let Some(last) = mem.last() {
        if last.j != 0 || last.t_hi.abs() > TIME_EPS {
            return Err(Error::Anchor(format!(
                "memory part must end at (0, 0), ends at ({}, {})",
                last.t_hi, last.j
            )));
        }
    }
    if let Some(first) = fwd.first() {
        if first.j != 0 || first.t_lo.abs() > TIME_EPS {
            return Err(Error::Anchor(format!(
                "forward part must start at (0, 0), starts at ({}, {})",
                first.t_lo, first.j
            )));
        }
    }
    for part in [(mem, 0usize), (fwd, n_memory)] {
        let (segs, offset) = part;
        for (k, w) in segs.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let (i, n) = (offset + k, offset + k + 1);
            if b.j != a.j + 1 {
                return Err(Error::Contiguity {
                    index: i,
                    next: n,
                    detail: format!("jump index goes from {} to {}", a.j, b.j),
                });
            }
            if (a.t_hi - b.t_lo).abs() > TIME_EPS * (1.0 + a.t_hi.abs()) {
                return Err(Error::Contiguity {
                    index: i,
                    next: n,
                    detail: format!("t_hi = {} but next t_lo = {}", a.t_hi, b.t_lo),
                });
            }
        }
    }
    Ok(HybridTimeDomain {
        segments: segments.to_vec(),
        n_memory,
    })
}

impl HybridTimeDomain {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn memory_part(&self) -> &[Segment] {
        &self.segments[..self.n_memory]
    }

    pub fn forward_part(&self) -> &[Segment] {
        &self.segments[self.n_memory..]
    }

    pub fn has_memory(&self) -> bool {
        self.n_memory > 0
    }

    /// Number of memory segments minus one (the `K` of the definition), if any.
    pub fn k_max(&self) -> Option<i64> {
        self.memory_part().first().map(|s| -s.j)
    }

    /// Number of forward segments (the `J` of the definition).
    pub fn j_count(&self) -> usize {
        self.forward_part().len()
    }

    /// Whether `(t, j)` lies in the domain.
    pub fn contains(&self, t: f64, j: i64) -> bool {
        self.segments.iter().any(|s| s.j == j && s.contains(t))
    }

    /// Whether `(t, j)` lies in the forward part.
    pub fn contains_forward(&self, t: f64, j: i64) -> bool {
        self.forward_part().iter().any(|s| s.j == j && s.contains(t))
    }

    /// Truncate the forward part to `[0, T] × {0, …, J}`.
    pub fn truncate(&self, t_max: f64, j_max: i64) -> Result<HybridTimeDomain> {
        let mut out: Vec<Segment> = self.memory_part().to_vec();
        for s in self.forward_part() {
            if s.j > j_max || s.t_lo > t_max {
                break;
            }
            out.push(Segment::new(s.t_lo, s.t_hi.min(t_max), s.j));
        }
        validate_domain(&out)
    }
}

/// Memory depth: the minimum of `s + k` over the memory part, `0` if none.
pub fn depth(d: &HybridTimeDomain) -> f64 {
    d.memory_part()
        .iter()
        .map(|s| s.t_lo + s.j as f64)
        .fold(0.0, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: f64, b: f64, j: i64) -> Segment {
        Segment::new(a, b, j)
    }

    #[test]
    fn forward_two_segments() {
        let d = validate_domain(&[seg(0.0, 1.0, 0), seg(1.0, 2.0, 1)]).unwrap();
        assert_eq!(d.j_count(), 2);
        assert!(!d.has_memory());
        assert_eq!(depth(&d), 0.0);
    }

    #[test]
    fn single_memory_interval() {
        let d = validate_domain(&[seg(-1.0, 0.0, 0), seg(0.0, 1.0, 0)]).unwrap();
        assert_eq!(d.k_max(), Some(0));
        assert_eq!(d.memory_part().len(), 1);
        assert_eq!(depth(&d), -1.0);
    }

    #[test]
    fn gap_is_contiguity_error() {
        let e = validate_domain(&[seg(0.0, 1.0, 0), seg(1.5, 2.0, 1)]).unwrap_err();
        assert!(matches!(e, Error::Contiguity { .. }), "{e:?}");
    }

    #[test]
    fn reversed_segment_is_order_error() {
        let e = validate_domain(&[seg(0.0, 1.0, 0), seg(1.0, 0.5, 1)]).unwrap_err();
        assert!(matches!(e, Error::Order { index: 1, .. }));
    }

    #[test]
    fn anchors() {
        assert!(matches!(
            validate_domain(&[seg(0.5, 1.0, 0)]).unwrap_err(),
            Error::Anchor(_)
        ));
        assert!(matches!(
            validate_domain(&[seg(-1.0, -0.5, 0)]).unwrap_err(),
            Error::Anchor(_)
        ));
        assert!(matches!(
            validate_domain(&[seg(0.0, 1.0, 1)]).unwrap_err(),
            Error::Anchor(_)
        ));
    }

    #[test]
    fn two_memory_segments_depth() {
        let d = validate_domain(&[seg(-1.0, -0.5, -1), seg(-0.5, 0.0, 0)]).unwrap();
        assert_eq!(depth(&d), -2.0);
        assert!(d.forward_part().is_empty());
    }

    #[test]
    fn point_segments_allowed() {
        let d = validate_domain(&[seg(0.0, 0.0, 0), seg(0.0, 0.0, 1), seg(0.0, 1.0, 2)]).unwrap();
        assert_eq!(d.j_count(), 3);
    }

    #[test]
    fn ordering() {
        let a = HybridTime::new(0.5, 1);
        let b = HybridTime::new(1.5, 0);
        assert!(a.precedes_eq(&b) && b.precedes_eq(&a));
        assert!(!a.precedes(&b));
        assert!(HybridTime::new(0.0, 1).precedes(&HybridTime::new(1.1, 0)));
    }

    #[test]
    fn truncation_revalidates() {
        let d = validate_domain(&[seg(-1.0, 0.0, 0), seg(0.0, 1.0, 0), seg(1.0, 3.0, 1)]).unwrap();
        let t = d.truncate(2.0, 1).unwrap();
        assert_eq!(t.forward_part().last().unwrap().t_hi, 2.0);
        let t = d.truncate(5.0, 0).unwrap();
        assert_eq!(t.j_count(), 1);
    }

    #[test]
    fn serde_roundtrip_validates() {
        let d = validate_domain(&[seg(0.0, 1.0, 0), seg(1.0, 2.0, 1)]).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let back: HybridTimeDomain = serde_json::from_str(&s).unwrap();
        assert_eq!(d, back);
        let bad = r#"[{"t_lo":0.0,"t_hi":1.0,"j":0},{"t_lo":1.5,"t_hi":2.0,"j":1}]"#;
        assert!(serde_json::from_str::<HybridTimeDomain>(bad).is_err());
    }

    #[test]
    fn point_window_after_a_jump_is_memory() {
        let d = validate_domain(&[seg(-0.5, 0.0, -1), seg(0.0, 0.0, 0)]).unwrap();
        assert_eq!(d.memory_part().len(), 2);
        assert!(d.forward_part().is_empty());
        assert_eq!(depth(&d), -1.5);
    }
}
