use crate::error::{Error, Result};
use crate::hybrid_time::{HybridArc, Memory, MemoryArc};
use crate::system::Solution;

/// Range-maximum table over a fixed sequence.
#[derive(Debug, Clone)]
pub struct SparseMax {
    levels: Vec<Vec<f64>>,
}

impl SparseMax {
    pub fn new(values: Vec<f64>) -> Self {
        let n = values.len();
        let mut levels = vec![values];
        let mut w = 1;
        while 2 * w <= n {
            let prev = levels.last().unwrap();
            let next: Vec<f64> = (0..=n - 2 * w).map(|i| prev[i].max(prev[i + w])).collect();
            levels.push(next);
            w *= 2;
        }
        Self { levels }
    }

    pub fn len(&self) -> usize {
        self.levels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels[0].is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.levels[0][i]
    }

    /// Maximum over `lo..=hi`.
    pub fn query(&self, lo: usize, hi: usize) -> f64 {
        debug_assert!(lo <= hi && hi < self.len());
        let k = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
        let row = &self.levels[k];
        row[lo].max(row[hi + 1 - (1 << k)])
    }
}

/// `V̄(φ)`: sup of `V` over the samples of `φ` with `s + k ≥ -Δ-1`.
pub fn vbar(v: impl Fn(&[f64]) -> f64, phi: &MemoryArc, delta: f64) -> f64 {
    phi.arc()
        .all_samples()
        .filter(|(_, _, s, k, _)| s + *k as f64 >= -delta - 1.0 - 1e-12)
        .map(|(_, _, _, _, x)| v(x))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `V̄` over a memory window, evaluated by direct scan.
pub fn vbar_window(v: impl Fn(&[f64]) -> f64, m: &Memory<'_>) -> f64 {
    let floor = -m.delta() - 1.0 - 1e-12;
    let mut best = f64::NEG_INFINITY;
    m.for_each_sample(|s, k, x| {
        if s + k as f64 >= floor {
            best = best.max(v(x));
        }
    });
    best
}

/// `V` at every stored sample of an arc, with range maxima, for evaluating
/// `V̄(A^Δ_{[t,j]}x)` at every forward sample.
#[derive(Debug, Clone)]
pub struct VbarSeries {
    table: SparseMax,
}

impl VbarSeries {
    pub fn new(x: &HybridArc, v: impl Fn(&[f64]) -> f64) -> Self {
        let vals: Vec<f64> = x.all_samples().map(|(_, _, _, _, s)| v(s)).collect();
        Self {
            table: SparseMax::new(vals),
        }
    }

    /// `V` at global sample `g`.
    pub fn value(&self, g: usize) -> f64 {
        self.table.get(g)
    }

    /// `V̄(A^Δ_{[t,j]}x)` for the stored sample `(p, i)`.
    pub fn at(
        &self,
        x: &HybridArc,
        p: usize,
        i: usize,
        delta: f64,
        v: impl Fn(&[f64]) -> f64,
    ) -> Result<f64> {
        let piece = &x.pieces()[p];
        let m = Memory::new(x, piece.t[i], piece.j, delta)?;
        let r = m.sample_range().ok_or(Error::OutOfDomain {
            t: piece.t[i],
            j: piece.j,
        })?;
        let mut best = if r.first <= r.last {
            self.table.query(r.first, r.last)
        } else {
            f64::NEG_INFINITY
        };
        if r.start_point.is_some() {
            best = best.max(v(&m.start_state()));
        }
        Ok(best)
    }
}

/// Values of a functional `V(A^Δ_{[t,j]}x)` at every forward sample of a
/// solution, with range maxima over `t + j` windows.
#[derive(Debug, Clone)]
pub struct FunctionalSeries {
    sigma: Vec<f64>,
    table: SparseMax,
    delta: f64,
}

impl FunctionalSeries {
    pub fn new(sol: &Solution, v: impl Fn(&Memory<'_>) -> f64) -> Result<Self> {
        let mut sigma = Vec::new();
        let mut vals = Vec::new();
        for (_, _, t, j, _) in sol.x.forward_samples() {
            let m = Memory::new(&sol.x, t, j, sol.delta)?;
            sigma.push(t + j as f64);
            vals.push(v(&m));
        }
        Ok(Self {
            sigma,
            table: SparseMax::new(vals),
            delta: sol.delta,
        })
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// `V` at the `k`-th forward sample.
    pub fn value(&self, k: usize) -> f64 {
        self.table.get(k)
    }

    /// `V̂` at the `k`-th forward sample.
    pub fn vhat(&self, k: usize) -> f64 {
        let s = self.sigma[k];
        let floor = s - self.delta - 1.0;
        if floor < -1e-12 {
            return self.table.get(k);
        }
        let lo = self.sigma.partition_point(|&x| x < floor - 1e-12);
        self.table.query(lo.min(k), k)
    }
}

/// `V̂(A^Δ_{[t,j]}x)`: the sup of `V(A^Δ_{[t+s,j+k]}x)` over
/// `s + k ∈ [-Δ-1, 0]`, taken over forward samples. When part of that
/// range reaches before `(0, 0)`, `V̂ = V(A^Δ_{[t,j]}x)`.
pub fn vhat(v: impl Fn(&Memory<'_>) -> f64, sol: &Solution, t: f64, j: i64) -> Result<f64> {
    let x = &sol.x;
    if !x.domain().contains_forward(t, j) {
        return Err(Error::OutOfDomain { t, j });
    }
    let here = v(&Memory::new(x, t, j, sol.delta)?);
    let s = t + j as f64;
    let floor = s - sol.delta - 1.0;
    if floor < -1e-12 {
        return Ok(here);
    }
    let mut best = here;
    for (_, _, tt, jj, _) in x.forward_samples() {
        let ss = tt + jj as f64;
        if ss > s + 1e-12 {
            break;
        }
        if ss >= floor - 1e-12 && (jj < j || (jj == j && tt <= t)) {
            best = best.max(v(&Memory::new(x, tt, jj, sol.delta)?));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid_time::{InputSignal, Interpolation, Piece};
    use crate::system::{simulate, SimConfig, SystemDef};

    fn abs(x: &[f64]) -> f64 {
        x[0].abs()
    }

    #[test]
    fn sparse_max_matches_scan() {
        let vals: Vec<f64> = (0..37).map(|i| ((i * 7919) % 31) as f64).collect();
        let t = SparseMax::new(vals.clone());
        for lo in 0..vals.len() {
            for hi in lo..vals.len() {
                let m = vals[lo..=hi].iter().cloned().fold(f64::MIN, f64::max);
                assert_eq!(t.query(lo, hi), m);
            }
        }
    }

    #[test]
    fn vbar_examples() {
        let phi = MemoryArc::constant(&[3.0], 1.0).unwrap();
        assert_eq!(vbar(abs, &phi, 1.0), 3.0);

        let t: Vec<f64> = (0..=10).map(|i| -1.0 + 0.1 * i as f64).collect();
        let arc = HybridArc::new(
            1,
            vec![Piece { j: 0, x: t.clone(), t, dx: None }],
            Interpolation::Linear,
        )
        .unwrap();
        assert!((vbar(abs, &MemoryArc::new(arc).unwrap(), 1.0) - 1.0).abs() < 1e-12);

        let arc = HybridArc::new(
            1,
            vec![Piece { j: 0, t: vec![-2.5, -2.0, 0.0], x: vec![5.0, 1.0, 1.0], dx: None }],
            Interpolation::Linear,
        )
        .unwrap();
        assert_eq!(vbar(abs, &MemoryArc::new(arc).unwrap(), 1.0), 1.0);
    }

    fn decay(history: f64, horizon: f64) -> Solution {
        let sys = SystemDef::new("decay", 0.5, 1, 1).with_flow(|m, _| vec![-m.now()[0]]);
        let phi = MemoryArc::constant(&[history], 1.5).unwrap();
        let cfg = SimConfig { h: 1e-2, horizon_t: horizon, ..SimConfig::default() };
        simulate(&sys, &phi, &InputSignal::zero(1), &cfg).unwrap()
    }

    #[test]
    fn vbar_series_matches_scan() {
        let sol = decay(2.0, 3.0);
        let series = VbarSeries::new(&sol.x, abs);
        for (p, i, t, j, _) in sol.x.forward_samples() {
            let fast = series.at(&sol.x, p, i, sol.delta, abs).unwrap();
            let slow = vbar_window(abs, &Memory::new(&sol.x, t, j, sol.delta).unwrap());
            assert!((fast - slow).abs() < 1e-12, "t={t}: {fast} vs {slow}");
        }
    }

    #[test]
    fn vhat_examples() {
        let sol = decay(1.0, 4.0);
        let v = |m: &Memory<'_>| m.now()[0].abs();
        let here = v(&Memory::new(&sol.x, 0.5, 0, sol.delta).unwrap());
        assert_eq!(vhat(v, &sol, 0.5, 0).unwrap(), here);

        let t = 3.5;
        let got = vhat(v, &sol, t, 0).unwrap();
        let start = v(&Memory::new(&sol.x, t - sol.delta - 1.0, 0, sol.delta).unwrap());
        assert!((got - start).abs() < 1e-9, "{got} vs {start}");

        let series = FunctionalSeries::new(&sol, v).unwrap();
        for (k, (_, _, tt, jj, _)) in sol.x.forward_samples().enumerate() {
            let a = series.vhat(k);
            let b = vhat(v, &sol, tt, jj).unwrap();
            assert!((a - b).abs() < 1e-12);
            assert!(a >= series.value(k));
        }

        let still = SystemDef::new("still", 0.5, 1, 1);
        let phi = MemoryArc::constant(&[1.0], 1.5).unwrap();
        let cfg = SimConfig { h: 1e-2, horizon_t: 3.0, ..SimConfig::default() };
        let sol = simulate(&still, &phi, &InputSignal::zero(1), &cfg).unwrap();
        assert_eq!(vhat(v, &sol, 2.5, 0).unwrap(), 1.0);
    }
}
