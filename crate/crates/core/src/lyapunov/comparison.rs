use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certificates::{CheckReport, ReportBuilder, Tolerance};
use crate::error::{Error, Result};

/// A scalar function `R≥0 → R≥0` used as a bound or gain.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ComparisonFunction {
    /// `k·v`
    Linear { k: f64 },
    /// `k·v^p`
    Power {
        p: f64,
        #[serde(default = "one")]
        k: f64,
    },
    /// `v / (1 + v)`
    Saturating,
    /// Piecewise-linear through `(v, f(v))` points, extended by the end slopes.
    Table { points: Vec<[f64; 2]> },
    #[serde(skip)]
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

fn one() -> f64 {
    1.0
}

impl fmt::Debug for ComparisonFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear { k } => write!(f, "Linear({k})"),
            Self::Power { p, k } => write!(f, "Power(k={k}, p={p})"),
            Self::Saturating => write!(f, "Saturating"),
            Self::Table { points } => write!(f, "Table({} points)", points.len()),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl ComparisonFunction {
    pub fn linear(k: f64) -> Self {
        Self::Linear { k }
    }

    pub fn power(k: f64, p: f64) -> Self {
        Self::Power { p, k }
    }

    pub fn zero() -> Self {
        Self::Linear { k: 0.0 }
    }

    pub fn custom(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom {
            name: name.to_string(),
            f: Arc::new(f),
        }
    }

    pub fn table(points: Vec<[f64; 2]>) -> Result<Self> {
        let f = Self::Table { points };
        f.validate()?;
        Ok(f)
    }

    /// Schema checks on the parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Linear { k } if !k.is_finite() => {
                Err(Error::Schema(format!("linear gain must be finite, got {k}")))
            }
            Self::Power { p, k } if !(p.is_finite() && *p > 0.0 && k.is_finite()) => Err(
                Error::Schema(format!("power form needs finite k and p > 0, got k={k}, p={p}")),
            ),
            Self::Table { points } => {
                if points.len() < 2 {
                    return Err(Error::Schema("table needs at least two points".into()));
                }
                for w in points.windows(2) {
                    if !(w[1][0] > w[0][0]) || !(w[1][1] >= w[0][1]) {
                        return Err(Error::Schema(
                            "table points must have increasing v and nondecreasing values".into(),
                        ));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        match self {
            Self::Linear { k } => k * v,
            Self::Power { p, k } => k * v.powf(*p),
            Self::Saturating => v / (1.0 + v),
            Self::Table { points } => table_eval(points, v),
            Self::Custom { f, .. } => f(v),
        }
    }
}

fn table_eval(points: &[[f64; 2]], v: f64) -> f64 {
    let n = points.len();
    let i = points.partition_point(|p| p[0] <= v).clamp(1, n - 1);
    let ([x0, y0], [x1, y1]) = (points[i - 1], points[i]);
    y0 + (y1 - y0) * (v - x0) / (x1 - x0)
}

/// Declared class of a comparison function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionClass {
    K,
    KInf,
    Pd,
    Nondecreasing,
}

/// Value that a `K∞` function must exceed at the top of the grid.
pub const UNBOUNDED_THRESHOLD: f64 = 10.0;

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// 121 log-spaced points on `[1e-6, 1e6]`.
pub fn default_gain_grid() -> Vec<f64> {
    log_grid(1e-6, 1e6, 121)
}

/// `0` followed by [`default_gain_grid`].
pub fn default_class_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend(default_gain_grid());
    g
}

/// Grid test of the declared class: zero at zero, positivity, strict or
/// weak monotonicity, and for `K∞` a value above [`UNBOUNDED_THRESHOLD`] at
/// the largest grid point.
pub fn validate_class(f: &ComparisonFunction, class: FunctionClass, grid: &[f64]) -> CheckReport {
    let mut b = ReportBuilder::new(&format!("{class:?}"), "class", Tolerance::new(0.0, 0.0));
    if grid.is_empty() {
        b.note("empty grid");
        return b.finish();
    }
    let vals: Vec<f64> = grid.iter().map(|&v| f.eval(v)).collect();
    let zero_at_zero = !matches!(class, FunctionClass::Nondecreasing);
    for (i, (&v, &fv)) in grid.iter().zip(&vals).enumerate() {
        b.sample();
        if !fv.is_finite() {
            b.fail(v, 0, "finite", fv, 0.0);
            continue;
        }
        b.test(v, 0, "nonnegative", -fv, 0.0);
        if v == 0.0 && zero_at_zero {
            b.test(v, 0, "zero at zero", fv.abs(), 0.0);
        }
        if v > 0.0 && zero_at_zero && fv <= 0.0 {
            b.fail(v, 0, "positive", 0.0, fv);
        }
        if i > 0 {
            let prev = vals[i - 1];
            match class {
                FunctionClass::K | FunctionClass::KInf => {
                    if fv <= prev {
                        b.fail(v, 0, "strictly increasing", prev, fv);
                    }
                }
                FunctionClass::Nondecreasing => {
                    b.test(v, 0, "nondecreasing", prev, fv);
                }
                FunctionClass::Pd => {}
            }
        }
    }
    if class == FunctionClass::KInf {
        let top = *vals.last().unwrap();
        if top <= UNBOUNDED_THRESHOLD {
            b.fail(*grid.last().unwrap(), 0, "unbounded", UNBOUNDED_THRESHOLD, top);
        }
    }
    b.finish()
}

/// `f(v) < v` at every grid point.
pub fn check_small_gain(f: &ComparisonFunction, grid: &[f64]) -> CheckReport {
    let mut b = ReportBuilder::new("small-gain", "small gain", Tolerance::new(0.0, 0.0));
    for &v in grid {
        b.sample();
        let fv = f.eval(v);
        if !(fv < v) {
            b.fail(v, 0, "f(v) < v", fv, v);
        }
    }
    b.finish()
}
