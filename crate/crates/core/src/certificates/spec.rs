use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid_time::Memory;
use crate::lyapunov::{
    ComparisonFunction, LyapunovFunctional, LyapunovState, PersistenceSpec, PersistenceTarget,
};
use crate::system::StateFn;

/// Which set of hypotheses a certificate claims.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Strict decrease in flow, small-gain contraction at jumps.
    ThmA,
    /// Strict decrease in flow and at jumps, measured by `ρ(|φ(0,0)|_W)`.
    ThmB,
    /// Persistent flow: neutral flow, strict jumps.
    PropC,
    /// Persistent jumps: strict flow, neutral jumps.
    PropD,
    /// Stable flow, destabilising jumps, average dwell time.
    ThmE,
    /// Unstable flow, stabilising jumps, reverse average dwell time.
    ThmF,
    /// Functional strictly decreasing in flow and at jumps.
    ThmG,
    /// Functional neutral in flow, strict at jumps, persistent flow.
    #[serde(rename = "PropG-flow")]
    PropGFlow,
    /// Functional strict in flow, neutral at jumps, persistent jumps.
    #[serde(rename = "PropG-jump")]
    PropGJump,
    /// Functional with delayed-growth flow bound and destabilising jumps.
    ThmH,
    /// Functional with unstable flow and stabilising jumps.
    ThmI,
}

impl Variant {
    pub const ALL: [Variant; 11] = [
        Variant::ThmA,
        Variant::ThmB,
        Variant::PropC,
        Variant::PropD,
        Variant::ThmE,
        Variant::ThmF,
        Variant::ThmG,
        Variant::PropGFlow,
        Variant::PropGJump,
        Variant::ThmH,
        Variant::ThmI,
    ];

    pub fn is_razumikhin(self) -> bool {
        matches!(
            self,
            Variant::ThmA | Variant::ThmB | Variant::PropC | Variant::PropD | Variant::ThmE | Variant::ThmF
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::ThmA => "ThmA",
            Variant::ThmB => "ThmB",
            Variant::PropC => "PropC",
            Variant::PropD => "PropD",
            Variant::ThmE => "ThmE",
            Variant::ThmF => "ThmF",
            Variant::ThmG => "ThmG",
            Variant::PropGFlow => "PropG-flow",
            Variant::PropGJump => "PropG-jump",
            Variant::ThmH => "ThmH",
            Variant::ThmI => "ThmI",
        }
    }

    fn required(self) -> &'static [Field] {
        use Field::*;
        match self {
            Variant::ThmA => &[VState, Alpha1, Alpha2, Alpha3, Rho, Gamma1, Gamma2],
            Variant::ThmB => &[VState, Alpha1, Alpha2, Decrease, Gamma1, Gamma2],
            Variant::PropC | Variant::PropD => {
                &[VState, Alpha1, Alpha2, Decrease, Gamma1, Gamma2, Persistence]
            }
            Variant::ThmE | Variant::ThmF => {
                &[VState, Alpha1, Alpha2, Gamma1, Gamma2, Lambda1, Mu, Eps, N0]
            }
            Variant::ThmG => &[VFunc, Alpha1, Alpha2, Decrease, Rho],
            Variant::PropGFlow | Variant::PropGJump => {
                &[VFunc, Alpha1, Alpha2, Decrease, Rho, Persistence]
            }
            Variant::ThmH => &[VFunc, Alpha1, Alpha2, Rho, Lambda1, Lambda2, Mu, Eps, N0, Lambda],
            Variant::ThmI => &[VFunc, Alpha1, Alpha2, Rho, Lambda1, Lambda2, Mu, Eps, N0],
        }
    }

    fn persistence_target(self) -> Option<PersistenceTarget> {
        match self {
            Variant::PropC | Variant::PropGFlow => Some(PersistenceTarget::Flow),
            Variant::PropD | Variant::PropGJump => Some(PersistenceTarget::Jump),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    VState,
    VFunc,
    Alpha1,
    Alpha2,
    Alpha3,
    Decrease,
    Rho,
    Gamma1,
    Gamma2,
    Lambda1,
    Lambda2,
    Mu,
    Eps,
    N0,
    Lambda,
    Persistence,
}

impl Field {
    const ALL: [Field; 16] = [
        Field::VState,
        Field::VFunc,
        Field::Alpha1,
        Field::Alpha2,
        Field::Alpha3,
        Field::Decrease,
        Field::Rho,
        Field::Gamma1,
        Field::Gamma2,
        Field::Lambda1,
        Field::Lambda2,
        Field::Mu,
        Field::Eps,
        Field::N0,
        Field::Lambda,
        Field::Persistence,
    ];

    fn name(self) -> &'static str {
        match self {
            Field::VState => "v_state",
            Field::VFunc => "v_func",
            Field::Alpha1 => "alpha1",
            Field::Alpha2 => "alpha2",
            Field::Alpha3 => "alpha3",
            Field::Decrease => "decrease",
            Field::Rho => "rho",
            Field::Gamma1 => "gamma1",
            Field::Gamma2 => "gamma2",
            Field::Lambda1 => "lambda1",
            Field::Lambda2 => "lambda2",
            Field::Mu => "mu",
            Field::Eps => "eps",
            Field::N0 => "n0",
            Field::Lambda => "lambda",
            Field::Persistence => "persistence",
        }
    }
}

/// A bound applied either to the distance `|x|_W` or directly to the state.
#[derive(Clone)]
pub enum Gauge {
    /// `α(|x|_W)`; on a memory arc, `α(‖φ‖_W)`.
    OfDistance(ComparisonFunction),
    /// `α(x)`; on a memory arc, the sup over the window.
    OfState { name: String, f: StateFn },
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gauge::OfDistance(c) => write!(f, "OfDistance({c:?})"),
            Gauge::OfState { name, .. } => write!(f, "OfState({name})"),
        }
    }
}

impl From<ComparisonFunction> for Gauge {
    fn from(c: ComparisonFunction) -> Self {
        Gauge::OfDistance(c)
    }
}

impl Gauge {
    pub fn of_state(name: &str, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Gauge::OfState {
            name: name.to_string(),
            f: std::sync::Arc::new(f),
        }
    }

    /// Value at a single state.
    pub fn at_state(&self, x: &[f64], dist_w: &dyn Fn(&[f64]) -> f64) -> f64 {
        match self {
            Gauge::OfDistance(c) => c.eval(dist_w(x)),
            Gauge::OfState { f, .. } => f(x),
        }
    }

    /// Value on a whole window, given its precomputed `‖φ‖_W` for the
    /// distance form.
    pub fn on_window(&self, m: &Memory<'_>, sup_dist: f64) -> f64 {
        match self {
            Gauge::OfDistance(c) => c.eval(sup_dist),
            Gauge::OfState { f, .. } => m.sup_over(|x| f(x)),
        }
    }

    /// Value on a value-level argument (`‖φ‖_W`), for the distance form only.
    pub fn comparison(&self) -> Option<&ComparisonFunction> {
        match self {
            Gauge::OfDistance(c) => Some(c),
            Gauge::OfState { .. } => None,
        }
    }
}

/// A Lyapunov candidate with its comparison functions and constants.
///
/// `decrease` holds the state-dependent decrease bound: `ρ(|φ(0,0)|_W)` in
/// the Razumikhin variants B, C, D and `α₃(|φ(0,0)|_W)` in the functional
/// variants G. `alpha3` is the decrease on `V` itself used by variant A.
/// `rho` is the jump contraction `ρ(V̄)` for A and the input trigger
/// `ρ(|u|)` for the functional variants.
#[derive(Clone)]
pub struct CertificateSpec {
    pub variant: Variant,
    /// `|x|_W`, Euclidean norm unless set.
    pub dist_w: StateFn,
    pub v_state: Option<LyapunovState>,
    pub v_func: Option<LyapunovFunctional>,
    pub alpha1: Option<Gauge>,
    pub alpha2: Option<Gauge>,
    pub alpha3: Option<ComparisonFunction>,
    pub decrease: Option<Gauge>,
    pub rho: Option<ComparisonFunction>,
    pub gamma1: Option<ComparisonFunction>,
    pub gamma2: Option<ComparisonFunction>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub mu: Option<f64>,
    pub eps: Option<f64>,
    pub n0: Option<u32>,
    pub lambda: Option<f64>,
    pub persistence: Option<PersistenceSpec>,
}

impl fmt::Debug for CertificateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CertificateSpec")
            .field("variant", &self.variant)
            .field("alpha1", &self.alpha1)
            .field("alpha2", &self.alpha2)
            .field("alpha3", &self.alpha3)
            .field("decrease", &self.decrease)
            .field("rho", &self.rho)
            .field("gamma1", &self.gamma1)
            .field("gamma2", &self.gamma2)
            .field("lambda1", &self.lambda1)
            .field("lambda2", &self.lambda2)
            .field("mu", &self.mu)
            .field("eps", &self.eps)
            .field("n0", &self.n0)
            .field("lambda", &self.lambda)
            .field("persistence", &self.persistence)
            .finish_non_exhaustive()
    }
}

fn missing(variant: Variant, what: &str) -> Error {
    Error::Schema(format!("{variant} requires `{what}`"))
}

impl CertificateSpec {
    /// An empty spec for `variant`; fill the fields then call [`validate`](Self::validate).
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            dist_w: std::sync::Arc::new(crate::system::euclid),
            v_state: None,
            v_func: None,
            alpha1: None,
            alpha2: None,
            alpha3: None,
            decrease: None,
            rho: None,
            gamma1: None,
            gamma2: None,
            lambda1: None,
            lambda2: None,
            mu: None,
            eps: None,
            n0: None,
            lambda: None,
            persistence: None,
        }
    }

    fn has(&self, f: Field) -> bool {
        match f {
            Field::VState => self.v_state.is_some(),
            Field::VFunc => self.v_func.is_some(),
            Field::Alpha1 => self.alpha1.is_some(),
            Field::Alpha2 => self.alpha2.is_some(),
            Field::Alpha3 => self.alpha3.is_some(),
            Field::Decrease => self.decrease.is_some(),
            Field::Rho => self.rho.is_some(),
            Field::Gamma1 => self.gamma1.is_some(),
            Field::Gamma2 => self.gamma2.is_some(),
            Field::Lambda1 => self.lambda1.is_some(),
            Field::Lambda2 => self.lambda2.is_some(),
            Field::Mu => self.mu.is_some(),
            Field::Eps => self.eps.is_some(),
            Field::N0 => self.n0.is_some(),
            Field::Lambda => self.lambda.is_some(),
            Field::Persistence => self.persistence.is_some(),
        }
    }

    /// Enforce the per-variant schema and constant signs.
    pub fn validate(&self) -> Result<()> {
        let v = self.variant;
        let req = v.required();
        for f in Field::ALL {
            match (req.contains(&f), self.has(f)) {
                (true, false) => return Err(missing(v, f.name())),
                (false, true) => {
                    return Err(Error::Schema(format!("{v} does not take `{}`", f.name())))
                }
                _ => {}
            }
        }
        for c in [&self.alpha3, &self.rho, &self.gamma1, &self.gamma2].into_iter().flatten() {
            c.validate()?;
        }
        for g in [&self.alpha1, &self.alpha2, &self.decrease].into_iter().flatten() {
            if let Gauge::OfDistance(c) = g {
                c.validate()?;
            }
        }
        let sign = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Schema(format!("{v}: {what}")))
            }
        };
        let l1 = self.lambda1.unwrap_or(0.0);
        let l2 = self.lambda2.unwrap_or(0.0);
        let mu = self.mu.unwrap_or(1.0);
        match v {
            Variant::ThmE => sign(l1 > 0.0 && mu >= 1.0, "needs λ₁ > 0 and μ ≥ 1")?,
            Variant::ThmF => sign(l1 > 0.0 && mu > 0.0 && mu < 1.0, "needs λ₁ > 0 and μ in (0, 1)")?,
            Variant::ThmH => sign(l1 > l2 && l2 >= 0.0 && mu > 1.0, "needs λ₁ > λ₂ ≥ 0 and μ > 1")?,
            Variant::ThmI => sign(
                l1 >= 0.0 && l2 >= 0.0 && mu > 0.0 && mu < 1.0,
                "needs λ₁, λ₂ ≥ 0 and μ in (0, 1)",
            )?,
            _ => {}
        }
        if let Some(e) = self.eps {
            sign(e > 0.0, "needs ε > 0")?;
        }
        if let Some(n) = self.n0 {
            sign(n >= 1, "needs N₀ ≥ 1")?;
        }
        if let (Some(p), Some(t)) = (&self.persistence, v.persistence_target()) {
            sign(p.target == t, "persistence target does not match the variant")?;
            sign(p.n_delta > 0.0, "needs N_δ > 0")?;
        }
        Ok(())
    }

    pub(crate) fn v_state(&self) -> Result<&LyapunovState> {
        self.v_state.as_ref().ok_or_else(|| missing(self.variant, "v_state"))
    }

    pub(crate) fn v_func(&self) -> Result<&LyapunovFunctional> {
        self.v_func.as_ref().ok_or_else(|| missing(self.variant, "v_func"))
    }

    pub(crate) fn req<'a, T>(&self, x: &'a Option<T>, what: &str) -> Result<&'a T> {
        x.as_ref().ok_or_else(|| missing(self.variant, what))
    }

    pub(crate) fn num(&self, x: Option<f64>, what: &str) -> Result<f64> {
        x.ok_or_else(|| missing(self.variant, what))
    }
}
