use serde::{Deserialize, Serialize};

use crate::case_studies::{Example1Params, Example2Params};
use crate::certificates::{KllBound, Tolerance, Variant};
use crate::error::{Error, Result};
use crate::lyapunov::{ComparisonFunction, PersistenceSpec};
use crate::system::SimConfig;

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn envelope_tol() -> f64 {
    1e-6
}

/// Which system to simulate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemChoice {
    /// The networked control loop; its certificate is wired in.
    Example1 {
        #[serde(default)]
        params: Example1Params,
    },
    /// An impulsive switched delay system with the regime it is claimed to
    /// be in (1, 2 or 3).
    Example2 {
        params: Example2Params,
        case: u8,
        /// Decay rate as a fraction of `λ̄` in regime 2.
        #[serde(default = "half")]
        lambda_scale: f64,
    },
    /// `ẋ = a x + b x(t - r) + u`, never jumps.
    ScalarLinear {
        a: f64,
        #[serde(default)]
        b: f64,
        #[serde(default)]
        r: f64,
        #[serde(default = "one")]
        delta: f64,
    },
    /// Never flows; `x⁺ = factor · x` forever.
    Halving {
        #[serde(default = "half")]
        factor: f64,
    },
    /// Both sets everywhere and `G` the identity, so jumps pile up at `t = 0`.
    Zeno,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Constant history; `depth` defaults to the system's `Δ`.
    Constant {
        value: Vec<f64>,
        #[serde(default)]
        depth: Option<f64>,
    },
    /// Random piecewise-linear history for the networked loop.
    Random {
        #[serde(default)]
        seed: u64,
        #[serde(default = "one")]
        radius: f64,
    },
    /// A memory arc in trajectory CSV form, relative to the config file.
    Sampled { path: String },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputSpec {
    #[default]
    Zero,
    Constant { value: Vec<f64> },
    /// `amplitude · sin(2π frequency t)` in every component.
    Sine { amplitude: f64, frequency: f64 },
    /// An input arc in trajectory CSV form, relative to the config file.
    Sampled { path: String },
}

/// Lyapunov candidate given in closed form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VConfig {
    /// `Σ wᵢ xᵢ²`.
    Quadratic { weights: Vec<f64> },
    /// `Σ wᵢ xᵢ²(0,0) + μ ∫_{-r}^0 Σ wᵢ xᵢ² ds`.
    QuadraticIntegral { weights: Vec<f64>, mu: f64, r: f64 },
}

/// Certificate block. With `wired`, the preset's own certificate is used
/// and every other field must be absent.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    #[serde(default)]
    pub wired: bool,
    pub variant: Option<Variant>,
    pub v: Option<VConfig>,
    pub alpha1: Option<ComparisonFunction>,
    pub alpha2: Option<ComparisonFunction>,
    pub alpha3: Option<ComparisonFunction>,
    pub decrease: Option<ComparisonFunction>,
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
    /// Tolerance of the jump and sandwich checks.
    pub tolerance: Option<Tolerance>,
    /// Tolerance of the derivative checks.
    pub derivative_tolerance: Option<Tolerance>,
    /// Also check that `V̄` never increases, at this tolerance.
    pub vbar_tol: Option<f64>,
}

impl CertificateConfig {
    pub(crate) fn only_wired(&self) -> bool {
        self.variant.is_none()
            && self.v.is_none()
            && [
                &self.alpha1,
                &self.alpha2,
                &self.alpha3,
                &self.decrease,
                &self.rho,
                &self.gamma1,
                &self.gamma2,
            ]
            .iter()
            .all(|f| f.is_none())
            && [self.lambda1, self.lambda2, self.mu, self.eps, self.lambda]
                .iter()
                .all(Option::is_none)
            && self.n0.is_none()
            && self.persistence.is_none()
    }
}

/// Decay and ISS envelopes checked along the solution. Constants left out
/// are taken from the certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvelopeConfig {
    /// `V(x) ≤ μ^j e^{-λ₁t} α₂(‖φ₀‖_W)`.
    Decay {
        mu: Option<f64>,
        lambda1: Option<f64>,
        alpha2: Option<ComparisonFunction>,
        #[serde(default = "envelope_tol")]
        tol: f64,
    },
    /// `e^{λt} V(φ) ≤ μ^j α₂(‖φ₀‖_W)`.
    Weighted {
        mu: Option<f64>,
        lambda: Option<f64>,
        alpha2: Option<ComparisonFunction>,
        #[serde(default = "envelope_tol")]
        tol: f64,
    },
    /// `V(φ) ≤ μ^j e^{λt} α₂(‖φ₀‖_W)`.
    Growth {
        mu: Option<f64>,
        lambda: Option<f64>,
        alpha2: Option<ComparisonFunction>,
        #[serde(default = "envelope_tol")]
        tol: f64,
    },
    /// `|x|_W ≤ max{β(‖φ₀‖_W, t, j), γ(‖u‖)}`.
    Iss {
        beta: KllBound,
        gamma: ComparisonFunction,
        #[serde(default = "envelope_tol")]
        tol: f64,
    },
}

/// A complete scenario: system, initial history, input, simulator settings,
/// certificate and envelopes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub system: SystemChoice,
    #[serde(default)]
    pub sim: SimConfig,
    pub initial: Option<InitialSpec>,
    #[serde(default)]
    pub input: InputSpec,
    pub certificate: Option<CertificateConfig>,
    #[serde(default)]
    pub envelopes: Vec<EnvelopeConfig>,
    /// Defaults to `out/<name>`.
    pub output_dir: Option<String>,
    /// Also write per-sample condition traces to `traces.csv`.
    #[serde(default)]
    pub trace_csv: bool,
}

impl ScenarioConfig {
    /// Parse and validate; syntax errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("{} at line {} column {}", e, e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if let Some(c) = &self.certificate {
            if c.wired && !c.only_wired() {
                return Err(Error::Config(
                    "a wired certificate takes only tolerance settings".into(),
                ));
            }
            if !c.wired && c.variant.is_none() {
                return Err(Error::Config("certificate needs `variant` or `wired`".into()));
            }
        }
        if let (Some(InitialSpec::Random { .. }), false) =
            (&self.initial, matches!(self.system, SystemChoice::Example1 { .. }))
        {
            return Err(Error::Config("random histories are only defined for example1".into()));
        }
        Ok(())
    }

    /// Apply a seed override to the simulator and to a random history.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sim.seed = seed;
        if let Some(InitialSpec::Random { seed: s, .. }) = &mut self.initial {
            *s = seed;
        }
        self
    }
}
