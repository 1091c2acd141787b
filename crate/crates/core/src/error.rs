use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("segments {index} and {next} are not contiguous: {detail}")]
    Contiguity {
        index: usize,
        next: usize,
        detail: String,
    },
    #[error("domain anchor violated: {0}")]
    Anchor(String),
    #[error("segment {index} has t_lo {t_lo} > t_hi {t_hi}")]
    Order { index: usize, t_lo: f64, t_hi: f64 },
    #[error("({t}, {j}) is outside the domain")]
    OutOfDomain { t: f64, j: i64 },
    #[error("initial condition rejected: {0}")]
    BadInitial(String),
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },
    #[error("predicate does not bracket a boundary on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("flow map returned no candidates at ({t}, {j})")]
    EmptyFlowSet { t: f64, j: i64 },
    #[error("jump map returned no candidates at ({t}, {j})")]
    EmptyJumpSet { t: f64, j: i64 },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("argument outside its domain: {0}")]
    Domain(String),
    #[error("certificate schema: {0}")]
    Schema(String),
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
