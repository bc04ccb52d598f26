use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("limit {limit} needs {bytes} bytes, above the memory budget of {budget} bytes")]
    LimitExceeded { limit: u64, bytes: u64, budget: u64 },

    #[error("integer overflow while computing {what}")]
    Overflow { what: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("table of length {have} is too short, need at least {need}")]
    TableTooShort { have: usize, need: usize },

    #[error("supplied derivative disagrees with finite differences at t = {at} (f' = {supplied}, estimate = {estimate})")]
    InconsistentDerivative {
        at: f64,
        supplied: f64,
        estimate: f64,
    },

    #[error("exponential-sum oracle lost precision: rounding distance {distance} for c_{r}({n})")]
    OracleRounding { r: u64, n: u64, distance: f64 },

    #[error("family '{family}' violates its declared bound |f(r)| <= {constant} r^-(1+{delta}) at r = {r}")]
    DecayViolation {
        family: String,
        constant: f64,
        delta: f64,
        r: u64,
    },

    #[error("(r, s) enumeration with rs <= {u} exceeds the cap {cap}; lower U or raise the cap")]
    CapExceeded { u: f64, cap: u64 },

    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),

    #[error("all residuals are zero: the prediction matches exactly")]
    ExactMatch,

    #[error("malformed table data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
