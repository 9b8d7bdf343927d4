use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuinError {
    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("{what} did not converge within {iterations} iterations")]
    MaxIterations {
        what: &'static str,
        iterations: usize,
    },
    #[error("invalid proportions: {0}")]
    InvalidProportions(String),
    #[error("argument {value} outside the domain ({lower}, {upper})")]
    OutOfDomain { value: f64, lower: f64, upper: f64 },
    #[error("no adjustment coefficient: {0}")]
    NoAdjustment(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("no conjugate shift above {0}")]
    NoConjugate(f64),
    #[error("unsupported driver: {0}")]
    UnsupportedDriver(String),
    #[error("velocity {v} is at the boundary velocity {boundary}")]
    BoundaryVelocity { v: f64, boundary: f64 },
    #[error("ray slope {a} is on the cone boundary {boundary}")]
    BoundaryRay { a: f64, boundary: f64 },
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error("only {got} conditioned samples, need at least {need}")]
    InsufficientConditionedSamples { got: usize, need: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("cross-check failed: {0}")]
    CrossCheck(String),
}

impl RuinError {
    /// True for refusals that come from the input lying on an excluded boundary
    /// or outside the regime of a formula, as opposed to a malformed model.
    pub fn is_numerical_refusal(&self) -> bool {
        !matches!(
            self,
            RuinError::InvalidProportions(_)
                | RuinError::InvalidModel(_)
                | RuinError::InvalidConfig(_)
                | RuinError::InvalidHorizon(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, RuinError>;
