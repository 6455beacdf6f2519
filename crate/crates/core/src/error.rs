use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of a function.
    #[error("{function}: argument {value} outside domain ({expected})")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The test and the asymptote only exist above the phase boundary.
    #[error("phi = {phi} is not above the phase boundary: the test requires phi > 1")]
    PhaseBoundary { phi: f64 },

    #[error("need at least {required} observations, got {got}")]
    TooFewObservations { required: usize, got: usize },

    #[error("observation {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid hyperparameter {name} = {value}: must be positive and finite")]
    Hyperparameter { name: &'static str, value: f64 },

    #[error("invalid mixture parameters a = {a}, b = {b}")]
    MixtureParams { a: f64, b: f64 },

    #[error("responsibilities have length {got}, sample has {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid solver configuration: {0}")]
    Config(&'static str),

    #[error("grid oracle limited to n <= {max}, got n = {got}")]
    OracleSize { max: usize, got: usize },
}
