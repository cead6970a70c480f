use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violates an operation's precondition.
    #[error("invalid input: {0}")]
    Precondition(String),

    #[error("invalid quantum number n = {0}: must be >= 1")]
    InvalidQuantumNumber(i64),

    #[error("beyond perturbative regime: 6 q^2 nbar^2 = {value:.6} >= 1 (q^2 = {q_squared}, nbar = {n_bar})")]
    BeyondPerturbative { q_squared: f64, n_bar: u32, value: f64 },

    #[error("truncation failure: basis reached n_max_cap = {n_max_cap} with captured norm {achieved:.9} (target {target:.9})")]
    Truncation { n_max_cap: u32, achieved: f64, target: f64 },

    #[error("momentum grid does not cover [-{required:.3}, {required:.3}] (grid extent {available:.3})")]
    Coverage { required: f64, available: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("row {row} of the density field has zero norm")]
    ZeroNorm { row: usize },

    #[error("no super revival: q^2 = 0 leaves the super-revival clocks undefined")]
    NoSuperRevival,

    /// A computed field failed one of its own consistency checks.
    #[error("numerical contract violated: {0}")]
    Contract(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by a failed numerical check.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Precondition(_)
                | Error::InvalidQuantumNumber(_)
                | Error::BeyondPerturbative { .. }
                | Error::Coverage { .. }
                | Error::NoSuperRevival
        )
    }
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
