use thiserror::Error;

pub type Result<T> = std::result::Result<T, PctcError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PctcError {
    #[error("capacity exceeded: {requested} qubits requested, limit is {limit}")]
    Capacity { requested: usize, limit: usize },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    /// The induced operator vanishes: no input survives the map.
    #[error("null evolution: induced operator has spectral norm {norm:.3e}")]
    NullEvolution { norm: f64 },

    /// A specific input is annihilated by the induced operator.
    #[error("paradox: {0}")]
    Paradox(String),

    #[error("measurement error: {0}")]
    Measurement(String),

    #[error("state set is linearly dependent (sigma_min/sigma_max = {ratio:.3e})")]
    DependentSet { ratio: f64 },

    #[error("{0} is prime; the factoring circuit needs a composite input")]
    PrimeInput(u64),

    #[error("fixed-point iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("header mismatch: {0}")]
    HeaderMismatch(String),
}

impl PctcError {
    /// Stable machine-readable identifier, used in structured CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            PctcError::Capacity { .. } => "capacity",
            PctcError::Layout(_) => "layout",
            PctcError::Dimension(_) => "dimension",
            PctcError::InvalidValue(_) => "invalid_value",
            PctcError::NullEvolution { .. } => "null_evolution",
            PctcError::Paradox(_) => "paradox",
            PctcError::Measurement(_) => "measurement",
            PctcError::DependentSet { .. } => "dependent_set",
            PctcError::PrimeInput(_) => "prime_input",
            PctcError::NonConvergence { .. } => "non_convergence",
            PctcError::Syntax { .. } => "syntax",
            PctcError::HeaderMismatch(_) => "header_mismatch",
        }
    }
}
