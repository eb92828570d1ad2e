use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPositive { eigenvalue: f64 },

    #[error("density matrix trace is {trace:.15} instead of 1")]
    TraceNotUnit { trace: f64 },

    #[error("survival amplitude |G| = {modulus:.12} exceeds 1")]
    UnphysicalAmplitude { modulus: f64 },

    #[error("state amplitudes not normalized (a^2 + b^2 = {norm:.15})")]
    NotNormalized { norm: f64 },

    #[error("state does not have the expected X structure: {0}")]
    Structure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient oscillation: found {found} local maxima, need at least {needed}")]
    InsufficientOscillation { found: usize, needed: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("scenario '{scenario}': {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attaches the scenario name to an error raised while running it.
    pub fn in_scenario(self, scenario: &str) -> Self {
        Error::Scenario {
            scenario: scenario.to_string(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping scenario context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Scenario { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures that come from the numerics rather than from user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::NotHermitian { .. }
                | Error::NotPositive { .. }
                | Error::TraceNotUnit { .. }
                | Error::UnphysicalAmplitude { .. }
                | Error::Numerical(_)
                | Error::InsufficientOscillation { .. }
        )
    }
}
