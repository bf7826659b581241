use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by the spectral substrate, the solvers and the
/// experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size {0} is invalid: need an even sample count of at least 8")]
    InvalidGrid(usize),

    #[error("field has mean {mean:e}, exceeding tolerance {tol:e}")]
    NonZeroMean { mean: f64, tol: f64 },

    #[error("density minimum {min:e} is below the positivity floor {floor:e}")]
    VacuumBreach { min: f64, floor: f64 },

    #[error("velocity integral {mean:e} is nonzero: phase does not close around the torus")]
    NonZeroWinding { mean: f64 },

    #[error("Poisson source has mean {mean:e}; density and doping masses differ")]
    IncompatibleSource { mean: f64 },

    #[error("densities carry different masses ({first:e} vs {second:e})")]
    MassMismatch { first: f64, second: f64 },

    #[error("fixed point did not converge in {iterations} iterations (last update {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("field norm grew by a factor {growth:e}; time step violates stability")]
    StepUnstable { growth: f64 },

    #[error("only {stored} stored states; at least {required} are needed")]
    InsufficientCadence { stored: usize, required: usize },

    #[error("functional is not monotone for any scanned c1")]
    NotInDecayRegime,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o failure: {0}")]
    Io(String),

    #[error("at t = {t}: {source}")]
    AtTime { t: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn at(self, t: f64) -> Error {
        match self {
            Error::AtTime { .. } => self,
            other => Error::AtTime {
                t,
                source: Box::new(other),
            },
        }
    }

    /// The underlying error with any time stamp stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } => source.root(),
            other => other,
        }
    }

    /// Solver errors map to exit code 2 in the CLI; everything else is a
    /// usage or environment problem.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self.root(),
            Error::VacuumBreach { .. }
                | Error::NonZeroWinding { .. }
                | Error::IncompatibleSource { .. }
                | Error::NoConvergence { .. }
                | Error::StepUnstable { .. }
                | Error::NonZeroMean { .. }
                | Error::MassMismatch { .. }
                | Error::InsufficientCadence { .. }
                | Error::NotInDecayRegime
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
