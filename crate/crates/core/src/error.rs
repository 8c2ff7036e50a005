use thiserror::Error;

/// Errors surfaced by state construction, channel propagation, optimization
/// and the CLI front end.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A scalar argument or field is outside its documented domain.
    #[error("{name} = {value} is outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    /// A structural constraint (feasibility, positivity, normalization) failed.
    #[error("constraint violated: {0}")]
    Constraint(String),
    /// A quantity whose definition divides by zero or is otherwise undefined.
    #[error("{0}")]
    Undefined(String),
    /// Numerical machinery failed to reach its accuracy target.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Malformed run configuration (bad flag value, missing key, ...).
    #[error("usage: {0}")]
    Usage(String),
    /// Output could not be written.
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 usage, 3 domain/constraint,
    /// 4 numerical, 5 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Domain { .. } | Error::Constraint(_) | Error::Undefined(_) => 3,
            Error::Numerical(_) => 4,
            Error::Io(_) => 5,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
