use thiserror::Error;

/// Errors produced anywhere in the crate. Messages are prefixed with the
/// subsystem that raised them so they read well when surfaced by the CLI.
#[derive(Debug, Error)]
pub enum IpodError {
    #[error("parameter `{name}` is out of range, got {value}")]
    ParameterDomain { name: &'static str, value: f64 },

    #[error("{context}: dimension mismatch, expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("threshold: the L0 penalty variant is not defined for the {0} rule")]
    UnsupportedVariant(&'static str),

    #[error("regress: design is rank deficient at column {column}")]
    SingularDesign { column: usize },

    #[error("regress: need n > p, got n = {n}, p = {p}")]
    TooFewCases { n: usize, p: usize },

    #[error("pilot: residual scale is degenerate (all residuals equal)")]
    DegenerateScale,

    #[error("pilot: {0}")]
    Pilot(String),

    #[error("tune: residual sum of squares is zero, the fit is saturated")]
    SaturatedFit,

    #[error("tune: {0}")]
    Tuning(String),

    #[error("{context}: {message}")]
    Domain { context: &'static str, message: String },

    #[error("mest: weighted least squares is singular ({positive} positive weights for {p} coefficients)")]
    SingularWls { positive: usize, p: usize },

    #[error("mest: scale equation has no positive solution (cn - lambda^2 |O| = {0})")]
    ScaleCollapse(f64),

    #[error("data: row {row}, column {column}: {message}")]
    Ingest {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("data: {0}")]
    Data(String),

    #[error(transparent)]
    Csv(csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, IpodError>;

pub(crate) fn domain(context: &'static str, message: impl Into<String>) -> IpodError {
    IpodError::Domain {
        context,
        message: message.into(),
    }
}

impl From<csv::Error> for IpodError {
    /// Write and read failures surface as `Io` so callers can inspect the kind.
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(io) => IpodError::Io(io),
                _ => unreachable!("is_io_error checked the kind"),
            }
        } else {
            IpodError::Csv(err)
        }
    }
}
