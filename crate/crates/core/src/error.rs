use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violated its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not symplectic: det = {det}")]
    NotSymplectic { det: f64 },

    /// Proportionality constant between two vanishing quadratic forms.
    #[error("indeterminate: {0}")]
    Indeterminate(String),

    #[error("no sign change of the stability indicator on [{a}, {b}]")]
    NoSignChange { a: f64, b: f64 },

    #[error("slice product did not converge below {tol} with {max_slices} slices (last deviation {deviation})")]
    NonConvergence {
        tol: f64,
        max_slices: usize,
        deviation: f64,
    },

    #[error("operation requires a {expected} monodromy, got {found}")]
    WrongRegime {
        expected: &'static str,
        found: &'static str,
    },

    /// Comb states built on different ladders cannot be paired.
    #[error("comb mismatch: {0}")]
    CombMismatch(String),

    #[error("profile parse error at line {line}: {reason}")]
    ProfileParse { line: usize, reason: String },

    #[error("config error at line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::NotSymplectic { .. } => "not_symplectic",
            Error::Indeterminate(_) => "indeterminate",
            Error::NoSignChange { .. } => "no_sign_change",
            Error::NonConvergence { .. } => "non_convergence",
            Error::WrongRegime { .. } => "wrong_regime",
            Error::CombMismatch(_) => "comb_mismatch",
            Error::ProfileParse { .. } => "profile_parse",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::NoSignChange { .. } | Error::Indeterminate(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
