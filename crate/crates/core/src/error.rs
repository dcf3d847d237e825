use thiserror::Error;

use crate::kinematics::LegId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid joint offsets: {0}")]
    InvalidOffsets(String),

    #[error("unsupported assembly mode ({sx}, {sy}, {sz}); only (+1, +1, +1) is supported")]
    UnsupportedAssembly { sx: i8, sy: i8, sz: i8 },

    #[error("point unreachable along {axis} axis: radicand {radicand:e}")]
    Unreachable { axis: LegId, radicand: f64 },

    #[error("actuated coordinate of {0} axis is zero")]
    SingularAxis(LegId),

    #[error("joint values cannot be assembled: discriminant {discriminant:e}")]
    Unassemblable { discriminant: f64 },

    #[error("singular posture: {0} leg is perpendicular to its actuator axis")]
    SingularPosture(LegId),

    #[error("incomplete session, missing or unbalanced: {}", .missing.join(", "))]
    IncompleteSession { missing: Vec<String> },

    #[error("schema error{}: {message}", .line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Schema {
        line: Option<usize>,
        message: String,
    },

    #[error("unit error: expected \"mm\", found {0:?}")]
    Unit(String),

    #[error("form mismatch: expected {expected}, found {found}")]
    FormMismatch { expected: String, found: String },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn schema(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Schema {
            line,
            message: message.into(),
        }
    }

    /// Short machine-readable class name.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidGeometry(_)
            | Error::InvalidOffsets(_)
            | Error::UnsupportedAssembly { .. }
            | Error::InvalidArgument(_) => "config",
            Error::Unreachable { .. }
            | Error::SingularAxis(_)
            | Error::Unassemblable { .. }
            | Error::SingularPosture(_) => "kinematics",
            Error::DegenerateGeometry(_) => "degenerate-geometry",
            Error::IncompleteSession { .. } => "incomplete-session",
            Error::Schema { .. } | Error::Unit(_) => "schema",
            Error::FormMismatch { .. } => "form-mismatch",
            Error::EmptyInput => "empty-input",
            Error::Io(_) => "io",
        }
    }
}
