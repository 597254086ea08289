use thiserror::Error;

use crate::report::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty point set")]
    EmptySpace,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("unknown group element {0:?}")]
    UnknownElement(String),
    #[error("not a permutation: {0}")]
    NotAPermutation(String),
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("group closure exceeded the order cap of {cap}")]
    OrderCapExceeded { cap: usize },
    #[error("invalid metric:\n{0}")]
    InvalidMetric(ValidationReport),
    #[error("invalid group:\n{0}")]
    InvalidGroup(ValidationReport),
    #[error("invalid action:\n{0}")]
    InvalidAction(ValidationReport),
    #[error("not invariant:\n{0}")]
    NotInvariant(ValidationReport),
    #[error("not equivariant:\n{0}")]
    NotEquivariant(ValidationReport),
    #[error("molecule coefficients sum to {0}, expected 0")]
    NonZeroSum(String),
    #[error("basepoint {0:?} is not fixed by the group")]
    BasepointNotFixed(String),
    #[error("basepoint mismatch: {0}")]
    BasepointMismatch(String),
    #[error("invalid adjoined distance: {0}")]
    InvalidAdjoinedDistance(String),
    #[error("pseudometric order violated at ({x},{y}): {detail}")]
    OrderViolation {
        x: String,
        y: String,
        detail: String,
    },
    #[error("zero set of the pseudometric is not transitive: {0} and {1} share a class at positive distance")]
    InconsistentZeroSet(String, String),
    #[error("quotient is ill-defined:\n{0}")]
    IllDefinedQuotient(ValidationReport),
    #[error("oracle cap exceeded: {0}")]
    OracleCapExceeded(String),
    #[error("join closure exceeded the family cap of {cap}")]
    JoinCapExceeded { cap: usize },
    #[error("empty pseudometric family")]
    EmptyFamily,
    #[error("invalid radius {0}: radii must be positive")]
    InvalidRadius(String),
    #[error("inverse system failed verification:\n{0}")]
    VerificationFailed(ValidationReport),
    #[error("instance document failed validation:\n{0}")]
    InvalidInstance(ValidationReport),
    #[error("refusing to export an unverified inverse system")]
    Unverified,
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Field {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Wraps an error with the document field it came from.
    pub fn in_field(self, field: impl Into<String>) -> Self {
        match self {
            Error::Field {
                field: inner,
                message,
            } => Error::Field {
                field: format!("{}.{inner}", field.into()),
                message,
            },
            other => Error::Field {
                field: field.into(),
                message: other.to_string(),
            },
        }
    }
}

impl Error {
    /// A stable machine-readable name for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptySpace => "empty_space",
            Error::Dimension(_) => "dimension",
            Error::UnknownPoint(_) => "unknown_point",
            Error::UnknownElement(_) => "unknown_element",
            Error::NotAPermutation(_) => "not_a_permutation",
            Error::GroupMismatch(_) => "group_mismatch",
            Error::OrderCapExceeded { .. } => "order_cap_exceeded",
            Error::InvalidMetric(_) => "invalid_metric",
            Error::InvalidGroup(_) => "invalid_group",
            Error::InvalidAction(_) => "invalid_action",
            Error::NotInvariant(_) => "not_invariant",
            Error::NotEquivariant(_) => "not_equivariant",
            Error::NonZeroSum(_) => "nonzero_sum",
            Error::BasepointNotFixed(_) => "basepoint_not_fixed",
            Error::BasepointMismatch(_) => "basepoint_mismatch",
            Error::InvalidAdjoinedDistance(_) => "invalid_adjoined_distance",
            Error::OrderViolation { .. } => "order_violation",
            Error::InconsistentZeroSet(..) => "inconsistent_zero_set",
            Error::IllDefinedQuotient(_) => "ill_defined_quotient",
            Error::OracleCapExceeded(_) => "oracle_cap_exceeded",
            Error::JoinCapExceeded { .. } => "join_cap_exceeded",
            Error::EmptyFamily => "empty_family",
            Error::InvalidRadius(_) => "invalid_radius",
            Error::VerificationFailed(_) => "verification_failed",
            Error::InvalidInstance(_) => "invalid_instance",
            Error::Unverified => "unverified",
            Error::Field { .. } => "field",
            Error::Parse { .. } => "parse",
        }
    }

    /// The violation report carried by axiom-level failures.
    pub fn report(&self) -> Option<&ValidationReport> {
        match self {
            Error::InvalidMetric(r)
            | Error::InvalidGroup(r)
            | Error::InvalidAction(r)
            | Error::NotInvariant(r)
            | Error::NotEquivariant(r)
            | Error::IllDefinedQuotient(r)
            | Error::VerificationFailed(r)
            | Error::InvalidInstance(r) => Some(r),
            _ => None,
        }
    }
}
