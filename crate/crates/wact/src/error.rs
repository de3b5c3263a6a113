use std::path::PathBuf;

use wact_core::classify::ClassifyError;
use wact_core::deform::DeformError;
use wact_core::expr::ParseError;
use wact_core::structure::StructureError;

use crate::file::parse_position;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Format(String),
    #[error("{location}: {source}")]
    Expression {
        location: String,
        #[source]
        source: ParseError,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_MATH: u8 = 2;

impl CliError {
    /// Input problems exit 1, mathematical failures exit 2.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. }
            | CliError::Json(_)
            | CliError::Format(_)
            | CliError::Expression { .. }
            | CliError::Usage(_) => EXIT_USAGE,
            CliError::Structure(e) | CliError::Deform(DeformError::ValidationFailed(e)) => structure_exit(e),
            CliError::Classify(ClassifyError::UnknownCheckId(_)) => EXIT_USAGE,
            CliError::Classify(ClassifyError::Structure(e)) => structure_exit(e),
            CliError::Deform(DeformError::BadParameters { .. }) => EXIT_USAGE,
            CliError::Deform(_) | CliError::Classify(_) => EXIT_MATH,
        }
    }

    /// Variant name printed on stderr for mathematical failures.
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "IoError",
            CliError::Json(_) | CliError::Format(_) => "FormatError",
            CliError::Expression { .. } => "ParseError",
            CliError::Usage(_) => "UsageError",
            CliError::Structure(e) => structure_name(e),
            CliError::Classify(ClassifyError::UnknownCheckId(_)) => "UnknownCheckId",
            CliError::Classify(ClassifyError::Structure(e)) => structure_name(e),
            CliError::Classify(ClassifyError::Evaluation { .. }) => "EvaluationError",
            CliError::Deform(e) => match e {
                DeformError::BadParameters { .. } => "BadParameters",
                DeformError::NotWeakSasakian { .. } => "NotWeakSasakian",
                DeformError::RigidityInconsistency { .. } => "RigidityInconsistency",
                DeformError::RankDeficient { .. } => "RankDeficient",
                DeformError::NotParallel { .. } => "NotParallel",
                DeformError::NotCompatible { .. } => "NotCompatible",
                DeformError::ValidationFailed(_) => "ValidationFailed",
                DeformError::NotContactMetric { .. } => "NotContactMetric",
                DeformError::Chart(_) | DeformError::ChartMismatch { .. } => "ChartMismatch",
                DeformError::Evaluation { .. } => "EvaluationError",
                DeformError::Classify(_) => "ClassifyError",
            },
        }
    }

    /// Character position of a parse failure, if any.
    pub fn position(&self) -> Option<usize> {
        match self {
            CliError::Expression { source, .. } => parse_position(source),
            _ => None,
        }
    }
}

fn structure_exit(e: &StructureError) -> u8 {
    match e {
        StructureError::AxiomViolation { .. } | StructureError::Evaluation { .. } => EXIT_MATH,
        _ => EXIT_USAGE,
    }
}

fn structure_name(e: &StructureError) -> &'static str {
    match e {
        StructureError::WrongValence { .. } => "WrongValence",
        StructureError::ChartMismatch(_) => "ChartMismatch",
        StructureError::MissingNu => "MissingNu",
        StructureError::Evaluation { .. } => "EvaluationError",
        StructureError::AxiomViolation { .. } => "AxiomViolation",
    }
}
