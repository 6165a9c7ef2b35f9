//! Coarse error classes, shared by the CLI exit codes and the C API status
//! codes.

use crate::milp::SolverError;
use crate::pipeline::PipelineError;
use crate::report::ReportError;
use crate::scenario::ScenarioError;
use crate::twin::TwinError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ErrorKind {
    Other = 1,
    Usage = 2,
    /// A file is missing or unreadable.
    Io = 3,
    /// A scenario or artifact is malformed.
    Parse = 4,
    Validation = 5,
    /// The solver or a pipeline stage failed.
    Stage = 6,
    /// Wrong run mode or mismatched scenario families.
    Mismatch = 7,
    MissingMetric = 8,
}

impl ErrorKind {
    pub fn code(self) -> u8 {
        self as u8
    }
}

pub trait Classify {
    fn kind(&self) -> ErrorKind;
}

impl Classify for ScenarioError {
    fn kind(&self) -> ErrorKind {
        match self {
            ScenarioError::Io { .. } => ErrorKind::Io,
            ScenarioError::Parse { .. } => ErrorKind::Parse,
            ScenarioError::Validation(_) => ErrorKind::Validation,
            ScenarioError::Compile(_) => ErrorKind::Stage,
        }
    }
}

impl Classify for PipelineError {
    fn kind(&self) -> ErrorKind {
        match self {
            PipelineError::Invalid(_) => ErrorKind::Validation,
            PipelineError::Stage { .. } | PipelineError::MissingArtifacts(_) => ErrorKind::Stage,
            PipelineError::ModeUnsupported(_) | PipelineError::ModeMismatch { .. } | PipelineError::FamilyMismatch(..) => {
                ErrorKind::Mismatch
            }
        }
    }
}

impl Classify for ReportError {
    fn kind(&self) -> ErrorKind {
        match self {
            ReportError::Io { .. } => ErrorKind::Io,
            ReportError::Json { .. } => ErrorKind::Parse,
            ReportError::MissingMetric(_) => ErrorKind::MissingMetric,
            ReportError::Pipeline(p) => p.kind(),
            ReportError::Csv(_) => ErrorKind::Other,
        }
    }
}

impl Classify for TwinError {
    fn kind(&self) -> ErrorKind {
        match self {
            TwinError::NoGraph | TwinError::NoSensors | TwinError::NoFacility | TwinError::NoCalibration => {
                ErrorKind::Validation
            }
            TwinError::Unreachable { .. } | TwinError::Carbon(_) => ErrorKind::Stage,
        }
    }
}

impl Classify for SolverError {
    fn kind(&self) -> ErrorKind {
        ErrorKind::Validation
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_stable() {
        assert_eq!(ErrorKind::Io.code(), 3);
        assert_eq!(ErrorKind::MissingMetric.code(), 8);
        assert_eq!(ReportError::MissingMetric("x".into()).kind(), ErrorKind::MissingMetric);
    }
}
