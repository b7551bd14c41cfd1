//! Process exit codes.
//!
//! | code | meaning                                                        |
//! |------|----------------------------------------------------------------|
//! | 0    | success                                                        |
//! | 1    | unclassified failure                                           |
//! | 2    | bad command line (reported by the argument parser)             |
//! | 3    | unreadable or malformed input: I/O, parse, format, empty input |
//! | 4    | checkpoint rejected: corrupt or unsupported version            |
//! | 5    | invalid model or configuration                                 |
//! | 6    | numerical failure during fitting or extraction                 |
//! | 7    | memory budget exceeded                                         |

use patchwork_core::Error;

pub const OK: u8 = 0;
pub const FAILURE: u8 = 1;
pub const USAGE: u8 = 2;
pub const INPUT: u8 = 3;
pub const CHECKPOINT: u8 = 4;
pub const INVALID: u8 = 5;
pub const NUMERICAL: u8 = 6;
pub const MEMORY: u8 = 7;

pub fn code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_)
        | Error::Json(_)
        | Error::Parse { .. }
        | Error::UnsupportedFormat(_)
        | Error::EmptyInput(_)
        | Error::DegenerateMesh(_)
        | Error::DegenerateBBox
        | Error::UnknownShape(_) => INPUT,
        Error::VersionMismatch { .. } | Error::CorruptCheckpoint(_) => CHECKPOINT,
        Error::DimensionMismatch { .. }
        | Error::NonFiniteParameter { .. }
        | Error::InvalidModel(_)
        | Error::InvalidConfig(_)
        | Error::NonUnitNormal { .. } => INVALID,
        Error::DegenerateGradient { .. }
        | Error::NonFiniteGradient
        | Error::TooManySkippedSteps(_)
        | Error::NumericalDegeneracy(_) => NUMERICAL,
        Error::MemoryBudgetExceeded { .. } => MEMORY,
    }
}

/// Walks the context chain for a library error; plain I/O errors raised
/// by the tool itself count as input errors.
pub fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return code_for(e);
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return INPUT;
        }
    }
    FAILURE
}
