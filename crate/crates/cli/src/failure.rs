use std::fmt::Display;
use std::path::Path;

/// Error with the process exit code it maps to: 2 for bad input, 1 for
/// failures of an otherwise valid job.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: impl Display) -> Self {
        Failure::runtime(format!("{}: {e}", path.display()))
    }
}

impl From<stppm_core::Error> for Failure {
    fn from(e: stppm_core::Error) -> Self {
        Failure {
            code: if e.is_validation() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;
