use std::path::Path;

use thiserror::Error;

/// Exit status for I/O failures.
pub const EXIT_IO: i32 = 2;
/// Exit status for malformed input files or settings.
pub const EXIT_MALFORMED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Malformed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// Malformed content of a named file.
    pub fn bad_file(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Malformed(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Malformed(_) => EXIT_MALFORMED,
        }
    }
}

impl From<contour_mend::GeometryError> for CliError {
    fn from(e: contour_mend::GeometryError) -> Self {
        CliError::Malformed(e.to_string())
    }
}

impl From<contour_mend::HarnessError> for CliError {
    fn from(e: contour_mend::HarnessError) -> Self {
        CliError::Malformed(e.to_string())
    }
}
