//! Command-line front end: file formats, validation, and the analysis driver.

pub mod analyze;
pub mod schema;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed or inconsistent input.
    #[error("{0}")]
    Validation(String),
    /// Input is well formed but outside what the bounds cover.
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}
