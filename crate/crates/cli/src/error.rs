//! Error categories and their process exit codes.

use thiserror::Error;

/// Everything a subcommand can fail with, sorted by exit code rather than by
/// origin: what matters to a caller is whether the *inputs* were bad (2), the
/// *geometry* was bad (3), or the run itself broke (1).
#[derive(Debug, Error)]
pub enum CliError {
    /// An input file could not be read or parsed, or the inputs disagree
    /// with each other (e.g. mask and image sizes differ).
    #[error("{0}")]
    Input(String),
    /// The inputs parsed but the pipeline rejected them: degenerate patch
    /// layout, missing or out-of-bounds joints, singular homographies.
    #[error("{0}")]
    Pipeline(String),
    /// An output file could not be written.
    #[error("{0}")]
    Output(String),
    /// The embedded invariant suite reported failures.
    #[error("{failed} of {total} self-checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Pipeline(_) => 3,
            CliError::Output(_) | CliError::ChecksFailed { .. } => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_stable() {
        assert_eq!(CliError::Input(String::new()).exit_code(), 2);
        assert_eq!(CliError::Pipeline(String::new()).exit_code(), 3);
        assert_eq!(CliError::Output(String::new()).exit_code(), 1);
        assert_eq!(CliError::ChecksFailed { failed: 1, total: 8 }.exit_code(), 1);
    }
}
