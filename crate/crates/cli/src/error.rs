use std::path::PathBuf;

use hardcore::admissibility::Violation;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    BadInput(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed document {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("inadmissible: {} and {} at squared distance {} < {d2}", .violation.a, .violation.b, .violation.sq_distance)]
    Violation { violation: Violation, d2: i64 },
    #[error(transparent)]
    Core(#[from] hardcore::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use hardcore::Error as E;
        match self {
            CliError::BadInput(_) | CliError::Read { .. } | CliError::Write { .. } | CliError::Parse { .. } => 2,
            CliError::Violation { .. } => 1,
            CliError::Core(e) => match e {
                E::BudgetExhausted(_) => 3,
                E::WordDoesNotClose(_)
                | E::NotLayered(_)
                | E::UnboundedCell(_)
                | E::DegeneratePolytope(_)
                | E::NotFccEmbedding(_)
                | E::EmptyRegion
                | E::TooFewParticles(_) => 1,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
