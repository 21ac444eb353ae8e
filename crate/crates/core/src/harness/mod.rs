//! Training and evaluation driver behind the command-line interface:
//! configuration resolution, the per-seed episode loops, metrics, and
//! structured artifact emission.

pub mod cli;
pub mod config;
pub mod metrics;
pub mod run;
pub mod selftest;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::agent::AgentError;
use crate::world::WorldError;

pub use config::RunConfig;
pub use metrics::{EpisodeRecord, Summary, EPISODES_HEADER, MA_WINDOW};
pub use run::{run_eval, run_training};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: io::Error,
    },
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("self test failed: {0}")]
    Selftest(String),
}

impl HarnessError {
    fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> HarnessError {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }

    /// Process exit code: 1 for configuration mistakes the user can fix in
    /// flags or config files, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_)
            | HarnessError::World(WorldError::Config(_))
            | HarnessError::Agent(AgentError::Config(_)) => 1,
            _ => 2,
        }
    }
}
