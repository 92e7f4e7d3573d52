//! Deterministic grid-world simulator: sense → keyframe gate → map update →
//! plan → step, plus the flight-distance / unreliable-distance metrics.

mod episode;
mod record;
mod scenario;
pub mod templates;
mod world;

pub use episode::{run_episode, EpisodeConfig, Outcome, RECOVERY_LIMIT};
pub use record::{
    compute_metrics, export_run, export_run_with_comment, parse_run, read_run, round_sig, write_run, Metrics,
    ParsedRun, RunRecord, StepRecord, CSV_HEADER,
};
pub use scenario::{planner_summary, RawScenario, Scenario, ScenarioError};
pub use world::{load_raw_scenario, load_scenario, load_world, sense, Prior, SensorSpec, World};

use std::path::PathBuf;

use thiserror::Error;

use crate::keyframe::KeyframeError;
use crate::nn::NnError;
use crate::pgm::PgmError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid world: {0}")]
    World(String),
    #[error(transparent)]
    Scenario(Box<ScenarioError>),
    #[error(transparent)]
    Map(#[from] PgmError),
    #[error(transparent)]
    Keyframe(#[from] KeyframeError),
    #[error("keyframe model rejected a sensed frame: {0}")]
    Frame(#[from] NnError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
}
