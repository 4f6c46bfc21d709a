//! Session planning, the trial state machine, and trial-log persistence.

mod log;
mod plan;
mod region;
mod session;

pub use self::log::{export_csv, load_log, LoadedLog, TrialLog, CSV_COLUMNS};
pub use plan::{generate_plans, Block, PlanConfig, SessionPlan, DENSITY_SQUARE, SCHEME_SQUARE};
pub use region::RegionId;
pub use session::{EventKind, Phase, Session, SessionEvent, INTER_TRIAL_HOLD_MS};

use crate::encoding::{
    nearest_target, EncodingError, EncodingScheme, GridSpec, Point, TargetIndex,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub const DENSITIES: [u32; 3] = [5, 7, 9];
pub const TRIALS_PER_BLOCK: usize = 9;
pub const COHORT_SIZE: usize = 12;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{action} is not allowed while {phase}")]
    ProtocolOrder { action: &'static str, phase: Phase },
    #[error("interpretation must be recorded before classification")]
    MissingInterpretation,
    #[error("the stimulus may be replayed only once per trial")]
    ReplayLimit,
    #[error("inter-trial hold active for another {remaining_ms:.0} ms")]
    HoldActive { remaining_ms: f64 },
    #[error("session has no trials left")]
    SessionComplete,
    #[error("design error: {0}")]
    Design(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("persistence failure: {0}")]
    Persistence(#[from] std::io::Error),
    #[error("trial log does not match the plan: {0}")]
    Integrity(String),
}

/// One cell of the density x scheme design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub density: u32,
    pub scheme: EncodingScheme,
}

impl Condition {
    pub fn new(density: u32, scheme: EncodingScheme) -> Self {
        Self { density, scheme }
    }

    /// The twelve conditions, densities outermost.
    pub fn all() -> Vec<Condition> {
        DENSITIES
            .iter()
            .flat_map(|&d| {
                EncodingScheme::ALL
                    .into_iter()
                    .map(move |s| Condition::new(d, s))
            })
            .collect()
    }

    pub fn grid(&self) -> Result<GridSpec, EncodingError> {
        GridSpec::with_density(self.density)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{0}x{0} {1}", self.density, self.scheme)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Correct,
    InterpretationError,
    PositionalError,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Correct => "correct",
            Outcome::InterpretationError => "interpretation_error",
            Outcome::PositionalError => "positional_error",
        }
    }
}

/// Everything recorded about one finalized trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub participant_id: String,
    pub block_index: usize,
    pub trial_index: usize,
    pub condition: Condition,
    pub target: TargetIndex,
    pub stimulus_repeats: u8,
    pub interpretation: Option<TargetIndex>,
    pub selection_point: Point,
    pub selected_target: TargetIndex,
    pub elapsed_ms: f64,
    pub outcome: Outcome,
}

/// Wrong spoken coordinate beats a missed reach: an interpretation error is
/// reported even when the reach also misses.
pub fn classify_error(
    target: TargetIndex,
    interpretation: Option<TargetIndex>,
    selection_point: Point,
    grid: &GridSpec,
) -> Result<Outcome, ExperimentError> {
    let interpretation = interpretation.ok_or(ExperimentError::MissingInterpretation)?;
    if interpretation != target {
        return Ok(Outcome::InterpretationError);
    }
    let hit = nearest_target(grid, selection_point);
    if hit.hit && hit.target == target {
        Ok(Outcome::Correct)
    } else {
        Ok(Outcome::PositionalError)
    }
}
