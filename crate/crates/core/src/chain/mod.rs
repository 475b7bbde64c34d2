//! Four-step reasoning chains: rule-based generation from scene geometry,
//! action-to-trajectory mapping, and the text grammar for rendering and
//! parsing chain + trajectory responses.

mod generate;
mod text;
mod types;

pub use generate::{
    action_to_trajectory, assess_environment, forecast_collisions, generate_chain,
    plan_coarse_action, refine_action,
};
pub use text::{parse_response, parse_response_with, render_response, DEFAULT_TRAJECTORY_DT};
pub use types::{
    AlertLevel, ChainParams, ChainSteps, CoarseAction, CollisionAlert, EnvAssessment, FinalAction,
    InstructChain, LightRuling, Maneuver, SpeedModifier, SpeedTier,
};

use thiserror::Error;

/// Failures in chain generation or response parsing.
#[derive(Debug, Error)]
pub enum ChainError {
    #[error("invalid step subset: step 4 requires step 1")]
    InvalidStepSubset,
    #[error("response has no trajectory section")]
    MissingTrajectory,
    #[error("response line {line}: {expected}")]
    TrajectoryParse { line: usize, expected: String },
    #[error(transparent)]
    World(#[from] crate::world::WorldError),
}
