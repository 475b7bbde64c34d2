//! The planner contract and its implementations: log replay, the chain
//! oracle, an IDM car-following baseline, and a client for external LLM
//! endpoints speaking the JSON wire protocol (with a built-in stub server
//! for tests).

mod baseline;
mod decode;
mod idm;
mod llm;
mod stub;

pub use baseline::{ChainOraclePlanner, LogReplayPlanner};
pub use decode::{decode_token, nucleus, DecodeParams};
pub(crate) use idm::{extent_along, IN_LANE_LATERAL};
pub use idm::{idm_accel, idm_plan, IdmParams, IdmPlanner};
pub use llm::{LlmPlanner, WireRequest, WireResponse};
pub use stub::{scene_from_prompt, StubBehavior, StubLlmServer};

use thiserror::Error;

use crate::chain::{ChainError, InstructChain};
use crate::prompt::{PromptBundle, PromptError};
use crate::world::{ScenarioState, Trajectory};

/// What a planner produces for one scene: the trajectory to track, plus the
/// reasoning chain and prompt when the planner has them, and how long the
/// call took.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub trajectory: Trajectory,
    pub chain: Option<InstructChain>,
    pub prompt_echo: Option<PromptBundle>,
    /// Wall-clock planning time, seconds.
    pub latency: f64,
}

/// A planner failure, always attributable to a planner and a scenario.
#[derive(Debug, Error)]
#[error("planner {planner} on scenario {scenario}: {kind}")]
pub struct PlanError {
    pub planner: String,
    pub scenario: String,
    pub kind: PlanErrorKind,
}

#[derive(Debug, Error)]
pub enum PlanErrorKind {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("unusable response: {0}")]
    Response(#[from] ChainError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    World(#[from] crate::world::WorldError),
}

/// The contract every planner satisfies: a valid ego-frame scene in, a
/// full-horizon trajectory out. Planners hold no per-call state, so scenes
/// may be planned concurrently.
pub trait Planner: Send + Sync {
    /// Stable identifier used in reports and error messages.
    fn name(&self) -> &str;

    fn plan(&self, scene: &ScenarioState) -> Result<PlanResult, PlanError>;

    /// Builds this planner's error for `scene`.
    fn fail(&self, scene: &ScenarioState, kind: PlanErrorKind) -> PlanError {
        PlanError {
            planner: self.name().to_string(),
            scenario: scene.scenario_id.clone(),
            kind,
        }
    }
}
