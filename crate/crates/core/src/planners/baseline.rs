//! Reference planners: expert log replay and the rule-based chain oracle.

use std::time::Instant;

use super::{PlanError, PlanResult, Planner};
use crate::chain::{generate_chain, ChainParams, ChainSteps};
use crate::world::ScenarioState;

/// Replays the logged expert future verbatim; the upper anchor for every
/// score.
#[derive(Debug, Default, Clone)]
pub struct LogReplayPlanner;

impl Planner for LogReplayPlanner {
    fn name(&self) -> &str {
        "log-replay"
    }

    fn plan(&self, scene: &ScenarioState) -> Result<PlanResult, PlanError> {
        let start = Instant::now();
        Ok(PlanResult {
            trajectory: scene.expert_future.clone(),
            chain: None,
            prompt_echo: None,
            latency: start.elapsed().as_secs_f64(),
        })
    }
}

/// Runs the rule-based chain directly on the scene; the label generator
/// used as a planner.
#[derive(Debug, Clone)]
pub struct ChainOraclePlanner {
    pub steps: ChainSteps,
    pub params: ChainParams,
}

impl Default for ChainOraclePlanner {
    fn default() -> Self {
        Self {
            steps: ChainSteps::full(),
            params: ChainParams::default(),
        }
    }
}

impl Planner for ChainOraclePlanner {
    fn name(&self) -> &str {
        "chain-oracle"
    }

    fn plan(&self, scene: &ScenarioState) -> Result<PlanResult, PlanError> {
        let start = Instant::now();
        let (chain, trajectory) = generate_chain(scene, self.steps, &self.params)
            .map_err(|e| self.fail(scene, e.into()))?;
        Ok(PlanResult {
            trajectory,
            chain: Some(chain),
            prompt_echo: None,
            latency: start.elapsed().as_secs_f64(),
        })
    }
}
