//! Closed-loop simulation: kinematic bicycle model, LQR trajectory
//! tracking, and scenario rollout against replayed or reactive agents.

mod rollout;
mod tracker;

pub use rollout::run_closed_loop;
pub use tracker::{solve_lqr_gain, track_trajectory, TrackCommand, Tracker, TrackerParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::ScenarioError;
use crate::world::{wrap_angle, Pose, WorldError, DEFAULT_WHEELBASE};

/// Steering angle bound, radians. Commands beyond this are clipped by the
/// kinematic model itself, so no vehicle state can ever exceed it.
pub const MAX_STEER: f64 = 0.6;

/// Simulation failures that prevent a rollout from producing a log at all.
/// Planner failures are not errors: they terminate the log with
/// [`SimStatus::PlannerFailed`].
#[derive(Debug, Error)]
pub enum SimError {
    #[error("sim config: {0}")]
    Config(String),
    #[error("riccati iteration did not converge within {iterations} iterations")]
    RiccatiDiverged { iterations: usize },
    #[error("scenario {id}: simulation needs {needed} frames, log has {available}")]
    ScenarioTooShort {
        id: String,
        needed: usize,
        available: usize,
    },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// How non-ego agents behave while the ego diverges from its log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// Agents replay their logged states verbatim.
    Nonreactive,
    /// Vehicles and bicycles follow their own logged paths under IDM with
    /// the simulated ego as a potential leader; pedestrians replay.
    Reactive,
}

impl SimMode {
    pub fn label(&self) -> &'static str {
        match self {
            SimMode::Nonreactive => "nonreactive",
            SimMode::Reactive => "reactive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "nonreactive" => Some(SimMode::Nonreactive),
            "reactive" => Some(SimMode::Reactive),
            _ => None,
        }
    }
}

/// Closed-loop rollout configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Rollout length in seconds.
    pub duration: f64,
    /// Step rate in Hz; must match the 10 Hz cadence of scenario logs so
    /// agent replay stays frame-aligned.
    pub frequency: f64,
    /// Seconds between planner invocations; a multiple of the step period.
    pub replan_interval: f64,
    pub mode: SimMode,
    /// Ego wheelbase used by both the kinematic model and the tracker.
    pub wheelbase: f64,
    pub tracker: TrackerParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            duration: 15.0,
            frequency: 10.0,
            replan_interval: 0.5,
            mode: SimMode::Nonreactive,
            wheelbase: DEFAULT_WHEELBASE,
            tracker: TrackerParams::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: String| Err(SimError::Config(msg));
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return fail(format!("frequency must be positive, got {}", self.frequency));
        }
        if !(self.duration > 0.0) {
            return fail(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.wheelbase > 0.0) {
            return fail(format!("wheelbase must be positive, got {}", self.wheelbase));
        }
        let steps = self.duration * self.frequency;
        if (steps - steps.round()).abs() > 1e-6 {
            return fail(format!(
                "duration {} s is not a whole number of steps at {} Hz",
                self.duration, self.frequency
            ));
        }
        let per_replan = self.replan_interval * self.frequency;
        if !(self.replan_interval > 0.0) || (per_replan - per_replan.round()).abs() > 1e-6 {
            return fail(format!(
                "replan interval {} s is not a whole number of steps at {} Hz",
                self.replan_interval, self.frequency
            ));
        }
        Ok(())
    }

    /// Step period in seconds.
    pub fn dt(&self) -> f64 {
        1.0 / self.frequency
    }

    /// Number of kinematic steps in a full rollout (one less than the
    /// record count).
    pub fn steps(&self) -> usize {
        (self.duration * self.frequency).round() as usize
    }

    /// Steps between planner invocations.
    pub fn steps_per_replan(&self) -> usize {
        (self.replan_interval * self.frequency).round() as usize
    }
}

/// Ego state advanced by the kinematic model. Yaw is the global heading
/// from +X; `accel` and `steer` echo the last applied commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub pose: Pose,
    /// Forward speed, m/s; never negative.
    pub speed: f64,
    pub accel: f64,
    pub steer: f64,
}

/// Advances a vehicle one step with the kinematic bicycle model. Position
/// and heading integrate at the pre-step speed; steering is clipped to
/// [`MAX_STEER`] and speed floors at zero (no reversing).
pub fn step_kinematics(
    state: &VehicleState,
    accel: f64,
    steer: f64,
    dt: f64,
    wheelbase: f64,
) -> VehicleState {
    let steer = steer.clamp(-MAX_STEER, MAX_STEER);
    let v = state.speed;
    let x = state.pose.x + v * state.pose.yaw.cos() * dt;
    let y = state.pose.y + v * state.pose.yaw.sin() * dt;
    let yaw = wrap_angle(state.pose.yaw + v * steer.tan() / wheelbase * dt);
    VehicleState {
        pose: Pose::new(x, y, yaw),
        speed: (v + accel * dt).max(0.0),
        accel,
        steer,
    }
}

/// How a rollout ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimStatus {
    /// Ran the full configured duration.
    Completed,
    /// Ego footprint touched an agent footprint.
    Collided,
    /// Ego footprint left the drivable corridor entirely.
    OffRoad,
    /// The planner returned a hard failure at some replan.
    PlannerFailed,
}

impl SimStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SimStatus::Completed => "completed",
            SimStatus::Collided => "collided",
            SimStatus::OffRoad => "off-road",
            SimStatus::PlannerFailed => "planner-failed",
        }
    }
}

/// One agent's global pose and speed at a simulation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub id: u64,
    pub pose: Pose,
    pub speed: f64,
}

/// One simulation step: time from rollout start, the ego state with the
/// commands applied over the following step, agent states, the id of the
/// trajectory being tracked, and the tracker's error terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub t: f64,
    pub ego: VehicleState,
    pub agents: Vec<AgentRecord>,
    pub active_plan: u32,
    pub lateral_error: f64,
    pub speed_error: f64,
}

/// A complete closed-loop rollout. A completed run at the default config
/// holds 151 records (initial state plus 150 steps).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimLog {
    pub scenario_id: String,
    pub planner: String,
    pub mode: SimMode,
    pub status: SimStatus,
    /// Step period, seconds.
    pub dt: f64,
    /// Raw log frame index where the rollout starts.
    pub start_frame: usize,
    /// Configured step count; `records` holds `steps + 1` entries only when
    /// the run completed.
    pub steps: usize,
    /// Present when `status` is `planner-failed`: the planner's error.
    pub failure: Option<String>,
    pub records: Vec<SimRecord>,
}

impl SimLog {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sim logs serialize without error")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
