//! Scene state: ego, agents, map context, and trajectories.

use serde::{Deserialize, Serialize};

use super::geometry::Point;
use super::polyline::Polyline;
use super::quad::Quad;
use super::WorldError;

/// Ego wheelbase in meters, used by the kinematic model and LQR tracker.
pub const DEFAULT_WHEELBASE: f64 = 3.0;
/// Maximum number of agent objects kept in a scenario state.
pub const MAX_AGENTS: usize = 32;
/// Upper bound on implied speed between consecutive trajectory poses (m/s).
pub const TRAJECTORY_SPEED_BOUND: f64 = 30.0;

/// Which frame poses and yaws are expressed in. The ego transform checks
/// this tag so applying it twice is a no-op.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Global,
    Ego,
}

/// A planar pose: position plus yaw in radians, wrapped to (-pi, pi].
///
/// In the global frame yaw is the heading angle from +X. In the ego frame
/// yaw values are stored relative to the ego heading (the ego reads 0) while
/// the geometric forward direction is +Y, so the heading direction of an
/// ego-frame pose is the angle yaw + pi/2 from +X.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self { x, y, yaw }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// A sequence of poses at a fixed time step. The first pose is one step
/// after the instant the trajectory was planned, so pose i sits at time
/// (i + 1) * dt from the plan instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub poses: Vec<Pose>,
    pub dt: f64,
}

impl Trajectory {
    /// Validates non-emptiness, positive dt, finite poses, and that the
    /// implied speed between consecutive poses stays within
    /// [`TRAJECTORY_SPEED_BOUND`].
    pub fn new(poses: Vec<Pose>, dt: f64) -> Result<Self, WorldError> {
        if poses.is_empty() {
            return Err(WorldError::EmptyTrajectory);
        }
        if !(dt > 0.0) {
            return Err(WorldError::NonPositiveDt(dt));
        }
        for p in &poses {
            if !(p.x.is_finite() && p.y.is_finite() && p.yaw.is_finite()) {
                return Err(WorldError::TrajectoryNotFinite);
            }
        }
        for (i, pair) in poses.windows(2).enumerate() {
            let speed = pair[0].point().distance(pair[1].point()) / dt;
            if speed > TRAJECTORY_SPEED_BOUND {
                return Err(WorldError::TrajectorySpeedBound {
                    index: i,
                    speed,
                    bound: TRAJECTORY_SPEED_BOUND,
                });
            }
        }
        Ok(Self { poses, dt })
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Total arc length along the pose positions.
    pub fn arc_length(&self) -> f64 {
        self.poses
            .windows(2)
            .map(|p| p[0].point().distance(p[1].point()))
            .sum()
    }
}

/// Object category used in prompts and chain reasoning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentCategory {
    Vehicle,
    Bicycle,
    Pedestrian,
    Unknown,
}

impl AgentCategory {
    pub fn label(&self) -> &'static str {
        match self {
            AgentCategory::Vehicle => "vehicle",
            AgentCategory::Bicycle => "bicycle",
            AgentCategory::Pedestrian => "pedestrian",
            AgentCategory::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "vehicle" => AgentCategory::Vehicle,
            "bicycle" => AgentCategory::Bicycle,
            "pedestrian" => AgentCategory::Pedestrian,
            "unknown" => AgentCategory::Unknown,
            _ => None?,
        })
    }
}

/// Traffic light state for the ego's lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficLight {
    Green,
    Yellow,
    Red,
    Unknown,
}

impl TrafficLight {
    pub fn label(&self) -> &'static str {
        match self {
            TrafficLight::Green => "green",
            TrafficLight::Yellow => "yellow",
            TrafficLight::Red => "red",
            TrafficLight::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "green" => TrafficLight::Green,
            "yellow" => TrafficLight::Yellow,
            "red" => TrafficLight::Red,
            "unknown" => TrafficLight::Unknown,
            _ => return None,
        })
    }
}

/// A non-ego object near the ego, with predicted future positions.
#[derive(Debug, Clone)]
pub struct AgentObject {
    pub id: u64,
    pub category: AgentCategory,
    pub footprint: Quad,
    pub pose: Pose,
    /// Signed speed along the heading, m/s.
    pub velocity: f64,
    /// Predicted (time offset s, position) samples, strictly increasing in
    /// time offset.
    pub predicted_positions: Vec<(f64, Point)>,
}

/// Ego vehicle state at the planning instant.
#[derive(Debug, Clone)]
pub struct EgoState {
    pub pose: Pose,
    pub velocity: f64,
    pub acceleration: f64,
    pub footprint: Quad,
    /// Past poses at fixed dt, oldest first, ending at the current pose.
    pub past_trajectory: Vec<Pose>,
    pub wheelbase: f64,
}

/// Static map context around the ego: one lane with boundaries. A stop line
/// (red light) sits at the end of the centerline by convention.
#[derive(Debug, Clone)]
pub struct MapContext {
    pub lane_centerline: Polyline,
    pub left_boundary: Polyline,
    pub right_boundary: Polyline,
    pub speed_limit: f64,
    pub traffic_light: TrafficLight,
}

/// Everything a planner sees for one planning instant.
#[derive(Debug, Clone)]
pub struct ScenarioState {
    pub scenario_id: String,
    pub timestamp: f64,
    pub frame: Frame,
    pub ego: EgoState,
    /// Sorted ascending by centroid distance to the ego, at most
    /// [`MAX_AGENTS`] entries.
    pub agents: Vec<AgentObject>,
    pub map: MapContext,
    /// Ground-truth future used for open-loop scoring and log replay.
    pub expert_future: Trajectory,
    /// The trajectory committed on the previous planning cycle, re-expressed
    /// in this state's frame. Present only when the feature config asks
    /// for it.
    pub previous_plan: Option<Trajectory>,
}
