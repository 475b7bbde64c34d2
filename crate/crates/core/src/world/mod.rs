//! Core geometric and kinematic types shared by the whole harness: poses,
//! quadrilateral footprints, polylines, scene containers, and the pure
//! queries on them (ego-frame transform, polygon distance, sector lookup).

mod geometry;
mod polyline;
mod quad;
mod scene;
mod sector;
mod transform;

pub use geometry::{wrap_angle, Point};
pub use polyline::Polyline;
pub use quad::{min_polygon_distance, Quad};
pub use scene::{
    AgentCategory, AgentObject, EgoState, Frame, MapContext, Pose, ScenarioState, TrafficLight,
    Trajectory, DEFAULT_WHEELBASE, MAX_AGENTS, TRAJECTORY_SPEED_BOUND,
};
pub use sector::{relative_sector, Sector};
pub use transform::{transform_to_ego_frame, EgoTransform};

use thiserror::Error;

/// Validation failures for world-model type construction.
#[derive(Debug, Error)]
pub enum WorldError {
    #[error("quad must have exactly 4 vertices, got {0}")]
    QuadVertexCount(usize),
    #[error("quad is not convex with counterclockwise winding")]
    QuadNotConvex,
    #[error("quad has zero area")]
    QuadZeroArea,
    #[error("quad has a non-finite vertex")]
    QuadNotFinite,
    #[error("trajectory must contain at least one pose")]
    EmptyTrajectory,
    #[error("trajectory dt must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("trajectory implies speed {speed:.2} m/s above the {bound:.0} m/s sanity bound at pose {index}")]
    TrajectorySpeedBound { index: usize, speed: f64, bound: f64 },
    #[error("trajectory contains a non-finite value")]
    TrajectoryNotFinite,
    #[error("polyline needs at least 2 points, got {0}")]
    PolylineTooShort(usize),
    #[error("{context}: {message}")]
    InvalidScene { context: String, message: String },
}
