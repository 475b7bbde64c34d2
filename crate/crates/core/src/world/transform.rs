//! Global-to-ego frame transforms.
//!
//! In the ego frame the ego sits at the origin facing +Y with yaw reading 0.
//! Yaw values everywhere are stored relative to the ego heading, so an agent
//! driving parallel to the ego also reads 0. Positions rotate by pi/2 minus
//! the ego heading so the heading direction maps onto +Y.

use std::f64::consts::FRAC_PI_2;

use super::geometry::{wrap_angle, Point};
use super::quad::Quad;
use super::scene::{Frame, Pose, ScenarioState};

/// The rigid transform taking global poses into the ego frame.
#[derive(Debug, Clone, Copy)]
pub struct EgoTransform {
    origin: Point,
    /// Rotation applied to positions: pi/2 - ego yaw.
    rotation: f64,
    /// Ego yaw subtracted from yaw values.
    ego_yaw: f64,
}

impl EgoTransform {
    pub fn new(ego_pose: Pose) -> Self {
        Self {
            origin: ego_pose.point(),
            rotation: FRAC_PI_2 - ego_pose.yaw,
            ego_yaw: ego_pose.yaw,
        }
    }

    pub fn to_ego_point(&self, p: Point) -> Point {
        (p - self.origin).rotated(self.rotation)
    }

    pub fn from_ego_point(&self, p: Point) -> Point {
        p.rotated(-self.rotation) + self.origin
    }

    pub fn to_ego_yaw(&self, yaw: f64) -> f64 {
        wrap_angle(yaw - self.ego_yaw)
    }

    pub fn from_ego_yaw(&self, yaw: f64) -> f64 {
        wrap_angle(yaw + self.ego_yaw)
    }

    pub fn to_ego_pose(&self, pose: Pose) -> Pose {
        let p = self.to_ego_point(pose.point());
        Pose::new(p.x, p.y, self.to_ego_yaw(pose.yaw))
    }

    pub fn from_ego_pose(&self, pose: Pose) -> Pose {
        let p = self.from_ego_point(pose.point());
        Pose::new(p.x, p.y, self.from_ego_yaw(pose.yaw))
    }

    pub fn to_ego_quad(&self, q: &Quad) -> Quad {
        q.map_points(|p| self.to_ego_point(p))
            .expect("rigid transform preserves convexity")
    }
}

/// Transforms every pose, footprint, and map element of `state` into the ego
/// frame. Idempotent: a state already tagged [`Frame::Ego`] is returned
/// unchanged.
pub fn transform_to_ego_frame(mut state: ScenarioState) -> ScenarioState {
    if state.frame == Frame::Ego {
        return state;
    }
    let t = EgoTransform::new(state.ego.pose);

    let map_poses = |poses: &mut Vec<Pose>| {
        for p in poses.iter_mut() {
            *p = t.to_ego_pose(*p);
        }
    };

    state.ego.footprint = t.to_ego_quad(&state.ego.footprint);
    map_poses(&mut state.ego.past_trajectory);
    state.ego.pose = t.to_ego_pose(state.ego.pose);

    for agent in &mut state.agents {
        agent.footprint = t.to_ego_quad(&agent.footprint);
        agent.pose = t.to_ego_pose(agent.pose);
        for (_, p) in &mut agent.predicted_positions {
            *p = t.to_ego_point(*p);
        }
    }

    state.map.lane_centerline = state.map.lane_centerline.map_points(|p| t.to_ego_point(p));
    state.map.left_boundary = state.map.left_boundary.map_points(|p| t.to_ego_point(p));
    state.map.right_boundary = state.map.right_boundary.map_points(|p| t.to_ego_point(p));

    map_poses(&mut state.expert_future.poses);
    if let Some(plan) = &mut state.previous_plan {
        map_poses(&mut plan.poses);
    }

    state.frame = Frame::Ego;
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ego_reads_zero_at_origin() {
        let t = EgoTransform::new(Pose::new(12.0, -4.0, 1.2));
        let p = t.to_ego_pose(Pose::new(12.0, -4.0, 1.2));
        assert!(p.x.abs() < 1e-12 && p.y.abs() < 1e-12 && p.yaw.abs() < 1e-12);
    }

    #[test]
    fn point_ahead_maps_to_plus_y() {
        // Ego at (10, 0) heading along global +X: a point 5 m ahead at
        // (15, 0) maps to (0, 5).
        let t = EgoTransform::new(Pose::new(10.0, 0.0, 0.0));
        let p = t.to_ego_point(Point::new(15.0, 0.0));
        assert!(p.x.abs() < 1e-12 && (p.y - 5.0).abs() < 1e-12);
    }

    #[test]
    fn parallel_agent_reads_zero_yaw() {
        let t = EgoTransform::new(Pose::new(3.0, 7.0, PI / 3.0));
        assert!(t.to_ego_yaw(PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn round_trips() {
        let t = EgoTransform::new(Pose::new(-8.0, 2.5, -2.1));
        let pose = Pose::new(4.0, -6.0, 0.7);
        let back = t.from_ego_pose(t.to_ego_pose(pose));
        assert!((back.x - pose.x).abs() < 1e-9);
        assert!((back.y - pose.y).abs() < 1e-9);
        assert!((back.yaw - pose.yaw).abs() < 1e-9);
    }
}
