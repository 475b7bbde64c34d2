//! Intelligent Driver Model car following along the lane centerline.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{PlanError, PlanResult, Planner};
use crate::scenario::BASE_DT;
use crate::world::{wrap_angle, Point, Pose, Quad, ScenarioState, Trajectory};
use std::f64::consts::FRAC_PI_2;

/// Maximum lateral offset from the centerline for an agent to count as an
/// in-lane leader, meters.
pub(crate) const IN_LANE_LATERAL: f64 = 1.5;

/// IDM parameters in the standard formulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmParams {
    /// Desired free-road speed v0, m/s.
    pub desired_speed: f64,
    /// Standstill minimum gap s0, meters.
    pub min_gap: f64,
    /// Desired time headway T_h, seconds.
    pub time_headway: f64,
    /// Maximum acceleration a_max, m/s².
    pub max_accel: f64,
    /// Comfortable deceleration b (braking is clamped at 2b), m/s².
    pub comfortable_decel: f64,
    /// Free-road exponent δ ≥ 1.
    pub exponent: f64,
}

impl IdmParams {
    /// Literature-standard parameters with the desired speed pinned to
    /// `v0` (callers typically pass the lane speed limit).
    pub fn with_desired_speed(v0: f64) -> Self {
        Self {
            desired_speed: v0,
            min_gap: 2.0,
            time_headway: 1.5,
            max_accel: 1.5,
            comfortable_decel: 2.0,
            exponent: 4.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.desired_speed > 0.0
            && self.min_gap > 0.0
            && self.time_headway > 0.0
            && self.max_accel > 0.0
            && self.comfortable_decel > 0.0
            && self.exponent >= 1.0
    }
}

/// The IDM acceleration law: a = a_max·[1 − (v/v0)^δ − (s*/gap)²] with
/// s* = s0 + max(0, v·T_h + v·(v − v_lead)/(2·√(a_max·b))), clamped to
/// [−2b, a_max]. The dynamic part of s* is floored at zero so a faster
/// leader never reads as extra required spacing; without the floor the law
/// loses its monotonicity in v. A non-positive gap means the follower is
/// already in violation and returns the emergency value −2b. The no-leader
/// case is gap = +∞ (v_lead is then irrelevant).
pub fn idm_accel(v: f64, v_lead: f64, gap: f64, params: &IdmParams) -> f64 {
    debug_assert!(params.is_valid());
    let emergency = -2.0 * params.comfortable_decel;
    if gap <= 0.0 {
        return emergency;
    }
    let free = (v / params.desired_speed).powf(params.exponent);
    let dynamic =
        v * params.time_headway
            + v * (v - v_lead) / (2.0 * (params.max_accel * params.comfortable_decel).sqrt());
    let s_star = params.min_gap + dynamic.max(0.0);
    let accel = params.max_accel * (1.0 - free - (s_star / gap).powi(2));
    accel.clamp(emergency, params.max_accel)
}

/// Half-extent of `footprint` along the direction `heading`, measured from
/// `center`, meters.
pub(crate) fn extent_along(footprint: &Quad, center: Point, heading: f64) -> f64 {
    let dir = Point::new(heading.cos(), heading.sin());
    footprint
        .vertices()
        .iter()
        .map(|&p| (p - center).dot(dir))
        .fold(0.0_f64, f64::max)
}

/// The in-lane leader ahead of station `s_ego`: the agent with the smallest
/// projected station among those ahead and within [`IN_LANE_LATERAL`] of
/// the centerline. Returns (bumper-to-bumper gap, leader speed).
fn find_leader(scene: &ScenarioState, s_ego: f64, ego_front: f64) -> Option<(f64, f64)> {
    let line = &scene.map.lane_centerline;
    let mut best: Option<(f64, f64, f64)> = None;
    for agent in &scene.agents {
        let (s, lateral) = line.project(agent.pose.point());
        if s <= s_ego || lateral.abs() >= IN_LANE_LATERAL {
            continue;
        }
        if best.is_none() || s < best.unwrap().0 {
            let heading = line.heading_at(s);
            // Rear extent: how far the leader's body reaches back toward us.
            let rear = extent_along(&agent.footprint, agent.pose.point(), heading + std::f64::consts::PI);
            best = Some((s, rear, agent.velocity));
        }
    }
    best.map(|(s, rear, v_lead)| (s - s_ego - ego_front - rear, v_lead))
}

/// Rolls the IDM law forward along the centerline at 0.1 s against the
/// nearest in-lane leader (assumed to continue at constant speed), then
/// keeps every k-th pose to emit a trajectory matching the scene's future
/// horizon and spacing.
pub fn idm_plan(
    scene: &ScenarioState,
    params: &IdmParams,
) -> Result<PlanResult, crate::world::WorldError> {
    let start = Instant::now();
    let dt = scene.expert_future.dt;
    let horizon = scene.expert_future.len() as f64 * dt;
    let line = &scene.map.lane_centerline;
    let (s_ego0, _) = line.project(scene.ego.pose.point());
    let ego_front = extent_along(
        &scene.ego.footprint,
        scene.ego.pose.point(),
        line.heading_at(s_ego0),
    );
    let leader = find_leader(scene, s_ego0, ego_front);

    let keep = (dt / BASE_DT).round() as usize;
    let total = (horizon / BASE_DT).round() as usize;
    let mut s = s_ego0;
    let mut v = scene.ego.velocity;
    let mut poses = Vec::with_capacity(total / keep);
    for step in 1..=total {
        let t = step as f64 * BASE_DT;
        let (gap, v_lead) = match leader {
            Some((gap0, v_lead)) => (gap0 + v_lead * (t - BASE_DT) - (s - s_ego0), v_lead),
            None => (f64::INFINITY, 0.0),
        };
        let a = idm_accel(v, v_lead, gap, params);
        if v + a * BASE_DT >= 0.0 {
            s += v * BASE_DT + 0.5 * a * BASE_DT * BASE_DT;
            v += a * BASE_DT;
        } else {
            // Braking reaches standstill inside the step.
            let t_stop = v / -a;
            s += v * t_stop - 0.5 * a * t_stop * t_stop;
            v = 0.0;
        }
        if step % keep == 0 {
            let p = line.point_at(s);
            poses.push(Pose::new(p.x, p.y, wrap_angle(line.heading_at(s) - FRAC_PI_2)));
        }
    }
    Ok(PlanResult {
        trajectory: Trajectory::new(poses, dt)?,
        chain: None,
        prompt_echo: None,
        latency: start.elapsed().as_secs_f64(),
    })
}

/// [`idm_plan`] as a planner. Without explicit parameters the desired speed
/// follows each scene's lane speed limit.
#[derive(Debug, Default, Clone)]
pub struct IdmPlanner {
    pub params: Option<IdmParams>,
}

impl Planner for IdmPlanner {
    fn name(&self) -> &str {
        "idm"
    }

    fn plan(&self, scene: &ScenarioState) -> Result<PlanResult, PlanError> {
        let params = self
            .params
            .unwrap_or_else(|| IdmParams::with_desired_speed(scene.map.speed_limit));
        idm_plan(scene, &params).map_err(|e| self.fail(scene, e.into()))
    }
}
