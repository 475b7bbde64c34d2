//! Rule-based chain generation from scene geometry.
//!
//! These rules define the ground-truth labels: a coarse maneuver from the
//! centerline shape, collision alerts from propagating the ego footprint
//! along the lane, an environment assessment from light/speed/boundaries,
//! and a priority-ordered final action mapped onto a speed profile.

use std::f64::consts::FRAC_PI_2;

use super::types::{
    AlertLevel, ChainParams, ChainSteps, CoarseAction, CollisionAlert, EnvAssessment, FinalAction,
    InstructChain, LightRuling, Maneuver, SpeedModifier, SpeedTier,
};
use super::ChainError;
use crate::fmt::round2;
use crate::world::{
    min_polygon_distance, relative_sector, wrap_angle, Point, Pose, Quad, ScenarioState,
    Trajectory,
};

/// Float guard at the exact turn-threshold boundary, radians.
const TURN_EPS: f64 = 1e-9;

/// Ego pose on the lane at arc length `s`: position and heading angle
/// (from +X, in the scene's frame).
fn path_pose(scene: &ScenarioState, s: f64) -> (Point, f64) {
    let line = &scene.map.lane_centerline;
    (line.point_at(s), line.heading_at(s))
}

/// The ego footprint rigidly carried from arc length `s_from` to `s_to`:
/// the projection foot slides along the path and the body rotates by the
/// tangent change, so lateral offset and heading misalignment relative to
/// the lane are preserved. At `s_to == s_from` this is the identity.
fn footprint_at(scene: &ScenarioState, s_from: f64, s_to: f64) -> Quad {
    let line = &scene.map.lane_centerline;
    let p0 = line.point_at(s_from);
    let p1 = line.point_at(s_to);
    let rot = wrap_angle(line.heading_at(s_to) - line.heading_at(s_from));
    scene
        .ego
        .footprint
        .map_points(|q| (q - p0).rotated(rot) + p1)
        .expect("rigid transform preserves convexity")
}

/// Whether a red light forces a stop: the stop point (the centerline end)
/// is reachable within the horizon at current speed, plus a small buffer so
/// a slow or already-stopped ego stays committed.
fn stop_required(scene: &ScenarioState, params: &ChainParams) -> bool {
    if scene.map.traffic_light != crate::world::TrafficLight::Red {
        return false;
    }
    let line = &scene.map.lane_centerline;
    let (s_ego, _) = line.project(scene.ego.pose.point());
    let remaining = line.length() - s_ego;
    remaining <= scene.ego.velocity * params.horizon + params.stop_buffer
}

/// Step 1: maneuver from the net centerline heading change over the
/// distance covered at current speed within the horizon. The exact
/// threshold boundary belongs to the turn. A red-light stop requirement
/// overrides the shape-based choice.
pub fn plan_coarse_action(scene: &ScenarioState, params: &ChainParams) -> CoarseAction {
    if stop_required(scene, params) {
        return CoarseAction {
            maneuver: Maneuver::Stop,
        };
    }
    let line = &scene.map.lane_centerline;
    let (s_ego, _) = line.project(scene.ego.pose.point());
    let reach = scene.ego.velocity * params.horizon;
    let delta = wrap_angle(line.heading_at(s_ego + reach) - line.heading_at(s_ego));
    let maneuver = if delta >= params.turn_threshold - TURN_EPS {
        Maneuver::TurnLeft
    } else if delta <= -(params.turn_threshold - TURN_EPS) {
        Maneuver::TurnRight
    } else {
        Maneuver::GoStraight
    };
    CoarseAction { maneuver }
}

/// Step 2: propagate the ego footprint along the lane at current speed and
/// test each agent's footprint at its predicted position (nearest predicted
/// sample in time) at every future step. Agents whose minimum distance
/// (rounded to 2 decimals) stays below the attention radius produce one
/// alert each, sorted by ascending distance with ids breaking ties.
///
/// The coarse maneuver is accepted for interface symmetry; with a single
/// lane every maneuver shares the centerline as its nominal path.
pub fn forecast_collisions(
    scene: &ScenarioState,
    _coarse: CoarseAction,
    params: &ChainParams,
) -> Vec<CollisionAlert> {
    let line = &scene.map.lane_centerline;
    let (s_ego, _) = line.project(scene.ego.pose.point());
    let steps = (params.horizon / params.dt).round() as usize;

    let ego_footprints: Vec<(f64, Quad, Pose)> = (1..=steps)
        .map(|j| {
            let t = j as f64 * params.dt;
            let s = s_ego + scene.ego.velocity * t;
            let rot = wrap_angle(line.heading_at(s) - line.heading_at(s_ego));
            let center =
                (scene.ego.pose.point() - line.point_at(s_ego)).rotated(rot) + line.point_at(s);
            let pose = Pose::new(center.x, center.y, wrap_angle(scene.ego.pose.yaw + rot));
            (t, footprint_at(scene, s_ego, s), pose)
        })
        .collect();

    let mut alerts = Vec::new();
    for agent in &scene.agents {
        if agent.predicted_positions.is_empty() {
            continue;
        }
        let mut best: Option<(f64, f64, Pose, Point)> = None;
        for (t, ego_quad, ego_pose) in &ego_footprints {
            let (_, predicted) = agent
                .predicted_positions
                .iter()
                .min_by(|a, b| {
                    let da = (a.0 - t).abs();
                    let db = (b.0 - t).abs();
                    da.total_cmp(&db).then(a.0.total_cmp(&b.0))
                })
                .copied()
                .unwrap();
            let shift = predicted - agent.pose.point();
            let agent_quad = agent
                .footprint
                .map_points(|p| p + shift)
                .expect("translation preserves convexity");
            let d = min_polygon_distance(ego_quad, &agent_quad);
            if best.is_none() || d < best.unwrap().0 {
                best = Some((d, *t, *ego_pose, predicted));
            }
        }
        let (d, time_offset, ego_pose, at) = best.unwrap();
        let min_distance = round2(d);
        if min_distance < params.attention_radius {
            let level = if min_distance < params.caution_radius {
                AlertLevel::Caution
            } else {
                AlertLevel::Attention
            };
            alerts.push(CollisionAlert {
                agent_id: agent.id,
                min_distance,
                time_offset,
                sector: relative_sector(ego_pose, at),
                level,
            });
        }
    }
    alerts.sort_by(|a, b| {
        a.min_distance
            .total_cmp(&b.min_distance)
            .then(a.agent_id.cmp(&b.agent_id))
    });
    alerts
}

/// Step 3: light ruling, speed tier relative to the limit (the limit itself
/// still reads no-accelerate), boundary crossing now or along the nominal
/// path, and the two scene facts step 4 consumes.
pub fn assess_environment(scene: &ScenarioState, params: &ChainParams) -> EnvAssessment {
    use crate::world::TrafficLight;
    let light_ruling = match scene.map.traffic_light {
        TrafficLight::Green => LightRuling::Proceed,
        TrafficLight::Yellow => LightRuling::PrepareToStop,
        TrafficLight::Red => LightRuling::Stop,
        TrafficLight::Unknown => LightRuling::NotApplicable,
    };

    let v = scene.ego.velocity;
    let limit = scene.map.speed_limit;
    let speed_tier = if v < params.safe_speed_fraction * limit {
        SpeedTier::Safe
    } else if v <= limit {
        SpeedTier::NoAccelerate
    } else {
        SpeedTier::Decelerate
    };

    let line = &scene.map.lane_centerline;
    let (s_ego, _) = line.project(scene.ego.pose.point());
    let steps = (params.horizon / params.dt).round() as usize;
    let boundary_violation = (0..=steps).any(|j| {
        let s = s_ego + v * (j as f64 * params.dt);
        let quad = footprint_at(scene, s_ego, s);
        quad.intersects_polyline(&scene.map.left_boundary)
            || quad.intersects_polyline(&scene.map.right_boundary)
    });

    EnvAssessment {
        light_ruling,
        speed_tier,
        boundary_violation,
        stop_point_in_horizon: stop_required(scene, params),
        well_below_limit: v < params.accel_headroom_fraction * limit,
    }
}

/// Step 4: priority rules over the first three steps.
///
/// 1. A red-light stop within the horizon, or a frontal caution alert,
///    demands deceleration (a stop maneuver keeps its stop modifier).
/// 2. Otherwise any remaining alert, or a speed at the no-accelerate tier,
///    holds speed; this also covers non-frontal caution alerts so no alert
///    ever coexists with acceleration.
/// 3. Otherwise an over-limit speed demands deceleration.
/// 4. Otherwise clear headroom under a proceed ruling allows acceleration.
/// 5. Otherwise hold speed.
pub fn refine_action(
    coarse: CoarseAction,
    alerts: &[CollisionAlert],
    env: EnvAssessment,
) -> FinalAction {
    let frontal_caution = alerts
        .iter()
        .any(|a| a.level == AlertLevel::Caution && a.sector.is_frontal());
    let modifier = if (env.light_ruling == LightRuling::Stop && env.stop_point_in_horizon)
        || frontal_caution
    {
        SpeedModifier::Decelerate
    } else if !alerts.is_empty() || env.speed_tier == SpeedTier::NoAccelerate {
        SpeedModifier::Maintain
    } else if env.speed_tier == SpeedTier::Decelerate {
        SpeedModifier::Decelerate
    } else if env.well_below_limit && env.light_ruling == LightRuling::Proceed {
        SpeedModifier::Accelerate
    } else {
        SpeedModifier::Maintain
    };
    FinalAction::new(coarse.maneuver, modifier)
}

/// Maps the final action onto poses: a constant-acceleration speed profile
/// (accelerate +1.0 m/s² capped at the limit, maintain constant but never
/// above the limit, decelerate -2.0, stop -3.0, both floored at 0) advanced
/// by exact arc length along the centerline, with yaw from the tangent.
/// Past the end of the centerline the final tangent is extended.
pub fn action_to_trajectory(
    scene: &ScenarioState,
    action: FinalAction,
    params: &ChainParams,
) -> Result<Trajectory, ChainError> {
    let (accel, cap) = match action.speed_modifier {
        SpeedModifier::Accelerate => (params.accelerate_rate, scene.map.speed_limit),
        SpeedModifier::Maintain => (0.0, scene.map.speed_limit),
        SpeedModifier::Decelerate => (-params.decelerate_rate, f64::INFINITY),
        SpeedModifier::Stop => (-params.stop_rate, f64::INFINITY),
    };

    let line = &scene.map.lane_centerline;
    let (s_ego, _) = line.project(scene.ego.pose.point());
    let steps = (params.horizon / params.dt).round() as usize;
    let dt = params.dt;

    let mut v = scene.ego.velocity.min(cap);
    let mut s = s_ego;
    let mut poses = Vec::with_capacity(steps);
    for _ in 0..steps {
        let (ds, v_next) = advance(v, accel, cap, dt);
        s += ds;
        v = v_next;
        let (p, heading) = path_pose(scene, s);
        poses.push(Pose::new(p.x, p.y, wrap_angle(heading - FRAC_PI_2)));
    }
    Ok(Trajectory::new(poses, dt)?)
}

/// Exact arc length and end speed for one step of constant acceleration
/// with an upper cap and a floor at zero.
fn advance(v: f64, accel: f64, cap: f64, dt: f64) -> (f64, f64) {
    if accel > 0.0 && v < cap {
        let to_cap = (cap - v) / accel;
        if to_cap >= dt {
            (v * dt + 0.5 * accel * dt * dt, v + accel * dt)
        } else {
            (
                v * to_cap + 0.5 * accel * to_cap * to_cap + cap * (dt - to_cap),
                cap,
            )
        }
    } else if accel < 0.0 && v > 0.0 {
        let to_zero = v / -accel;
        if to_zero >= dt {
            (v * dt + 0.5 * accel * dt * dt, v + accel * dt)
        } else {
            (v * to_zero + 0.5 * accel * to_zero * to_zero, 0.0)
        }
    } else {
        (v.min(cap) * dt, v.min(cap))
    }
}

/// Runs the enabled steps and always produces a trajectory. Disabled step 2
/// contributes no alerts and disabled step 3 a permissive environment to
/// step 4; with step 4 disabled the trajectory follows the coarse maneuver
/// at held speed.
pub fn generate_chain(
    scene: &ScenarioState,
    enabled: ChainSteps,
    params: &ChainParams,
) -> Result<(InstructChain, Trajectory), ChainError> {
    enabled.validate()?;
    let coarse = plan_coarse_action(scene, params);
    let alerts = enabled
        .s2
        .then(|| forecast_collisions(scene, coarse, params));
    let env = enabled.s3.then(|| assess_environment(scene, params));
    let final_action = enabled.s4.then(|| {
        refine_action(
            coarse,
            alerts.as_deref().unwrap_or(&[]),
            env.unwrap_or_else(EnvAssessment::permissive),
        )
    });

    let action =
        final_action.unwrap_or_else(|| FinalAction::new(coarse.maneuver, SpeedModifier::Maintain));
    let trajectory = action_to_trajectory(scene, action, params)?;

    let chain = InstructChain {
        step1: enabled.s1.then_some(coarse),
        step2: alerts,
        step3: env,
        step4: final_action,
        enabled,
    };
    Ok((chain, trajectory))
}
