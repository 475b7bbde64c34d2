//! Closed-loop rollout: the ego replans and tracks its way through a
//! scenario log while agents either replay or react.

use std::collections::BTreeMap;

use super::tracker::Tracker;
use super::{
    step_kinematics, AgentRecord, SimConfig, SimError, SimLog, SimMode, SimRecord, SimStatus,
    VehicleState,
};
use crate::planners::{extent_along, idm_accel, IdmParams, Planner, IN_LANE_LATERAL};
use crate::scenario::{
    build_scenario_state, resample_ratio, FeatureConfig, ScenarioFile, BASE_DT,
};
use crate::world::{
    min_polygon_distance, AgentCategory, EgoTransform, Point, Polyline, Pose, Quad, ScenarioState,
    Trajectory,
};

/// Minimum logged travel for an agent to count as moving along a path in
/// reactive mode; anything shorter replays its log verbatim.
const MIN_REACTIVE_PATH: f64 = 2.0;

/// An agent propagated by IDM along its own logged path.
struct ReactiveAgent {
    path: Polyline,
    /// Station along `path`, meters.
    s: f64,
    /// Speed, m/s.
    v: f64,
    params: IdmParams,
}

/// The trajectory currently being tracked, in the global frame; also
/// re-served as the next cycle's previous plan.
struct ActivePlan {
    id: u32,
    committed_step: usize,
    plan: Vec<Pose>,
    dt: f64,
}

/// Simulates `planner` closed-loop through `file`. The rollout starts as
/// early as the feature history allows, runs at the log's own 10 Hz frame
/// cadence, replans every `config.replan_interval`, and terminates early on
/// collision, on leaving the road, or when the planner hard-fails (the
/// latter is recorded as log status, not an error).
pub fn run_closed_loop(
    file: &ScenarioFile,
    planner: &dyn Planner,
    config: &SimConfig,
    features: &FeatureConfig,
) -> Result<SimLog, SimError> {
    config.validate()?;
    features.validate()?;
    let dt = config.dt();
    if (dt - BASE_DT).abs() > 1e-9 {
        return Err(SimError::Config(format!(
            "frequency {} Hz does not match the {BASE_DT} s log cadence",
            config.frequency
        )));
    }
    let k = resample_ratio(BASE_DT, features.dt)?;
    let start = features.past_raw_frames().max(k);
    let steps = config.steps();
    let needed = start + steps + features.future_raw_frames() + 1;
    if file.frames.len() < needed {
        return Err(SimError::ScenarioTooShort {
            id: file.metadata.scenario_id.clone(),
            needed,
            available: file.frames.len(),
        });
    }

    // Working copy of the log: driven ego states (and, in reactive mode,
    // propagated agent states) overwrite frames as the rollout reaches
    // them, so feature building sees the simulated world.
    let mut work = file.clone();
    let first = &work.frames[start].ego;
    let ego_dims = (first.length, first.width);
    let mut state = VehicleState {
        pose: Pose::new(first.x, first.y, first.yaw),
        speed: first.v,
        accel: first.a,
        steer: 0.0,
    };

    let map = &file.frames[start].map;
    let to_points = |pts: &[[f64; 2]]| pts.iter().map(|&p| Point::from(p)).collect();
    let left_boundary = Polyline::new(to_points(&map.left_boundary))?;
    let right_boundary = Polyline::new(to_points(&map.right_boundary))?;

    let mut reactive: BTreeMap<u64, ReactiveAgent> = BTreeMap::new();
    if config.mode == SimMode::Reactive {
        reactive = collect_reactive(file, start);
    }

    let mut tracker = Tracker::new(config.tracker, dt, config.wheelbase)?;
    let mut records: Vec<SimRecord> = Vec::with_capacity(steps + 1);
    let mut active: Option<ActivePlan> = None;
    let mut plan_count: u32 = 0;
    let mut status = SimStatus::Completed;
    let mut failure = None;

    for step in 0..=steps {
        let index = start + step;
        {
            let ego = &mut work.frames[index].ego;
            ego.x = state.pose.x;
            ego.y = state.pose.y;
            ego.yaw = state.pose.yaw;
            ego.v = state.speed;
            ego.a = state.accel;
        }
        let ego_quad = Quad::from_center_dims(
            state.pose.point(),
            state.pose.yaw,
            ego_dims.0,
            ego_dims.1,
        )?;

        // The terminal record for an aborted run echoes the last applied
        // commands rather than a freshly computed pair.
        let plain_record = |active: &Option<ActivePlan>| SimRecord {
            t: step as f64 * dt,
            ego: state,
            agents: agent_records(&work, index),
            active_plan: active.as_ref().map_or(0, |p| p.id),
            lateral_error: 0.0,
            speed_error: 0.0,
        };

        let mut collided = false;
        for raw in &work.frames[index].agents {
            if min_polygon_distance(&ego_quad, &raw.footprint()?) == 0.0 {
                collided = true;
                break;
            }
        }
        if collided {
            status = SimStatus::Collided;
            records.push(plain_record(&active));
            break;
        }
        let inside = |p: Point| {
            left_boundary.project(p).1 <= 0.0 && right_boundary.project(p).1 >= 0.0
        };
        if !ego_quad.vertices().iter().any(|&v| inside(v)) {
            status = SimStatus::OffRoad;
            records.push(plain_record(&active));
            break;
        }

        if step % config.steps_per_replan() == 0 {
            let scene = replan_scene(&work, index, features, k, active.as_ref(), &reactive)?;
            match planner.plan(&scene) {
                Ok(result) => {
                    let tf = EgoTransform::new(state.pose);
                    let plan: Vec<Pose> = result
                        .trajectory
                        .poses
                        .iter()
                        .map(|&p| tf.from_ego_pose(p))
                        .collect();
                    plan_count += 1;
                    active = Some(ActivePlan {
                        id: plan_count,
                        committed_step: step,
                        plan,
                        dt: result.trajectory.dt,
                    });
                }
                Err(error) => {
                    status = SimStatus::PlannerFailed;
                    failure = Some(error.to_string());
                    records.push(plain_record(&active));
                    break;
                }
            }
        }

        let plan = active.as_ref().expect("a plan is committed at step 0");
        let elapsed = (step - plan.committed_step) as f64 * dt;
        let command = tracker.command(&state, &plan.plan, plan.dt, elapsed)?;

        records.push(SimRecord {
            t: step as f64 * dt,
            ego: VehicleState {
                pose: state.pose,
                speed: state.speed,
                accel: command.accel,
                steer: command.steer,
            },
            agents: agent_records(&work, index),
            active_plan: plan.id,
            lateral_error: command.lateral_error,
            speed_error: command.speed_error,
        });

        if step < steps {
            if config.mode == SimMode::Reactive {
                advance_reactive_agents(&mut work, index, &state, &ego_quad, &mut reactive, dt)?;
            }
            state = step_kinematics(&state, command.accel, command.steer, dt, config.wheelbase);
        }
    }

    Ok(SimLog {
        scenario_id: file.metadata.scenario_id.clone(),
        planner: planner.name().to_string(),
        mode: config.mode,
        status,
        dt,
        start_frame: start,
        steps,
        failure,
        records,
    })
}

fn agent_records(work: &ScenarioFile, index: usize) -> Vec<AgentRecord> {
    work.frames[index]
        .agents
        .iter()
        .map(|a| AgentRecord {
            id: a.id,
            pose: Pose::new(a.x, a.y, a.yaw),
            speed: a.v,
        })
        .collect()
}

/// Builds the planner's view of the simulated world at `index`. The log
/// future still supplies the expert trajectory and replayed agent
/// predictions; the previous plan comes from the last committed trajectory
/// (or, on the first cycle, the log plan one feature step earlier), and
/// IDM-propagated agents get constant-speed path predictions.
fn replan_scene(
    work: &ScenarioFile,
    index: usize,
    features: &FeatureConfig,
    k: usize,
    active: Option<&ActivePlan>,
    reactive: &BTreeMap<u64, ReactiveAgent>,
) -> Result<ScenarioState, SimError> {
    let mut builder_config = features.clone();
    builder_config.include_previous_plan = false;
    let mut scene = build_scenario_state(work, index, &builder_config)?;

    let ego = &work.frames[index].ego;
    let tf = EgoTransform::new(Pose::new(ego.x, ego.y, ego.yaw));

    if features.include_previous_plan {
        let (global, plan_dt) = match active {
            Some(plan) => (plan.plan.clone(), plan.dt),
            None => {
                let poses = (1..=features.future_samples())
                    .map(|j| {
                        let e = &work.frames[index - k + j * k].ego;
                        Pose::new(e.x, e.y, e.yaw)
                    })
                    .collect();
                (poses, features.dt)
            }
        };
        let ego_frame: Vec<Pose> = global.iter().map(|&p| tf.to_ego_pose(p)).collect();
        scene.previous_plan = Some(Trajectory::new(ego_frame, plan_dt)?);
    }

    for agent in &mut scene.agents {
        if let Some(r) = reactive.get(&agent.id) {
            agent.predicted_positions = (1..=features.future_samples())
                .map(|m| {
                    let offset = m as f64 * features.dt;
                    (offset, tf.to_ego_point(r.path.point_at(r.s + r.v * offset)))
                })
                .collect();
        }
    }
    Ok(scene)
}

/// Registers every agent visible from `start` onward that qualifies for
/// IDM propagation, seeded from its state at `start` (or at its entry
/// frame, for agents that appear later).
fn collect_reactive(file: &ScenarioFile, start: usize) -> BTreeMap<u64, ReactiveAgent> {
    let mut map = BTreeMap::new();
    let mut seen = std::collections::BTreeSet::new();
    for frame in &file.frames[start..] {
        for raw in &frame.agents {
            if seen.insert(raw.id) {
                if let Some(agent) = reactive_agent(file, raw.id, Point::new(raw.x, raw.y), raw.v)
                {
                    map.insert(raw.id, agent);
                }
            }
        }
    }
    map
}

/// Builds the IDM state for one agent, or None when it is a pedestrian or
/// its log never travels far enough to define a path.
fn reactive_agent(file: &ScenarioFile, id: u64, at: Point, v: f64) -> Option<ReactiveAgent> {
    let mut category = AgentCategory::Unknown;
    let mut top_speed = 0.0_f64;
    let mut points: Vec<Point> = Vec::new();
    for frame in &file.frames {
        if let Some(raw) = frame.agents.iter().find(|a| a.id == id) {
            category = raw.category;
            top_speed = top_speed.max(raw.v);
            let p = Point::new(raw.x, raw.y);
            if points.last().is_none_or(|&q| q.distance(p) > 1e-6) {
                points.push(p);
            }
        }
    }
    if category == AgentCategory::Pedestrian || points.len() < 2 {
        return None;
    }
    let length: f64 = points.windows(2).map(|w| w[0].distance(w[1])).sum();
    if length < MIN_REACTIVE_PATH {
        return None;
    }
    let path = Polyline::new(points).ok()?;
    let (s, _) = path.project(at);
    Some(ReactiveAgent {
        path,
        s,
        v,
        params: IdmParams::with_desired_speed(top_speed.max(0.5)),
    })
}

/// One IDM step for every reactive agent: leaders are the simulated ego and
/// all other agents as they stand at frame `index`; results overwrite the
/// working log at `index + 1`. Agents entering at `index + 1` adopt their
/// logged state and react from the following step.
fn advance_reactive_agents(
    work: &mut ScenarioFile,
    index: usize,
    ego: &VehicleState,
    ego_quad: &Quad,
    reactive: &mut BTreeMap<u64, ReactiveAgent>,
    dt: f64,
) -> Result<(), SimError> {
    struct Candidate {
        id: Option<u64>,
        point: Point,
        speed: f64,
        footprint: Quad,
    }
    let mut candidates = vec![Candidate {
        id: None,
        point: ego.pose.point(),
        speed: ego.speed,
        footprint: ego_quad.clone(),
    }];
    for raw in &work.frames[index].agents {
        candidates.push(Candidate {
            id: Some(raw.id),
            point: Point::new(raw.x, raw.y),
            speed: raw.v,
            footprint: raw.footprint()?,
        });
    }

    let present_now: Vec<u64> = work.frames[index].agents.iter().map(|a| a.id).collect();
    let mut updates: Vec<(u64, f64, f64)> = Vec::new();
    for raw in &work.frames[index + 1].agents {
        if !present_now.contains(&raw.id) {
            // Enters at the next frame: its logged entry state stands and
            // propagation starts the step after.
            continue;
        }
        let Some(agent) = reactive.get(&raw.id) else {
            continue;
        };
        let center = agent.path.point_at(agent.s);
        let heading = agent.path.heading_at(agent.s);
        let footprint = Quad::from_center_dims(center, heading, raw.length, raw.width)?;
        let front = extent_along(&footprint, center, heading);

        let mut leader: Option<(f64, f64, f64)> = None; // (station, gap, speed)
        for candidate in &candidates {
            if candidate.id == Some(raw.id) {
                continue;
            }
            let (s_c, lateral) = agent.path.project(candidate.point);
            if s_c <= agent.s + 1e-9 || lateral.abs() >= IN_LANE_LATERAL {
                continue;
            }
            if leader.is_none_or(|(s_best, _, _)| s_c < s_best) {
                let rear = extent_along(
                    &candidate.footprint,
                    candidate.point,
                    agent.path.heading_at(s_c) + std::f64::consts::PI,
                );
                let gap = s_c - agent.s - front - rear;
                leader = Some((s_c, gap, candidate.speed));
            }
        }
        let accel = match leader {
            Some((_, gap, v_lead)) => idm_accel(agent.v, v_lead, gap, &agent.params),
            None => idm_accel(agent.v, agent.v, f64::INFINITY, &agent.params),
        };
        let s_next = agent.s + agent.v * dt;
        let v_next = (agent.v + accel * dt).max(0.0);
        updates.push((raw.id, s_next, v_next));
    }

    for (id, s, v) in updates {
        let agent = reactive.get_mut(&id).expect("updates only name registered agents");
        agent.s = s;
        agent.v = v;
        let p = agent.path.point_at(s);
        let heading = agent.path.heading_at(s);
        if let Some(raw) = work.frames[index + 1].agents.iter_mut().find(|a| a.id == id) {
            raw.x = p.x;
            raw.y = p.y;
            raw.yaw = heading;
            raw.v = v;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::sync::Mutex;

    use super::*;
    use crate::planners::{LogReplayPlanner, PlanError, PlanErrorKind, PlanResult};
    use crate::scenario::{
        synth_scenario, Metadata, RawAgent, RawEgo, RawFrame, RawMap, Template, SCHEMA_VERSION,
    };
    use crate::world::TrafficLight;

    fn straight_map() -> RawMap {
        let line = |y: f64| (0..=42).map(|i| [i as f64 * 5.0 - 10.0, y]).collect();
        RawMap {
            centerline: line(0.0),
            left_boundary: line(2.0),
            right_boundary: line(-2.0),
            speed_limit: 10.0,
            light: TrafficLight::Green,
        }
    }

    fn build_file(frames: Vec<RawFrame>) -> ScenarioFile {
        let file = ScenarioFile {
            schema_version: SCHEMA_VERSION,
            metadata: Metadata {
                scenario_id: "crafted".into(),
                scenario_tag: "test".into(),
            },
            frames,
        };
        file.validate().expect("crafted scenario must be valid");
        file
    }

    /// Ego braking from 8 m/s to rest between t = 5 and t = 9 s.
    fn braking_ego(t: f64) -> (f64, f64, f64) {
        if t < 5.0 {
            (8.0 * t, 8.0, 0.0)
        } else if t < 9.0 {
            let dt = t - 5.0;
            (40.0 + 8.0 * dt - dt * dt, 8.0 - 2.0 * dt, -2.0)
        } else {
            (56.0, 0.0, 0.0)
        }
    }

    fn default_run(file: &ScenarioFile, mode: SimMode) -> SimLog {
        let config = SimConfig {
            mode,
            ..SimConfig::default()
        };
        run_closed_loop(file, &LogReplayPlanner, &config, &FeatureConfig::default()).unwrap()
    }

    #[test]
    fn completed_run_has_full_records_and_a_plan_every_five_steps() {
        let file = synth_scenario(Template::LeadVehicleFollowing, 0);
        let log = default_run(&file, SimMode::Nonreactive);
        assert_eq!(log.status, SimStatus::Completed);
        assert_eq!(log.records.len(), 151);
        assert_eq!(log.start_frame, 20);
        for (i, record) in log.records.iter().enumerate() {
            assert_eq!(record.active_plan, (i / 5 + 1) as u32, "record {i}");
            assert!((record.t - i as f64 * 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn replaying_the_expert_tracks_the_log_closely() {
        for template in [
            Template::EmptyRoad,
            Template::RedLightApproach,
            Template::CurvedLane,
        ] {
            let file = synth_scenario(template, 1);
            let log = default_run(&file, SimMode::Nonreactive);
            assert_eq!(log.status, SimStatus::Completed, "{}", template.name());
            let worst = log
                .records
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let e = &file.frames[log.start_frame + i].ego;
                    r.ego.pose.point().distance(Point::new(e.x, e.y))
                })
                .fold(0.0_f64, f64::max);
            // Feedforward plus feedback holds hard braking within roughly
            // half a meter and stays within centimeters elsewhere.
            assert!(
                worst < 0.75,
                "{}: drove {worst:.3} m from the log",
                template.name()
            );
            let last = log.records.last().unwrap();
            let end = &file.frames[log.start_frame + 150].ego;
            assert!(
                last.ego.pose.point().distance(Point::new(end.x, end.y)) < 1.0,
                "{}: ended {:.3} m from the log endpoint",
                template.name(),
                last.ego.pose.point().distance(Point::new(end.x, end.y))
            );
            assert!(
                (last.ego.speed - end.v).abs() < 0.5,
                "{}: ended at {} m/s vs log {}",
                template.name(),
                last.ego.speed,
                end.v
            );
        }
    }

    #[test]
    fn logs_are_byte_deterministic() {
        let file = synth_scenario(Template::CrossingPedestrian, 7);
        let a = default_run(&file, SimMode::Reactive).to_json();
        let b = default_run(&file, SimMode::Reactive).to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn nonreactive_agents_replay_their_logs_verbatim() {
        let file = synth_scenario(Template::LeadVehicleFollowing, 2);
        let log = default_run(&file, SimMode::Nonreactive);
        for (i, record) in log.records.iter().enumerate() {
            let frame = &file.frames[log.start_frame + i];
            assert_eq!(record.agents.len(), frame.agents.len());
            for agent in &record.agents {
                let raw = frame.agents.iter().find(|a| a.id == agent.id).unwrap();
                assert_eq!(agent.pose.x, raw.x);
                assert_eq!(agent.pose.y, raw.y);
                assert_eq!(agent.speed, raw.v);
            }
        }
    }

    #[test]
    fn driving_into_a_parked_vehicle_registers_the_collision() {
        let frames = (0..251)
            .map(|i| {
                let t = i as f64 * 0.1;
                RawFrame {
                    t,
                    ego: RawEgo {
                        x: 8.0 * t,
                        y: 0.0,
                        yaw: 0.0,
                        v: 8.0,
                        a: 0.0,
                        length: 4.5,
                        width: 1.8,
                    },
                    agents: vec![RawAgent {
                        id: 1,
                        category: AgentCategory::Vehicle,
                        x: 60.0,
                        y: 0.0,
                        yaw: 0.0,
                        v: 0.0,
                        length: 4.5,
                        width: 1.8,
                    }],
                    map: straight_map(),
                }
            })
            .collect();
        let file = build_file(frames);
        let log = default_run(&file, SimMode::Nonreactive);
        assert_eq!(log.status, SimStatus::Collided);
        assert!(log.records.len() < 151);
        let last = log.records.last().unwrap();
        // Bumper-to-bumper contact: centers are within one vehicle length.
        assert!((last.ego.pose.x - 60.0).abs() < 4.5 + 1e-6);
    }

    #[test]
    fn veering_out_of_the_corridor_ends_off_road() {
        let yaw = 0.5_f64;
        let frames = (0..251)
            .map(|i| {
                let t = i as f64 * 0.1;
                RawFrame {
                    t,
                    ego: RawEgo {
                        x: 6.0 * t * yaw.cos(),
                        y: 6.0 * t * yaw.sin(),
                        yaw,
                        v: 6.0,
                        a: 0.0,
                        length: 4.5,
                        width: 1.8,
                    },
                    agents: vec![],
                    map: straight_map(),
                }
            })
            .collect();
        let file = build_file(frames);
        let log = default_run(&file, SimMode::Nonreactive);
        assert_eq!(log.status, SimStatus::OffRoad);
        assert!(log.records.len() < 151);
        let last = log.records.last().unwrap();
        assert!(last.ego.pose.y > 2.0, "ego should exit past the left boundary");
    }

    struct FailingPlanner;

    impl Planner for FailingPlanner {
        fn name(&self) -> &str {
            "refuses"
        }

        fn plan(&self, scene: &ScenarioState) -> Result<PlanResult, PlanError> {
            Err(self.fail(
                scene,
                PlanErrorKind::Transport {
                    attempts: 1,
                    message: "endpoint offline".into(),
                },
            ))
        }
    }

    #[test]
    fn planner_failure_is_a_terminal_status_not_an_error() {
        let file = synth_scenario(Template::EmptyRoad, 0);
        let config = SimConfig::default();
        let log =
            run_closed_loop(&file, &FailingPlanner, &config, &FeatureConfig::default()).unwrap();
        assert_eq!(log.status, SimStatus::PlannerFailed);
        assert_eq!(log.records.len(), 1);
        assert_eq!(log.records[0].active_plan, 0);
        let failure = log.failure.unwrap();
        assert!(failure.contains("refuses"), "{failure}");
        assert!(failure.contains("endpoint offline"), "{failure}");
    }

    #[test]
    fn reactive_follower_stops_behind_the_braking_ego_without_contact() {
        let frames = (0..251)
            .map(|i| {
                let t = i as f64 * 0.1;
                let (x, v, a) = braking_ego(t);
                RawFrame {
                    t,
                    ego: RawEgo {
                        x,
                        y: 0.0,
                        yaw: 0.0,
                        v,
                        a,
                        length: 4.5,
                        width: 1.8,
                    },
                    agents: vec![RawAgent {
                        id: 9,
                        category: AgentCategory::Vehicle,
                        // The log has the follower cruising forever; only the
                        // reactive model keeps it from rear-ending the ego.
                        x: -34.5 + 8.0 * t,
                        y: 0.0,
                        yaw: 0.0,
                        v: 8.0,
                        length: 4.5,
                        width: 1.8,
                    }],
                    map: straight_map(),
                }
            })
            .collect();
        let file = build_file(frames);
        let log = default_run(&file, SimMode::Reactive);
        assert_eq!(log.status, SimStatus::Completed, "{:?}", log.failure);

        let last = log.records.last().unwrap();
        let follower = &last.agents[0];
        assert!(last.ego.speed < 0.05, "ego should be stopped");
        assert!(follower.speed < 1.0, "follower still at {} m/s", follower.speed);
        let bumper_gap = (last.ego.pose.x - 2.25) - (follower.pose.x + 2.25);
        assert!(
            bumper_gap >= 2.0 - 0.1,
            "follower closed to {bumper_gap:.2} m"
        );
        assert!(bumper_gap <= 12.0, "follower hung back at {bumper_gap:.2} m");
    }

    #[test]
    fn reactive_pedestrians_replay_their_logs() {
        let file = synth_scenario(Template::CrossingPedestrian, 0);
        let pedestrian = file.frames[20]
            .agents
            .iter()
            .find(|a| a.category == AgentCategory::Pedestrian)
            .expect("template provides a pedestrian")
            .id;
        let log = default_run(&file, SimMode::Reactive);
        for (i, record) in log.records.iter().enumerate() {
            let frame = &file.frames[log.start_frame + i];
            let (sim, raw) = match (
                record.agents.iter().find(|a| a.id == pedestrian),
                frame.agents.iter().find(|a| a.id == pedestrian),
            ) {
                (Some(s), Some(r)) => (s, r),
                _ => continue,
            };
            assert_eq!(sim.pose.x, raw.x, "record {i}");
            assert_eq!(sim.pose.y, raw.y, "record {i}");
        }
    }

    struct SpyPlanner {
        previous_plans: Mutex<Vec<bool>>,
    }

    impl Planner for SpyPlanner {
        fn name(&self) -> &str {
            "spy"
        }

        fn plan(&self, scene: &ScenarioState) -> Result<PlanResult, PlanError> {
            self.previous_plans
                .lock()
                .unwrap()
                .push(scene.previous_plan.is_some());
            Ok(PlanResult {
                trajectory: scene.expert_future.clone(),
                chain: None,
                prompt_echo: None,
                latency: 0.0,
            })
        }
    }

    #[test]
    fn every_replan_cycle_sees_a_previous_plan() {
        let file = synth_scenario(Template::LeadVehicleFollowing, 4);
        let spy = SpyPlanner {
            previous_plans: Mutex::new(Vec::new()),
        };
        let config = SimConfig::default();
        let log = run_closed_loop(&file, &spy, &config, &FeatureConfig::default()).unwrap();
        assert_eq!(log.status, SimStatus::Completed);
        let seen = spy.previous_plans.into_inner().unwrap();
        assert_eq!(seen.len(), 31);
        assert!(seen.iter().all(|&p| p));
    }

    #[test]
    fn previous_plan_is_omitted_when_the_feature_is_off() {
        let file = synth_scenario(Template::EmptyRoad, 3);
        let spy = SpyPlanner {
            previous_plans: Mutex::new(Vec::new()),
        };
        let config = SimConfig::default();
        let features = FeatureConfig {
            include_previous_plan: false,
            ..FeatureConfig::default()
        };
        run_closed_loop(&file, &spy, &config, &features).unwrap();
        let seen = spy.previous_plans.into_inner().unwrap();
        assert!(!seen.is_empty());
        assert!(seen.iter().all(|&p| !p));
    }

    #[test]
    fn short_scenarios_are_rejected_with_the_required_length() {
        let mut file = synth_scenario(Template::EmptyRoad, 0);
        file.frames.truncate(100);
        let config = SimConfig::default();
        let err = run_closed_loop(&file, &LogReplayPlanner, &config, &FeatureConfig::default())
            .unwrap_err();
        match err {
            SimError::ScenarioTooShort {
                needed, available, ..
            } => {
                assert_eq!(needed, 251);
                assert_eq!(available, 100);
            }
            other => panic!("expected too-short rejection, got {other:?}"),
        }
    }

    #[test]
    fn off_cadence_frequencies_are_rejected() {
        let file = synth_scenario(Template::EmptyRoad, 0);
        let config = SimConfig {
            frequency: 5.0,
            ..SimConfig::default()
        };
        let err = run_closed_loop(&file, &LogReplayPlanner, &config, &FeatureConfig::default())
            .unwrap_err();
        assert!(matches!(err, SimError::Config(_)));
    }
}
