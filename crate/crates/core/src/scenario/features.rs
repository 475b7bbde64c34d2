//! Feature building: raw 0.1 s logs into planner-facing scenario states.

use serde::{Deserialize, Serialize};

use super::schema::ScenarioFile;
use super::ScenarioError;
use crate::world::{
    transform_to_ego_frame, AgentCategory, AgentObject, EgoState, Frame, MapContext, Point,
    Polyline, Pose, ScenarioState, Trajectory, DEFAULT_WHEELBASE,
};

/// Time resolution of raw scenario logs, seconds.
pub const BASE_DT: f64 = 0.1;

/// Controls how raw frames are condensed into a [`ScenarioState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Past horizon in seconds (history ends at the current frame).
    pub past_horizon: f64,
    /// Future horizon in seconds.
    pub future_horizon: f64,
    /// Feature time step; must be an integer multiple of 0.1 s.
    pub dt: f64,
    /// Maximum agents retained, nearest first.
    pub max_agents: usize,
    /// Apply size-based category correction to unknown agents (CC).
    pub category_correction: bool,
    /// Fill the previous-cycle plan from the log (PT).
    pub include_previous_plan: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            past_horizon: 2.0,
            future_horizon: 8.0,
            dt: 0.5,
            max_agents: 32,
            category_correction: true,
            include_previous_plan: true,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        resample_ratio(BASE_DT, self.dt)?;
        for (name, horizon) in [
            ("past_horizon", self.past_horizon),
            ("future_horizon", self.future_horizon),
        ] {
            let steps = horizon / self.dt;
            if !(horizon > 0.0) || (steps - steps.round()).abs() > 1e-9 {
                return Err(ScenarioError::Validation {
                    context: format!("feature config {name}"),
                    message: format!("{horizon} s is not a positive multiple of dt {}", self.dt),
                });
            }
        }
        Ok(())
    }

    /// Raw 0.1 s frames of history required before the current frame.
    pub fn past_raw_frames(&self) -> usize {
        (self.past_horizon / BASE_DT).round() as usize
    }

    /// Raw 0.1 s frames of future required after the current frame.
    pub fn future_raw_frames(&self) -> usize {
        (self.future_horizon / BASE_DT).round() as usize
    }

    /// Future pose count at the feature dt (16 at defaults).
    pub fn future_samples(&self) -> usize {
        (self.future_horizon / self.dt).round() as usize
    }
}

/// Decimation ratio k = dt / base_dt, rejected unless integral.
pub fn resample_ratio(base_dt: f64, dt: f64) -> Result<usize, ScenarioError> {
    let ratio = dt / base_dt;
    if !(dt > 0.0) || (ratio - ratio.round()).abs() > 1e-6 || ratio < 0.5 {
        return Err(ScenarioError::BadResampleRatio { dt, base: base_dt });
    }
    Ok(ratio.round() as usize)
}

/// Decimates a past track (ending at the current sample) by keeping every
/// k-th sample anchored at the last one: 21 samples at k = 5 keep indices
/// 0, 5, 10, 15, 20.
pub fn resample_past<T: Copy>(samples: &[T], k: usize) -> Vec<T> {
    let last = samples.len().saturating_sub(1);
    samples
        .iter()
        .enumerate()
        .filter(|(i, _)| (last - i) % k == 0)
        .map(|(_, &s)| s)
        .collect()
}

/// Decimates a future track (starting one raw step after the current
/// sample) by keeping indices k-1, 2k-1, ...: 80 samples at k = 5 keep 16.
pub fn resample_future<T: Copy>(samples: &[T], k: usize) -> Vec<T> {
    samples
        .iter()
        .enumerate()
        .filter(|(i, _)| (i + 1) % k == 0)
        .map(|(_, &s)| s)
        .collect()
}

/// Reassigns unknown categories from footprint area: under 1.0 m² reads as
/// a pedestrian, 1.0 to 3.0 m² as a bicycle, larger as a vehicle. Known
/// categories pass through unchanged.
pub fn correct_category(mut object: AgentObject) -> AgentObject {
    if object.category == AgentCategory::Unknown {
        let area = object.footprint.area();
        object.category = if area < 1.0 {
            AgentCategory::Pedestrian
        } else if area <= 3.0 {
            AgentCategory::Bicycle
        } else {
            AgentCategory::Vehicle
        };
    }
    object
}

/// Builds the ego-frame planner view for `frame_index`: resampled ego
/// history, expert future, nearest agents with predicted positions, map
/// context, and (when configured) the previous-cycle plan taken from the
/// log one feature step earlier.
pub fn build_scenario_state(
    file: &ScenarioFile,
    frame_index: usize,
    config: &FeatureConfig,
) -> Result<ScenarioState, ScenarioError> {
    config.validate()?;
    let k = resample_ratio(BASE_DT, config.dt)?;
    let past_raw = config.past_raw_frames();
    let future_raw = config.future_raw_frames();

    if frame_index < past_raw || (config.include_previous_plan && frame_index < k) {
        return Err(ScenarioError::InsufficientHistory {
            frame: frame_index,
            needed: past_raw.max(k),
        });
    }
    if frame_index + future_raw >= file.frames.len() {
        return Err(ScenarioError::InsufficientFuture {
            frame: frame_index,
            needed: future_raw,
        });
    }

    let frame = &file.frames[frame_index];
    let ego_pose_at = |i: usize| {
        let e = &file.frames[i].ego;
        Pose::new(e.x, e.y, e.yaw)
    };

    let past_poses: Vec<Pose> = (frame_index - past_raw..=frame_index).map(ego_pose_at).collect();
    let past_trajectory = resample_past(&past_poses, k);

    let future_of = |start: usize| -> Vec<Pose> {
        let raw: Vec<Pose> = (start + 1..=start + future_raw).map(ego_pose_at).collect();
        resample_future(&raw, k)
    };
    let expert_future = Trajectory::new(future_of(frame_index), config.dt)?;
    let previous_plan = if config.include_previous_plan {
        Some(Trajectory::new(future_of(frame_index - k), config.dt)?)
    } else {
        None
    };

    let ego = EgoState {
        pose: ego_pose_at(frame_index),
        velocity: frame.ego.v,
        acceleration: frame.ego.a,
        footprint: frame.ego.footprint()?,
        past_trajectory,
        wheelbase: DEFAULT_WHEELBASE,
    };

    let mut agents = Vec::with_capacity(frame.agents.len());
    for raw in &frame.agents {
        let mut predicted = Vec::new();
        for j in 1..=future_raw {
            match file.frames[frame_index + j].agents.iter().find(|a| a.id == raw.id) {
                Some(a) => predicted.push((j as f64 * BASE_DT, Point::new(a.x, a.y))),
                None => break,
            }
        }
        let predicted_positions = resample_future(&predicted, k);
        let object = AgentObject {
            id: raw.id,
            category: raw.category,
            footprint: raw.footprint()?,
            pose: Pose::new(raw.x, raw.y, raw.yaw),
            velocity: raw.v,
            predicted_positions,
        };
        agents.push(if config.category_correction {
            correct_category(object)
        } else {
            object
        });
    }

    let ego_centroid = ego.footprint.centroid();
    agents.sort_by(|a, b| {
        let da = a.footprint.centroid().distance(ego_centroid);
        let db = b.footprint.centroid().distance(ego_centroid);
        da.total_cmp(&db).then(a.id.cmp(&b.id))
    });
    agents.truncate(config.max_agents);

    let to_polyline = |pts: &[[f64; 2]]| {
        Polyline::new(pts.iter().map(|&p| Point::from(p)).collect()).map_err(ScenarioError::from)
    };
    let map = MapContext {
        lane_centerline: to_polyline(&frame.map.centerline)?,
        left_boundary: to_polyline(&frame.map.left_boundary)?,
        right_boundary: to_polyline(&frame.map.right_boundary)?,
        speed_limit: frame.map.speed_limit,
        traffic_light: frame.map.light,
    };

    let state = ScenarioState {
        scenario_id: file.metadata.scenario_id.clone(),
        timestamp: frame.t,
        frame: Frame::Global,
        ego,
        agents,
        map,
        expert_future,
        previous_plan,
    };
    Ok(transform_to_ego_frame(state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Quad;

    #[test]
    fn past_resampling_keeps_every_fifth_from_the_end() {
        let samples: Vec<usize> = (0..21).collect();
        assert_eq!(resample_past(&samples, 5), vec![0, 5, 10, 15, 20]);
    }

    #[test]
    fn future_resampling_keeps_sixteen_of_eighty() {
        let samples: Vec<usize> = (0..80).collect();
        let kept = resample_future(&samples, 5);
        assert_eq!(kept.len(), 16);
        assert_eq!(kept[0], 4);
        assert_eq!(*kept.last().unwrap(), 79);
    }

    #[test]
    fn unit_ratio_is_identity() {
        let samples: Vec<usize> = (0..7).collect();
        assert_eq!(resample_past(&samples, 1), samples);
        assert_eq!(resample_future(&samples, 1), samples);
    }

    #[test]
    fn resampling_preserves_kept_timestamps() {
        let stamps: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let kept = resample_past(&stamps, 5);
        for (j, &t) in kept.iter().enumerate() {
            assert_eq!(t, j as f64 * 0.5);
        }
    }

    #[test]
    fn non_integer_ratio_rejected() {
        assert!(resample_ratio(0.1, 0.25).is_err());
        assert!(resample_ratio(0.1, 0.0).is_err());
        assert_eq!(resample_ratio(0.1, 0.5).unwrap(), 5);
    }

    fn unknown_agent(length: f64, width: f64) -> AgentObject {
        AgentObject {
            id: 9,
            category: AgentCategory::Unknown,
            footprint: Quad::from_center_dims(Point::new(0.0, 0.0), 0.0, length, width).unwrap(),
            pose: Pose::new(0.0, 0.0, 0.0),
            velocity: 0.0,
            predicted_positions: vec![],
        }
    }

    #[test]
    fn category_correction_by_area() {
        assert_eq!(
            correct_category(unknown_agent(0.6, 0.6)).category,
            AgentCategory::Pedestrian
        );
        assert_eq!(
            correct_category(unknown_agent(2.0, 1.0)).category,
            AgentCategory::Bicycle
        );
        assert_eq!(
            correct_category(unknown_agent(4.5, 2.0)).category,
            AgentCategory::Vehicle
        );
    }

    #[test]
    fn build_produces_ego_frame_state() {
        let file = crate::scenario::synth_scenario(
            crate::scenario::Template::LeadVehicleFollowing,
            0,
        );
        let state = build_scenario_state(&file, 20, &FeatureConfig::default()).unwrap();
        assert_eq!(state.frame, Frame::Ego);
        assert!(state.ego.pose.x.abs() < 1e-9);
        assert!(state.ego.pose.y.abs() < 1e-9);
        assert!(state.ego.pose.yaw.abs() < 1e-9);
        assert_eq!(state.ego.past_trajectory.len(), 5);
        assert_eq!(state.expert_future.len(), 16);
        assert_eq!(state.previous_plan.as_ref().unwrap().len(), 16);
        // Lane runs along +Y in the ego frame; the lead sits ahead.
        let lead = &state.agents[0];
        assert!(lead.pose.y > 15.0 && lead.pose.x.abs() < 1e-6);
        assert_eq!(lead.predicted_positions.len(), 16);
        assert!((lead.predicted_positions[0].0 - 0.5).abs() < 1e-12);
        // Expert future advances along +Y at the cruise speed.
        let first = state.expert_future.poses[0];
        assert!(first.x.abs() < 1e-9);
        assert!((first.y - state.ego.velocity * 0.5).abs() < 1e-6);
    }

    #[test]
    fn distance_ties_break_toward_lower_id() {
        let mut file = crate::scenario::synth_scenario(crate::scenario::Template::EmptyRoad, 0);
        for frame in &mut file.frames {
            let mk = |id: u64, y: f64| crate::scenario::RawAgent {
                id,
                category: AgentCategory::Vehicle,
                x: frame.ego.x + 12.0,
                y,
                yaw: 0.0,
                v: 0.0,
                length: 4.5,
                width: 1.8,
            };
            frame.agents = vec![mk(9, 5.0), mk(4, -5.0)];
        }
        let state = build_scenario_state(&file, 20, &FeatureConfig::default()).unwrap();
        assert_eq!(
            state.agents.iter().map(|a| a.id).collect::<Vec<_>>(),
            vec![4, 9]
        );
    }

    #[test]
    fn insufficient_room_rejected() {
        let file = crate::scenario::synth_scenario(crate::scenario::Template::EmptyRoad, 0);
        let config = FeatureConfig::default();
        assert!(matches!(
            build_scenario_state(&file, 10, &config),
            Err(ScenarioError::InsufficientHistory { .. })
        ));
        assert!(matches!(
            build_scenario_state(&file, 200, &config),
            Err(ScenarioError::InsufficientFuture { .. })
        ));
    }

    #[test]
    fn category_correction_passthrough_and_idempotent() {
        let mut v = unknown_agent(4.5, 2.0);
        v.category = AgentCategory::Vehicle;
        assert_eq!(correct_category(v.clone()).category, AgentCategory::Vehicle);
        let once = correct_category(unknown_agent(0.6, 0.6));
        let twice = correct_category(once.clone());
        assert_eq!(once.category, twice.category);
    }
}
