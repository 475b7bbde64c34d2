//! Prompt assembly: fixed text templates that serialize an ego-frame scene
//! into an instruction text (system description plus task instructions) and
//! an input text (observation plus ego state).
//!
//! The templates are frozen by golden files; every number is rendered at
//! 2 decimals so prompts are byte-stable and parse back exactly.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fmt::fmt2;
use crate::scenario::{correct_category, FeatureConfig};
use crate::world::{AgentCategory, Frame, Point, Pose, ScenarioState};

/// Prompt size ceiling, in budget units of 4 characters each.
pub const TOKEN_BUDGET: usize = 12_288;

/// Predicted agent positions are rendered at this spacing, seconds.
pub const PREDICTION_SPACING: f64 = 1.0;
/// ... up to this offset, seconds.
pub const PREDICTION_EXTENT: f64 = 4.0;

/// The task instructions that can be included in a prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Instruction {
    CoarseAction,
    RefinedAction,
    CollisionAvoidance,
    TrafficSignals,
    SpeedLimit,
}

impl Instruction {
    pub const ALL: [Instruction; 5] = [
        Instruction::CoarseAction,
        Instruction::RefinedAction,
        Instruction::CollisionAvoidance,
        Instruction::TrafficSignals,
        Instruction::SpeedLimit,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Instruction::CoarseAction => "coarse-action",
            Instruction::RefinedAction => "refined-action",
            Instruction::CollisionAvoidance => "collision-avoidance",
            Instruction::TrafficSignals => "traffic-signals",
            Instruction::SpeedLimit => "speed-limit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Instruction::ALL.iter().copied().find(|i| i.label() == s)
    }

    /// The sentence this instruction contributes to the prompt.
    fn text(&self) -> &'static str {
        match self {
            Instruction::CoarseAction => {
                "Decide a coarse maneuver first: go-straight, turn-left, turn-right, or stop."
            }
            Instruction::RefinedAction => {
                "Refine the maneuver with a speed modifier: accelerate, maintain, decelerate, or stop."
            }
            Instruction::CollisionAvoidance => {
                "Forecast collisions along your path and flag any agent whose footprint comes closer than 3.00; mark distances under 1.50 as caution."
            }
            Instruction::TrafficSignals => {
                "Obey the traffic light: stop for red when the stop point is within reach, prepare to stop on yellow, proceed on green."
            }
            Instruction::SpeedLimit => "Keep your speed at or below the posted speed limit.",
        }
    }
}

/// Which instructions a prompt carries and which input-side extras are on:
/// the previous-plan section (PT) and render-time category correction (CC).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct InstructionConfig {
    pub enabled_instructions: BTreeSet<Instruction>,
    pub include_previous_plan: bool,
    pub category_correction: bool,
}

impl Default for InstructionConfig {
    fn default() -> Self {
        Self {
            enabled_instructions: Instruction::ALL.into_iter().collect(),
            include_previous_plan: true,
            category_correction: true,
        }
    }
}

impl InstructionConfig {
    pub fn validate(&self) -> Result<(), PromptError> {
        let e = &self.enabled_instructions;
        if e.contains(&Instruction::RefinedAction) && !e.contains(&Instruction::CoarseAction) {
            return Err(PromptError::RefinedRequiresCoarse);
        }
        Ok(())
    }
}

/// A fully assembled prompt: the instruction text (system description plus
/// task instructions) and the input text (observation plus ego state), with
/// the feature configuration that produced the scene echoed for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub instruction_text: String,
    pub input_text: String,
    pub config_echo: FeatureConfig,
}

impl PromptBundle {
    /// Budget units consumed: one per 4 characters, rounded up.
    pub fn estimate_units(&self) -> usize {
        let chars = self.instruction_text.chars().count() + self.input_text.chars().count();
        chars.div_ceil(4)
    }
}

/// Failures assembling a prompt.
#[derive(Debug, Error)]
pub enum PromptError {
    #[error("the refined-action instruction requires coarse-action")]
    RefinedRequiresCoarse,
    #[error("previous-plan section requested but the scene has no previous plan")]
    PreviousPlanMissing,
    #[error("prompt estimate {estimate} units exceeds the {budget}-unit budget")]
    BudgetExceeded { estimate: usize, budget: usize },
}

fn fmt_point(p: Point) -> String {
    format!("({}, {})", fmt2(p.x), fmt2(p.y))
}

fn fmt_pose(p: Pose) -> String {
    format!("({}, {}, {})", fmt2(p.x), fmt2(p.y), fmt2(p.yaw))
}

fn fmt_points(points: &[Point]) -> String {
    points.iter().map(|&p| fmt_point(p)).collect::<Vec<_>>().join(", ")
}

fn fmt_poses(poses: &[Pose]) -> String {
    poses.iter().map(|&p| fmt_pose(p)).collect::<Vec<_>>().join(", ")
}

/// The fixed system description: coordinate conventions, the quadrilateral
/// object representation, and the planning objectives. Byte-stable.
pub fn render_system_description() -> String {
    "\
You are the motion planner of an autonomous vehicle.
All positions are given in the ego frame: the vehicle sits at the origin, the forward direction aligns with the positive Y-axis, the positive X-axis points to the right, and yaw is measured counterclockwise from the positive X-axis in radians, so the ego heading reads 0.00.
Every object is described by its footprint, a convex quadrilateral listed as four (x, y) vertices in counterclockwise order.
Consider the scenario, plan the action to take, and generate the trajectory that executes it.
Respond with your reasoning steps, then a final section starting with the line \"Trajectory:\" followed by one pose per line as (x, y, yaw), at 0.50 second spacing over the next 8.00 seconds.
"
    .to_string()
}

/// One block per agent in stored order, then the map block. With the CC
/// flag set, agents still categorized as unknown are relabeled from their
/// footprint area before rendering.
pub fn render_observation(scene: &ScenarioState, config: &InstructionConfig) -> String {
    debug_assert_eq!(scene.frame, Frame::Ego, "observation expects an ego-frame scene");
    let mut out = String::from("Observation:\n");
    for agent in &scene.agents {
        let category = if config.category_correction && agent.category == AgentCategory::Unknown {
            correct_category(agent.clone()).category
        } else {
            agent.category
        };
        let predicted: Vec<Point> = agent
            .predicted_positions
            .iter()
            .filter(|(offset, _)| {
                let cycles = offset / PREDICTION_SPACING;
                (cycles - cycles.round()).abs() < 1e-9
                    && *offset >= PREDICTION_SPACING - 1e-9
                    && *offset <= PREDICTION_EXTENT + 1e-9
            })
            .map(|&(_, p)| p)
            .collect();
        let predicted = if predicted.is_empty() {
            "none".to_string()
        } else {
            fmt_points(&predicted)
        };
        out.push_str(&format!(
            "Agent {} ({}):\nfootprint: {}\npose: {}\nvelocity: {}\npredicted positions: {}\n",
            agent.id,
            category.label(),
            fmt_points(agent.footprint.vertices()),
            fmt_pose(agent.pose),
            fmt2(agent.velocity),
            predicted,
        ));
    }
    out.push_str(&format!(
        "Map:\ntraffic light: {}\nspeed limit: {}\ncenterline: {}\nleft boundary: {}\nright boundary: {}\n",
        scene.map.traffic_light.label(),
        fmt2(scene.map.speed_limit),
        fmt_points(scene.map.lane_centerline.points()),
        fmt_points(scene.map.left_boundary.points()),
        fmt_points(scene.map.right_boundary.points()),
    ));
    out
}

/// The ego block: pose, velocity, acceleration, the past trajectory, and —
/// when the PT flag is set — the previous frame's committed plan.
pub fn render_ego_state(
    scene: &ScenarioState,
    config: &InstructionConfig,
) -> Result<String, PromptError> {
    debug_assert_eq!(scene.frame, Frame::Ego, "ego state expects an ego-frame scene");
    let mut out = format!(
        "Ego state:\npose: {}\nvelocity: {}\nacceleration: {}\npast trajectory: {}\n",
        fmt_pose(scene.ego.pose),
        fmt2(scene.ego.velocity),
        fmt2(scene.ego.acceleration),
        fmt_poses(&scene.ego.past_trajectory),
    );
    if config.include_previous_plan {
        let plan = scene
            .previous_plan
            .as_ref()
            .ok_or(PromptError::PreviousPlanMissing)?;
        out.push_str(&format!("previous plan: {}\n", fmt_poses(&plan.poses)));
    }
    Ok(out)
}

/// Assembles the full prompt and enforces the token budget. The instruction
/// toggles shape only the instruction text; the PT and CC flags shape only
/// the input text.
pub fn build_prompt(
    scene: &ScenarioState,
    config: &InstructionConfig,
    features: &FeatureConfig,
) -> Result<PromptBundle, PromptError> {
    config.validate()?;

    let mut instruction_text = render_system_description();
    instruction_text.push_str("Instructions:\n");
    let mut n = 0;
    for instruction in Instruction::ALL {
        if config.enabled_instructions.contains(&instruction) {
            n += 1;
            instruction_text.push_str(&format!("{n}. {}\n", instruction.text()));
        }
    }

    let mut input_text = render_observation(scene, config);
    input_text.push('\n');
    input_text.push_str(&render_ego_state(scene, config)?);

    let bundle = PromptBundle {
        instruction_text,
        input_text,
        config_echo: features.clone(),
    };
    let estimate = bundle.estimate_units();
    if estimate > TOKEN_BUDGET {
        return Err(PromptError::BudgetExceeded {
            estimate,
            budget: TOKEN_BUDGET,
        });
    }
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{
        AgentObject, EgoState, MapContext, Polyline, Quad, TrafficLight, Trajectory,
        DEFAULT_WHEELBASE,
    };
    use std::f64::consts::FRAC_PI_2;

    fn ego_scene() -> ScenarioState {
        let line = |x: f64| {
            Polyline::new((0..5).map(|i| Point::new(x, i as f64 * 10.0 - 10.0)).collect()).unwrap()
        };
        ScenarioState {
            scenario_id: "prompt-test".to_string(),
            timestamp: 2.0,
            frame: Frame::Ego,
            ego: EgoState {
                pose: Pose::new(0.0, 0.0, 0.0),
                velocity: 5.0,
                acceleration: 0.25,
                footprint: Quad::from_center_dims(Point::new(0.0, 0.0), FRAC_PI_2, 4.5, 1.8)
                    .unwrap(),
                past_trajectory: (0..5)
                    .map(|i| Pose::new(0.0, -2.5 * (4 - i) as f64, 0.0))
                    .collect(),
                wheelbase: DEFAULT_WHEELBASE,
            },
            agents: vec![AgentObject {
                id: 2,
                category: AgentCategory::Unknown,
                footprint: Quad::from_center_dims(Point::new(2.0, 5.0), FRAC_PI_2, 0.6, 0.6)
                    .unwrap(),
                pose: Pose::new(2.0, 5.0, 0.0),
                velocity: 1.0,
                predicted_positions: (1..=16)
                    .map(|j| (0.5 * j as f64, Point::new(2.0, 5.0 + 0.5 * j as f64)))
                    .collect(),
            }],
            map: MapContext {
                lane_centerline: line(0.0),
                left_boundary: line(-2.0),
                right_boundary: line(2.0),
                speed_limit: 15.0,
                traffic_light: TrafficLight::Green,
            },
            expert_future: Trajectory::new(
                (1..=16).map(|j| Pose::new(0.0, 2.5 * j as f64, 0.0)).collect(),
                0.5,
            )
            .unwrap(),
            previous_plan: Some(
                Trajectory::new(
                    (1..=16).map(|j| Pose::new(0.0, 2.4 * j as f64, 0.0)).collect(),
                    0.5,
                )
                .unwrap(),
            ),
        }
    }

    #[test]
    fn system_description_is_stable() {
        assert_eq!(render_system_description(), render_system_description());
        assert!(render_system_description()
            .contains("the forward direction aligns with the positive Y-axis"));
        assert!(render_system_description().contains("generate the trajectory"));
    }

    #[test]
    fn observation_lists_agents_then_map() {
        let scene = ego_scene();
        let text = render_observation(&scene, &InstructionConfig::default());
        let agent_at = text.find("Agent 2").unwrap();
        let map_at = text.find("Map:").unwrap();
        assert!(agent_at < map_at);
        assert!(text.contains("pose: (2.00, 5.00, 0.00)"));
        assert!(text.contains("traffic light: green"));
        assert!(text.contains("speed limit: 15.00"));
        // Predictions thin to 1 s spacing up to 4 s.
        assert!(text.contains(
            "predicted positions: (2.00, 6.00), (2.00, 7.00), (2.00, 8.00), (2.00, 9.00)"
        ));
    }

    #[test]
    fn category_correction_applies_at_render_time() {
        let scene = ego_scene();
        let on = render_observation(&scene, &InstructionConfig::default());
        // 0.36 m² footprint: unknown reads as pedestrian under CC.
        assert!(on.contains("Agent 2 (pedestrian):"));
        let off = InstructionConfig {
            category_correction: false,
            ..Default::default()
        };
        assert!(render_observation(&scene, &off).contains("Agent 2 (unknown):"));
    }

    #[test]
    fn empty_agent_list_leaves_only_map_block() {
        let mut scene = ego_scene();
        scene.agents.clear();
        let text = render_observation(&scene, &InstructionConfig::default());
        assert!(!text.contains("Agent"));
        assert!(text.starts_with("Observation:\nMap:\n"));
    }

    #[test]
    fn ego_state_previous_plan_gating() {
        let scene = ego_scene();
        let config = InstructionConfig::default();
        let text = render_ego_state(&scene, &config).unwrap();
        assert!(text.contains("previous plan: "));
        assert_eq!(text.matches("(0.00, 2.40, 0.00)").count(), 1);

        let off = InstructionConfig {
            include_previous_plan: false,
            ..Default::default()
        };
        assert!(!render_ego_state(&scene, &off).unwrap().contains("previous plan"));

        let mut bare = ego_scene();
        bare.previous_plan = None;
        assert!(matches!(
            render_ego_state(&bare, &config),
            Err(PromptError::PreviousPlanMissing)
        ));
    }

    #[test]
    fn toggles_touch_only_their_side() {
        let scene = ego_scene();
        let features = FeatureConfig::default();
        let full = build_prompt(&scene, &InstructionConfig::default(), &features).unwrap();

        let mut no_limit = InstructionConfig::default();
        no_limit.enabled_instructions.remove(&Instruction::SpeedLimit);
        let trimmed = build_prompt(&scene, &no_limit, &features).unwrap();
        assert!(trimmed.instruction_text.len() < full.instruction_text.len());
        assert_eq!(trimmed.input_text, full.input_text);

        let no_pt = InstructionConfig {
            include_previous_plan: false,
            ..Default::default()
        };
        let bare = build_prompt(&scene, &no_pt, &features).unwrap();
        assert_eq!(bare.instruction_text, full.instruction_text);
        assert_ne!(bare.input_text, full.input_text);
    }

    #[test]
    fn refined_requires_coarse() {
        let mut config = InstructionConfig::default();
        config.enabled_instructions.remove(&Instruction::CoarseAction);
        assert!(matches!(
            build_prompt(&ego_scene(), &config, &FeatureConfig::default()),
            Err(PromptError::RefinedRequiresCoarse)
        ));
        config.enabled_instructions.remove(&Instruction::RefinedAction);
        assert!(build_prompt(&ego_scene(), &config, &FeatureConfig::default()).is_ok());
    }

    #[test]
    fn build_is_deterministic_and_within_budget() {
        let scene = ego_scene();
        let features = FeatureConfig::default();
        let a = build_prompt(&scene, &InstructionConfig::default(), &features).unwrap();
        let b = build_prompt(&scene, &InstructionConfig::default(), &features).unwrap();
        assert_eq!(a, b);
        assert!(a.estimate_units() <= TOKEN_BUDGET);
    }

    #[test]
    fn numbers_round_trip_at_two_decimals() {
        let scene = ego_scene();
        let bundle =
            build_prompt(&scene, &InstructionConfig::default(), &FeatureConfig::default())
                .unwrap();
        let text = format!("{}{}", bundle.instruction_text, bundle.input_text);
        let mut count = 0;
        for raw in text.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-')) {
            // A trailing period is sentence punctuation, not decimals.
            let token = raw.strip_suffix('.').unwrap_or(raw);
            if token.contains('.') && token.len() > 1 {
                let value: f64 = token.parse().expect("numeric token parses");
                assert_eq!(fmt2(value), token, "token {token} is canonical");
                count += 1;
            }
        }
        assert!(count > 50, "expected plenty of numbers, saw {count}");
    }
}
