//! On-disk scenario format: JSON with raw frames at 0.1 s resolution.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::world::{AgentCategory, Point, Quad, TrafficLight};

/// Current file schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Frame spacing of raw scenario logs, seconds.
const FRAME_DT: f64 = 0.1;

/// A raw scenario log: global-frame frames at 0.1 s resolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub metadata: Metadata,
    pub frames: Vec<RawFrame>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metadata {
    pub scenario_id: String,
    pub scenario_tag: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawFrame {
    /// Seconds from scenario start, a multiple of 0.1.
    pub t: f64,
    pub ego: RawEgo,
    pub agents: Vec<RawAgent>,
    pub map: RawMap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawEgo {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub v: f64,
    pub a: f64,
    pub length: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawAgent {
    pub id: u64,
    pub category: AgentCategory,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub v: f64,
    pub length: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawMap {
    pub centerline: Vec<[f64; 2]>,
    pub left_boundary: Vec<[f64; 2]>,
    pub right_boundary: Vec<[f64; 2]>,
    pub speed_limit: f64,
    pub light: TrafficLight,
}

impl RawEgo {
    pub fn footprint(&self) -> Result<Quad, ScenarioError> {
        Ok(Quad::from_center_dims(
            Point::new(self.x, self.y),
            self.yaw,
            self.length,
            self.width,
        )?)
    }
}

impl RawAgent {
    pub fn footprint(&self) -> Result<Quad, ScenarioError> {
        Ok(Quad::from_center_dims(
            Point::new(self.x, self.y),
            self.yaw,
            self.length,
            self.width,
        )?)
    }
}

impl ScenarioFile {
    /// Parses and validates a scenario from JSON text.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    /// Compact JSON rendering; inverse of [`ScenarioFile::from_json`].
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scenario files serialize without error")
    }

    /// Checks every file invariant: version, uniform 0.1 s frame spacing,
    /// constructible footprints, stable agent tracks, valid map.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |context: &str, message: String| {
            Err(ScenarioError::Validation {
                context: context.to_string(),
                message,
            })
        };
        if self.schema_version != SCHEMA_VERSION {
            return fail(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            );
        }
        if self.frames.is_empty() {
            return fail("frames", "scenario has no frames".to_string());
        }

        let mut track_shape: std::collections::BTreeMap<u64, (AgentCategory, f64, f64)> =
            std::collections::BTreeMap::new();

        for (i, frame) in self.frames.iter().enumerate() {
            let ctx = |field: &str| format!("frames[{i}].{field}");
            if !frame.t.is_finite() || (frame.t / FRAME_DT - (frame.t / FRAME_DT).round()).abs() > 1e-6
            {
                return fail(&ctx("t"), format!("{} is not a multiple of 0.1 s", frame.t));
            }
            if i > 0 {
                let gap = frame.t - self.frames[i - 1].t;
                if (gap - FRAME_DT).abs() > 1e-9 {
                    return fail(&ctx("t"), format!("non-uniform frame spacing: {gap:.3} s"));
                }
            }
            if frame.ego.v < 0.0 {
                return fail(&ctx("ego.v"), format!("negative ego speed {}", frame.ego.v));
            }
            frame.ego.footprint().map_err(|e| ScenarioError::Validation {
                context: ctx("ego"),
                message: e.to_string(),
            })?;

            let mut seen = std::collections::BTreeSet::new();
            for (j, agent) in frame.agents.iter().enumerate() {
                let actx = format!("frames[{i}].agents[{j}]");
                if !seen.insert(agent.id) {
                    return fail(&actx, format!("duplicate agent id {}", agent.id));
                }
                agent.footprint().map_err(|e| ScenarioError::Validation {
                    context: actx.clone(),
                    message: e.to_string(),
                })?;
                let shape = (agent.category, agent.length, agent.width);
                match track_shape.get(&agent.id) {
                    None => {
                        track_shape.insert(agent.id, shape);
                    }
                    Some(&prior) if prior != shape => {
                        return fail(
                            &actx,
                            format!("agent {} changes category or size across frames", agent.id),
                        );
                    }
                    Some(_) => {}
                }
            }

            if frame.map.centerline.len() < 2 {
                return fail(&ctx("map.centerline"), "needs at least 2 points".to_string());
            }
            if frame.map.left_boundary.len() < 2 {
                return fail(&ctx("map.left_boundary"), "needs at least 2 points".to_string());
            }
            if frame.map.right_boundary.len() < 2 {
                return fail(&ctx("map.right_boundary"), "needs at least 2 points".to_string());
            }
            if !(frame.map.speed_limit > 0.0) {
                return fail(
                    &ctx("map.speed_limit"),
                    format!("must be positive, got {}", frame.map.speed_limit),
                );
            }
        }
        Ok(())
    }

    /// Index of the frame at time `t`, if `t` falls on the 0.1 s grid.
    pub fn frame_at(&self, t: f64) -> Option<usize> {
        let start = self.frames.first()?.t;
        let idx = (t - start) / FRAME_DT;
        let rounded = idx.round();
        if (idx - rounded).abs() > 1e-6 || rounded < 0.0 {
            return None;
        }
        let i = rounded as usize;
        (i < self.frames.len()).then_some(i)
    }
}

/// Loads and validates a scenario file from disk.
pub fn load_scenario(path: &Path) -> Result<ScenarioFile, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioFile::from_json(&text)
}

/// Writes a scenario file as compact JSON.
pub fn save_scenario(file: &ScenarioFile, path: &Path) -> Result<(), ScenarioError> {
    fs::write(path, file.to_json()).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}
