//! Scenario files: on-disk format, ingestion and validation, feature
//! building into planner-facing states, and synthetic template generation.

mod features;
mod schema;
mod synth;

pub use features::{
    build_scenario_state, correct_category, resample_future, resample_past, resample_ratio,
    FeatureConfig, BASE_DT,
};
pub use schema::{
    load_scenario, save_scenario, Metadata, RawAgent, RawEgo, RawFrame, RawMap, ScenarioFile,
    SCHEMA_VERSION,
};
pub use synth::{synth_scenario, Template, TEMPLATES};

use thiserror::Error;

/// Failures while loading, validating, or building from scenario files.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario validation failed at {context}: {message}")]
    Validation { context: String, message: String },
    #[error("frame {frame}: insufficient history (need {needed} past frames)")]
    InsufficientHistory { frame: usize, needed: usize },
    #[error("frame {frame}: insufficient future (need {needed} future frames)")]
    InsufficientFuture { frame: usize, needed: usize },
    #[error("resample ratio {dt} s is not an integer multiple of {base} s")]
    BadResampleRatio { dt: f64, base: f64 },
    #[error("unknown scenario template '{0}'")]
    UnknownTemplate(String),
    #[error(transparent)]
    World(#[from] crate::world::WorldError),
}
