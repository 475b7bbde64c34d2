//! Closed-loop motion-planning benchmark core: scene model, scenario files
//! and feature building, prompt serialization, rule-based reasoning chains,
//! planners, closed-loop simulation, and scoring.

pub mod chain;
pub mod fmt;
pub mod metrics;
pub mod planners;
pub mod prompt;
pub mod scenario;
pub mod sim;
pub mod world;
