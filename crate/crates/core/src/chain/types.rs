//! Chain record types and the constants that drive rule-based generation.

use serde::{Deserialize, Serialize};

use super::ChainError;
use crate::world::Sector;

/// Coarse maneuver choices for step 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Maneuver {
    GoStraight,
    TurnLeft,
    TurnRight,
    Stop,
}

impl Maneuver {
    pub fn label(&self) -> &'static str {
        match self {
            Maneuver::GoStraight => "go-straight",
            Maneuver::TurnLeft => "turn-left",
            Maneuver::TurnRight => "turn-right",
            Maneuver::Stop => "stop",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "go-straight" => Maneuver::GoStraight,
            "turn-left" => Maneuver::TurnLeft,
            "turn-right" => Maneuver::TurnRight,
            "stop" => Maneuver::Stop,
            _ => return None,
        })
    }
}

/// Step 1: the preliminary action choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoarseAction {
    pub maneuver: Maneuver,
}

/// Alert severity. Caution means the minimum polygon distance falls below
/// 1.5 m; attention covers [1.5, 3.0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlertLevel {
    Attention,
    Caution,
}

impl AlertLevel {
    pub fn label(&self) -> &'static str {
        match self {
            AlertLevel::Attention => "attention",
            AlertLevel::Caution => "caution",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "attention" => AlertLevel::Attention,
            "caution" => AlertLevel::Caution,
            _ => return None,
        })
    }
}

/// Step 2: one per-agent collision risk found along the nominal path.
/// Distances are stored already rounded to 2 decimals so the level bands
/// and the rendered text agree exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionAlert {
    pub agent_id: u64,
    pub min_distance: f64,
    pub time_offset: f64,
    pub sector: Sector,
    pub level: AlertLevel,
}

/// Traffic-light ruling for step 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LightRuling {
    Proceed,
    PrepareToStop,
    Stop,
    NotApplicable,
}

impl LightRuling {
    pub fn label(&self) -> &'static str {
        match self {
            LightRuling::Proceed => "proceed",
            LightRuling::PrepareToStop => "prepare-to-stop",
            LightRuling::Stop => "stop",
            LightRuling::NotApplicable => "not-applicable",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "proceed" => LightRuling::Proceed,
            "prepare-to-stop" => LightRuling::PrepareToStop,
            "stop" => LightRuling::Stop,
            "not-applicable" => LightRuling::NotApplicable,
            _ => return None,
        })
    }
}

/// Speed standing relative to the lane limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedTier {
    Safe,
    NoAccelerate,
    Decelerate,
}

impl SpeedTier {
    pub fn label(&self) -> &'static str {
        match self {
            SpeedTier::Safe => "safe",
            SpeedTier::NoAccelerate => "no-accelerate",
            SpeedTier::Decelerate => "decelerate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "safe" => SpeedTier::Safe,
            "no-accelerate" => SpeedTier::NoAccelerate,
            "decelerate" => SpeedTier::Decelerate,
            _ => return None,
        })
    }
}

/// Step 3: environment assessment. Besides the three rulings it records two
/// scene facts step 4 needs and the final-action rules consume: whether a
/// red-light stop point lies within reach over the horizon, and whether the
/// ego has clear headroom below the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvAssessment {
    pub light_ruling: LightRuling,
    pub speed_tier: SpeedTier,
    pub boundary_violation: bool,
    pub stop_point_in_horizon: bool,
    pub well_below_limit: bool,
}

impl EnvAssessment {
    /// The stand-in used by step 4 when step 3 is disabled: everything
    /// permitted, nothing demanded.
    pub fn permissive() -> Self {
        Self {
            light_ruling: LightRuling::Proceed,
            speed_tier: SpeedTier::Safe,
            boundary_violation: false,
            stop_point_in_horizon: false,
            well_below_limit: false,
        }
    }
}

/// Speed refinement applied to the coarse maneuver in step 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedModifier {
    Accelerate,
    Maintain,
    Decelerate,
    Stop,
}

impl SpeedModifier {
    pub fn label(&self) -> &'static str {
        match self {
            SpeedModifier::Accelerate => "accelerate",
            SpeedModifier::Maintain => "maintain",
            SpeedModifier::Decelerate => "decelerate",
            SpeedModifier::Stop => "stop",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "accelerate" => SpeedModifier::Accelerate,
            "maintain" => SpeedModifier::Maintain,
            "decelerate" => SpeedModifier::Decelerate,
            "stop" => SpeedModifier::Stop,
            _ => return None,
        })
    }
}

/// Step 4: the final action. A stop maneuver always carries the stop
/// modifier; the constructor normalizes this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalAction {
    pub maneuver: Maneuver,
    pub speed_modifier: SpeedModifier,
}

impl FinalAction {
    pub fn new(maneuver: Maneuver, speed_modifier: SpeedModifier) -> Self {
        let speed_modifier = if maneuver == Maneuver::Stop {
            SpeedModifier::Stop
        } else {
            speed_modifier
        };
        Self {
            maneuver,
            speed_modifier,
        }
    }
}

/// Which chain steps are enabled. Step 4 requires step 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSteps {
    pub s1: bool,
    pub s2: bool,
    pub s3: bool,
    pub s4: bool,
}

impl ChainSteps {
    pub fn full() -> Self {
        Self {
            s1: true,
            s2: true,
            s3: true,
            s4: true,
        }
    }

    pub fn none() -> Self {
        Self {
            s1: false,
            s2: false,
            s3: false,
            s4: false,
        }
    }

    /// The cumulative prefixes used by the step ablations: none, s1,
    /// s1+s2, s1+s2+s3, full.
    pub fn prefixes() -> [ChainSteps; 5] {
        let mk = |n: usize| ChainSteps {
            s1: n >= 1,
            s2: n >= 2,
            s3: n >= 3,
            s4: n >= 4,
        };
        [mk(0), mk(1), mk(2), mk(3), mk(4)]
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        if self.s4 && !self.s1 {
            return Err(ChainError::InvalidStepSubset);
        }
        Ok(())
    }

    /// Compact form like "s1+s2+s3+s4", or "none".
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        for (on, name) in [
            (self.s1, "s1"),
            (self.s2, "s2"),
            (self.s3, "s3"),
            (self.s4, "s4"),
        ] {
            if on {
                parts.push(name);
            }
        }
        if parts.is_empty() {
            "none".to_string()
        } else {
            parts.join("+")
        }
    }
}

/// A generated or parsed reasoning chain. Disabled steps are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructChain {
    pub step1: Option<CoarseAction>,
    pub step2: Option<Vec<CollisionAlert>>,
    pub step3: Option<EnvAssessment>,
    pub step4: Option<FinalAction>,
    pub enabled: ChainSteps,
}

impl InstructChain {
    /// The "chain unavailable" value: no steps at all.
    pub fn empty() -> Self {
        Self {
            step1: None,
            step2: None,
            step3: None,
            step4: None,
            enabled: ChainSteps::none(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.step1.is_none() && self.step2.is_none() && self.step3.is_none() && self.step4.is_none()
    }
}

/// Every constant behind the rule-based chain, in one place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainParams {
    /// Net centerline heading change that separates straight from a turn,
    /// radians. The boundary belongs to the turn.
    pub turn_threshold: f64,
    /// Outer alert radius, meters; alerts exist strictly below this.
    pub attention_radius: f64,
    /// Inner alert radius, meters; caution strictly below this.
    pub caution_radius: f64,
    /// Fraction of the limit below which speed reads as safe.
    pub safe_speed_fraction: f64,
    /// Fraction of the limit below which acceleration is allowed.
    pub accel_headroom_fraction: f64,
    /// Acceleration profile for the accelerate modifier, m/s².
    pub accelerate_rate: f64,
    /// Deceleration magnitude for the decelerate modifier, m/s².
    pub decelerate_rate: f64,
    /// Deceleration magnitude for the stop modifier, m/s².
    pub stop_rate: f64,
    /// Extra reach added to v * horizon when testing whether a red-light
    /// stop point is within the horizon, meters. Keeps a slow or stopped
    /// ego committed to the stop.
    pub stop_buffer: f64,
    /// Planning horizon for the chain, seconds.
    pub horizon: f64,
    /// Time step for collision forecasting and trajectories, seconds.
    pub dt: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            turn_threshold: 15.0_f64.to_radians(),
            attention_radius: 3.0,
            caution_radius: 1.5,
            safe_speed_fraction: 0.9,
            accel_headroom_fraction: 0.8,
            accelerate_rate: 1.0,
            decelerate_rate: 2.0,
            stop_rate: 3.0,
            stop_buffer: 5.0,
            horizon: 8.0,
            dt: 0.5,
        }
    }
}
