//! The line-oriented text grammar for chain + trajectory responses.
//!
//! Rendering is canonical: section headers `Step N:` in order, one
//! `key: value` line per fact, then a mandatory `Trajectory:` section with
//! one `(x, y, yaw)` pose per line, all numbers at 2 decimals. Parsing is
//! tolerant of the reasoning text but strict about the trajectory: any
//! malformed step section degrades the whole chain to empty, while a
//! missing or malformed trajectory is an error.

use std::str::FromStr;

use super::types::{
    AlertLevel, ChainParams, ChainSteps, CoarseAction, CollisionAlert, EnvAssessment, FinalAction,
    InstructChain, LightRuling, Maneuver, SpeedModifier, SpeedTier,
};
use super::ChainError;
use crate::fmt::fmt2;
use crate::world::{Pose, Sector, Trajectory};

/// Pose spacing assumed when parsing a response, seconds.
pub const DEFAULT_TRAJECTORY_DT: f64 = 0.5;

/// Renders the chain's present steps and the trajectory in the canonical
/// grammar. Absent steps produce no section; an enabled step 2 with no
/// alerts renders the literal line `none`.
pub fn render_response(chain: &InstructChain, trajectory: &Trajectory) -> String {
    let mut sections: Vec<String> = Vec::new();

    if let Some(coarse) = chain.step1 {
        sections.push(format!("Step 1:\nmaneuver: {}", coarse.maneuver.label()));
    }
    if let Some(alerts) = &chain.step2 {
        let body = if alerts.is_empty() {
            "none".to_string()
        } else {
            alerts
                .iter()
                .map(|a| {
                    format!(
                        "alert: agent {}, distance {}, time {}, sector {}, level {}",
                        a.agent_id,
                        fmt2(a.min_distance),
                        fmt2(a.time_offset),
                        a.sector.label(),
                        a.level.label()
                    )
                })
                .collect::<Vec<_>>()
                .join("\n")
        };
        sections.push(format!("Step 2:\n{body}"));
    }
    if let Some(env) = chain.step3 {
        sections.push(format!(
            "Step 3:\nlight: {}\nspeed: {}\nboundary: {}\nstop-ahead: {}\nheadroom: {}",
            env.light_ruling.label(),
            env.speed_tier.label(),
            if env.boundary_violation { "crossed" } else { "ok" },
            if env.stop_point_in_horizon { "yes" } else { "no" },
            if env.well_below_limit { "yes" } else { "no" },
        ));
    }
    if let Some(action) = chain.step4 {
        sections.push(format!(
            "Step 4:\nmaneuver: {}\nspeed-modifier: {}",
            action.maneuver.label(),
            action.speed_modifier.label()
        ));
    }

    let poses = trajectory
        .poses
        .iter()
        .map(|p| format!("({}, {}, {})", fmt2(p.x), fmt2(p.y), fmt2(p.yaw)))
        .collect::<Vec<_>>()
        .join("\n");
    sections.push(format!("Trajectory:\n{poses}"));

    let mut out = sections.join("\n\n");
    out.push('\n');
    out
}

/// [`parse_response_with`] at the default pose spacing.
pub fn parse_response(text: &str) -> Result<(InstructChain, Trajectory), ChainError> {
    parse_response_with(text, DEFAULT_TRAJECTORY_DT)
}

/// Parses a response back into a chain and a trajectory.
///
/// Which steps are enabled is inferred from which sections appear. Any
/// defect in the step sections — unknown labels, missing or extra lines, a
/// level inconsistent with its distance, a duplicated section, an invalid
/// step subset — collapses the chain to [`InstructChain::empty`] while the
/// trajectory still parses. A missing trajectory section or a pose line
/// that does not read as `(x, y, yaw)` fails the whole response.
pub fn parse_response_with(
    text: &str,
    dt: f64,
) -> Result<(InstructChain, Trajectory), ChainError> {
    let mut sections: [Option<Vec<(usize, &str)>>; 5] = [None, None, None, None, None];
    let mut current: Option<usize> = None;
    let mut malformed = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let header = match line {
            "Step 1:" => Some(0),
            "Step 2:" => Some(1),
            "Step 3:" => Some(2),
            "Step 4:" => Some(3),
            "Trajectory:" => Some(4),
            _ => None,
        };
        if let Some(h) = header {
            if sections[h].is_some() {
                malformed = true;
                current = None;
            } else {
                sections[h] = Some(Vec::new());
                current = Some(h);
            }
            continue;
        }
        match current {
            Some(h) => sections[h].as_mut().unwrap().push((idx + 1, line)),
            // Free text before the first section is tolerated; after a
            // duplicated header it is already covered by `malformed`.
            None => {}
        }
    }

    let pose_lines = sections[4].take().ok_or(ChainError::MissingTrajectory)?;
    let mut poses = Vec::with_capacity(pose_lines.len());
    for (line_no, line) in pose_lines {
        poses.push(parse_pose(line).ok_or_else(|| ChainError::TrajectoryParse {
            line: line_no,
            expected: format!("expected a pose like \"(0.00, 5.00, 0.00)\", got \"{line}\""),
        })?);
    }
    let trajectory = Trajectory::new(poses, dt)?;

    let chain = if malformed {
        InstructChain::empty()
    } else {
        parse_steps(&sections).unwrap_or_else(InstructChain::empty)
    };
    Ok((chain, trajectory))
}

/// All step sections parsed together; `None` means any defect anywhere.
fn parse_steps(sections: &[Option<Vec<(usize, &str)>>; 5]) -> Option<InstructChain> {
    let lines = |i: usize| -> Option<Vec<&str>> {
        sections[i]
            .as_ref()
            .map(|v| v.iter().map(|&(_, l)| l).collect())
    };

    let step1 = match lines(0) {
        Some(body) => Some(parse_step1(&body)?),
        None => None,
    };
    let step2 = match lines(1) {
        Some(body) => Some(parse_step2(&body)?),
        None => None,
    };
    let step3 = match lines(2) {
        Some(body) => Some(parse_step3(&body)?),
        None => None,
    };
    let step4 = match lines(3) {
        Some(body) => Some(parse_step4(&body)?),
        None => None,
    };

    let enabled = ChainSteps {
        s1: step1.is_some(),
        s2: step2.is_some(),
        s3: step3.is_some(),
        s4: step4.is_some(),
    };
    enabled.validate().ok()?;
    Some(InstructChain {
        step1,
        step2,
        step3,
        step4,
        enabled,
    })
}

fn parse_step1(body: &[&str]) -> Option<CoarseAction> {
    match body {
        [line] => Some(CoarseAction {
            maneuver: Maneuver::parse(value(line, "maneuver:")?)?,
        }),
        _ => None,
    }
}

fn parse_step2(body: &[&str]) -> Option<Vec<CollisionAlert>> {
    if body == ["none"] {
        return Some(Vec::new());
    }
    if body.is_empty() {
        return None;
    }
    body.iter().map(|line| parse_alert(line)).collect()
}

fn parse_alert(line: &str) -> Option<CollisionAlert> {
    let rest = line.strip_prefix("alert:")?.trim();
    let parts: Vec<&str> = rest.split(", ").collect();
    let [agent, distance, time, sector, level] = parts.as_slice() else {
        return None;
    };
    let alert = CollisionAlert {
        agent_id: u64::from_str(value(agent, "agent")?).ok()?,
        min_distance: parse_f64(value(distance, "distance")?)?,
        time_offset: parse_f64(value(time, "time")?)?,
        sector: Sector::parse(value(sector, "sector")?)?,
        level: AlertLevel::parse(value(level, "level")?)?,
    };
    // The level must agree with the distance band the generator uses.
    let p = ChainParams::default();
    let expected = if alert.min_distance < p.caution_radius {
        AlertLevel::Caution
    } else if alert.min_distance < p.attention_radius {
        AlertLevel::Attention
    } else {
        return None;
    };
    (alert.level == expected && alert.min_distance >= 0.0 && alert.time_offset >= 0.0)
        .then_some(alert)
}

fn parse_step3(body: &[&str]) -> Option<EnvAssessment> {
    let [light, speed, boundary, stop_ahead, headroom] = body else {
        return None;
    };
    Some(EnvAssessment {
        light_ruling: LightRuling::parse(value(light, "light:")?)?,
        speed_tier: SpeedTier::parse(value(speed, "speed:")?)?,
        boundary_violation: match value(boundary, "boundary:")? {
            "ok" => false,
            "crossed" => true,
            _ => return None,
        },
        stop_point_in_horizon: parse_yes_no(value(stop_ahead, "stop-ahead:")?)?,
        well_below_limit: parse_yes_no(value(headroom, "headroom:")?)?,
    })
}

fn parse_step4(body: &[&str]) -> Option<FinalAction> {
    let [maneuver, modifier] = body else {
        return None;
    };
    let maneuver = Maneuver::parse(value(maneuver, "maneuver:")?)?;
    let speed_modifier = SpeedModifier::parse(value(modifier, "speed-modifier:")?)?;
    let action = FinalAction::new(maneuver, speed_modifier);
    // A stop maneuver claiming any other modifier is inconsistent.
    (action.speed_modifier == speed_modifier).then_some(action)
}

fn parse_pose(line: &str) -> Option<Pose> {
    let inner = line.strip_prefix('(')?.strip_suffix(')')?;
    let parts: Vec<&str> = inner.split(", ").collect();
    let [x, y, yaw] = parts.as_slice() else {
        return None;
    };
    Some(Pose::new(parse_f64(x)?, parse_f64(y)?, parse_f64(yaw)?))
}

/// The value following `key` and whitespace, e.g. `value("light: proceed",
/// "light:")` is `"proceed"`.
fn value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(key)?;
    // Bare keys like "agent 3" use a space; "light: proceed" a colon-space.
    let rest = rest.trim_start();
    (!rest.is_empty()).then_some(rest)
}

fn parse_f64(s: &str) -> Option<f64> {
    f64::from_str(s).ok().filter(|v| v.is_finite())
}

fn parse_yes_no(s: &str) -> Option<bool> {
    match s {
        "yes" => Some(true),
        "no" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmt::round2;

    fn sample_chain() -> InstructChain {
        InstructChain {
            step1: Some(CoarseAction {
                maneuver: Maneuver::GoStraight,
            }),
            step2: Some(vec![
                CollisionAlert {
                    agent_id: 3,
                    min_distance: 1.4,
                    time_offset: 2.0,
                    sector: Sector::LeftFront,
                    level: AlertLevel::Caution,
                },
                CollisionAlert {
                    agent_id: 7,
                    min_distance: 2.75,
                    time_offset: 0.5,
                    sector: Sector::Rear,
                    level: AlertLevel::Attention,
                },
            ]),
            step3: Some(EnvAssessment {
                light_ruling: LightRuling::Proceed,
                speed_tier: SpeedTier::Safe,
                boundary_violation: false,
                stop_point_in_horizon: false,
                well_below_limit: true,
            }),
            step4: Some(FinalAction::new(
                Maneuver::GoStraight,
                SpeedModifier::Accelerate,
            )),
            enabled: ChainSteps::full(),
        }
    }

    fn sample_trajectory() -> Trajectory {
        let poses = (1..=4).map(|j| Pose::new(0.0, 2.5 * j as f64, 0.0)).collect();
        Trajectory::new(poses, 0.5).unwrap()
    }

    #[test]
    fn rendered_grammar_is_stable() {
        let chain = InstructChain {
            step2: Some(Vec::new()),
            step4: Some(FinalAction::new(Maneuver::GoStraight, SpeedModifier::Maintain)),
            ..sample_chain()
        };
        let traj = Trajectory::new(vec![Pose::new(0.0, 2.5, 0.0)], 0.5).unwrap();
        let expected = "\
Step 1:
maneuver: go-straight

Step 2:
none

Step 3:
light: proceed
speed: safe
boundary: ok
stop-ahead: no
headroom: yes

Step 4:
maneuver: go-straight
speed-modifier: maintain

Trajectory:
(0.00, 2.50, 0.00)
";
        assert_eq!(render_response(&chain, &traj), expected);
    }

    #[test]
    fn full_response_round_trips() {
        let chain = sample_chain();
        let traj = sample_trajectory();
        let text = render_response(&chain, &traj);
        let (parsed_chain, parsed_traj) = parse_response(&text).unwrap();
        assert_eq!(parsed_chain, chain);
        assert_eq!(parsed_traj.dt, traj.dt);
        assert_eq!(parsed_traj.len(), traj.len());
        for (a, b) in parsed_traj.poses.iter().zip(&traj.poses) {
            assert_eq!(a.x, round2(b.x));
            assert_eq!(a.y, round2(b.y));
            assert_eq!(a.yaw, round2(b.yaw));
        }
    }

    #[test]
    fn every_prefix_round_trips() {
        for enabled in ChainSteps::prefixes() {
            let full = sample_chain();
            let chain = InstructChain {
                step1: enabled.s1.then(|| full.step1.unwrap()),
                step2: enabled.s2.then(|| full.step2.clone().unwrap()),
                step3: enabled.s3.then(|| full.step3.unwrap()),
                step4: enabled.s4.then(|| full.step4.unwrap()),
                enabled,
            };
            let text = render_response(&chain, &sample_trajectory());
            let (parsed, _) = parse_response(&text).unwrap();
            assert_eq!(parsed, chain, "prefix {}", enabled.label());
        }
    }

    #[test]
    fn no_alerts_is_distinct_from_absent_section() {
        let with_none = InstructChain {
            step2: Some(Vec::new()),
            ..sample_chain()
        };
        let text = render_response(&with_none, &sample_trajectory());
        assert!(text.contains("Step 2:\nnone"));
        let (parsed, _) = parse_response(&text).unwrap();
        assert_eq!(parsed.step2, Some(Vec::new()));
        assert!(parsed.enabled.s2);

        let without = InstructChain {
            step2: None,
            enabled: ChainSteps {
                s2: false,
                ..ChainSteps::full()
            },
            ..sample_chain()
        };
        let text = render_response(&without, &sample_trajectory());
        assert!(!text.contains("Step 2:"));
        let (parsed, _) = parse_response(&text).unwrap();
        assert_eq!(parsed.step2, None);
        assert!(!parsed.enabled.s2);
    }

    #[test]
    fn malformed_step_degrades_to_empty_chain() {
        let text = render_response(&sample_chain(), &sample_trajectory());
        let corrupted = text.replace("maneuver: go-straight", "maneuver: fly");
        let (chain, traj) = parse_response(&corrupted).unwrap();
        assert!(chain.is_empty());
        assert_eq!(traj.len(), 4);
    }

    #[test]
    fn inconsistent_alert_level_degrades() {
        let text = render_response(&sample_chain(), &sample_trajectory());
        // Distance 2.75 sits in the attention band; claim caution instead.
        let corrupted = text.replace(
            "distance 2.75, time 0.50, sector rear, level attention",
            "distance 2.75, time 0.50, sector rear, level caution",
        );
        let (chain, _) = parse_response(&corrupted).unwrap();
        assert!(chain.is_empty());
        // Distances past the outer radius cannot carry an alert at all.
        let far = text.replace("distance 2.75", "distance 3.10");
        let (chain, _) = parse_response(&far).unwrap();
        assert!(chain.is_empty());
    }

    #[test]
    fn duplicate_section_degrades() {
        let text = render_response(&sample_chain(), &sample_trajectory());
        let doubled = format!("Step 1:\nmaneuver: stop\n\n{text}");
        let (chain, traj) = parse_response(&doubled).unwrap();
        assert!(chain.is_empty());
        assert_eq!(traj.len(), 4);
    }

    #[test]
    fn step_four_without_step_one_degrades() {
        let text = "\
Step 4:
maneuver: go-straight
speed-modifier: maintain

Trajectory:
(0.00, 2.50, 0.00)
";
        let (chain, _) = parse_response(text).unwrap();
        assert!(chain.is_empty());
    }

    #[test]
    fn stop_maneuver_with_other_modifier_degrades() {
        let text = "\
Step 1:
maneuver: stop

Step 4:
maneuver: stop
speed-modifier: maintain

Trajectory:
(0.00, 1.00, 0.00)
";
        let (chain, _) = parse_response(text).unwrap();
        assert!(chain.is_empty());
    }

    #[test]
    fn preamble_text_is_tolerated() {
        let text = "\
Here is my plan for this scene.

Step 1:
maneuver: stop

Trajectory:
(0.00, 1.00, 0.00)
";
        let (chain, traj) = parse_response(text).unwrap();
        assert_eq!(
            chain.step1,
            Some(CoarseAction {
                maneuver: Maneuver::Stop
            })
        );
        assert_eq!(traj.len(), 1);
    }

    #[test]
    fn missing_trajectory_is_fatal() {
        let text = "Step 1:\nmaneuver: go-straight\n";
        assert!(matches!(
            parse_response(text),
            Err(ChainError::MissingTrajectory)
        ));
        assert!(matches!(
            parse_response("no structure at all"),
            Err(ChainError::MissingTrajectory)
        ));
    }

    #[test]
    fn bad_pose_line_reports_its_line_number() {
        let text = "Trajectory:\n(0.00, 5.00, 0.00)\nnot a pose\n";
        match parse_response(text) {
            Err(ChainError::TrajectoryParse { line, expected }) => {
                assert_eq!(line, 3);
                assert!(expected.contains("not a pose"));
            }
            other => panic!("expected a trajectory parse error, got {other:?}"),
        }
    }

    #[test]
    fn implausible_pose_spacing_is_rejected() {
        // 40 m between poses at 0.5 s spacing reads as 80 m/s.
        let text = "Trajectory:\n(0.00, 0.00, 0.00)\n(0.00, 40.00, 0.00)\n";
        assert!(parse_response(text).is_err());
    }

    #[test]
    fn custom_dt_is_applied() {
        let text = "Trajectory:\n(0.00, 1.00, 0.00)\n";
        let (_, traj) = parse_response_with(text, 0.1).unwrap();
        assert_eq!(traj.dt, 0.1);
    }
}
