//! Open-loop trajectory errors with the OLS composite, and closed-loop
//! component scores with the CLS composite. Every threshold lives in
//! [`MetricParams`]; nothing here reads configuration from anywhere else,
//! so two reports computed from the same inputs and params always agree.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{ScenarioError, ScenarioFile};
use crate::sim::{SimLog, SimStatus};
use crate::world::{wrap_angle, Point, Polyline, Quad, Trajectory, WorldError};

/// Every constant the scoring pipeline consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricParams {
    /// Miss checkpoints as (horizon seconds, displacement threshold meters).
    /// A trajectory misses when its displacement from the expert *exceeds*
    /// the threshold at any checkpoint; equality is not a miss.
    pub miss_horizons: Vec<(f64, f64)>,
    /// Error magnitudes at which the four OLS sub-scores reach zero.
    pub ade_cap: f64,
    pub fde_cap: f64,
    pub ahe_cap: f64,
    pub fhe_cap: f64,
    /// Minimum drivable-area compliance below which the CLS gates to zero.
    pub drivable_gate: f64,
    /// Progress ratio at which the CLS progress term saturates to 1, so a
    /// rollout that matches the expert up to tracking noise is not docked.
    pub progress_saturation: f64,
    /// Expert travel below this counts the scenario as stationary and the
    /// progress ratio reads 1.
    pub min_expert_progress: f64,
    /// Comfort bounds on the recorded command magnitudes.
    pub comfort_accel: f64,
    pub comfort_jerk: f64,
    /// Allowance over the map speed limit before a step is non-compliant.
    pub speed_tolerance: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            miss_horizons: vec![(3.0, 2.0), (5.0, 4.0), (8.0, 6.0)],
            ade_cap: 4.0,
            fde_cap: 6.0,
            ahe_cap: 0.5,
            fhe_cap: 0.8,
            drivable_gate: 0.98,
            progress_saturation: 0.98,
            min_expert_progress: 0.1,
            comfort_accel: 4.0,
            comfort_jerk: 8.0,
            speed_tolerance: 0.5,
        }
    }
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("trajectory lengths differ: planned {planned}, expert {expert}")]
    LengthMismatch { planned: usize, expert: usize },
    #[error("trajectory steps differ: planned {planned} s, expert {expert} s")]
    DtMismatch { planned: f64, expert: f64 },
    #[error("horizon {horizon} s is not a sample time of the trajectory")]
    HorizonNotSampled { horizon: f64 },
    #[error("no scenarios to aggregate")]
    EmptySet,
    #[error("sim log holds no records")]
    EmptyLog,
    #[error("log spans {records} records from frame {start} but the file has {frames} frames")]
    RecordsPastFile {
        records: usize,
        start: usize,
        frames: usize,
    },
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Pointwise errors of one planned trajectory against the expert, plus the
/// miss verdict. One of these per scenario feeds [`open_loop_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenLoopErrors {
    pub ade: f64,
    pub fde: f64,
    pub ahe: f64,
    pub fhe: f64,
    pub miss: bool,
}

/// Aggregate open-loop report over a scenario set: mean errors, miss rate,
/// and the OLS composite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenLoopReport {
    pub ade: f64,
    pub fde: f64,
    pub ahe: f64,
    pub fhe: f64,
    pub miss_rate: f64,
    pub ols: f64,
}

/// Component scores of one closed-loop rollout and the CLS composite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopReport {
    pub collision_free: bool,
    pub drivable_compliance: f64,
    pub direction_compliance: f64,
    pub progress_ratio: f64,
    pub comfort_score: f64,
    pub speed_compliance: f64,
    pub cls: f64,
}

fn check_comparable(planned: &Trajectory, expert: &Trajectory) -> Result<(), MetricsError> {
    if planned.poses.len() != expert.poses.len() {
        return Err(MetricsError::LengthMismatch {
            planned: planned.poses.len(),
            expert: expert.poses.len(),
        });
    }
    if (planned.dt - expert.dt).abs() > 1e-12 {
        return Err(MetricsError::DtMismatch {
            planned: planned.dt,
            expert: expert.dt,
        });
    }
    Ok(())
}

/// Pointwise open-loop errors (ade, fde, ahe, fhe). Heading errors are
/// absolute wrapped differences in (-pi, pi].
pub fn open_loop_errors(
    planned: &Trajectory,
    expert: &Trajectory,
) -> Result<(f64, f64, f64, f64), MetricsError> {
    check_comparable(planned, expert)?;
    let n = planned.poses.len() as f64;
    let mut dist_sum = 0.0;
    let mut head_sum = 0.0;
    for (p, e) in planned.poses.iter().zip(&expert.poses) {
        dist_sum += p.point().distance(e.point());
        head_sum += wrap_angle(p.yaw - e.yaw).abs();
    }
    let last_p = planned.poses.last().unwrap();
    let last_e = expert.poses.last().unwrap();
    Ok((
        dist_sum / n,
        last_p.point().distance(last_e.point()),
        head_sum / n,
        wrap_angle(last_p.yaw - last_e.yaw).abs(),
    ))
}

/// Whether the plan misses the expert: displacement strictly exceeds the
/// threshold at any configured horizon. Horizons must land on sample times
/// of the trajectories (pose i sits at (i+1)*dt).
pub fn is_miss(
    planned: &Trajectory,
    expert: &Trajectory,
    params: &MetricParams,
) -> Result<bool, MetricsError> {
    check_comparable(planned, expert)?;
    for &(horizon, threshold) in &params.miss_horizons {
        let steps = horizon / planned.dt;
        let rounded = steps.round();
        if (steps - rounded).abs() > 1e-9 || rounded < 1.0 {
            return Err(MetricsError::HorizonNotSampled { horizon });
        }
        let index = rounded as usize - 1;
        if index >= planned.poses.len() {
            return Err(MetricsError::HorizonNotSampled { horizon });
        }
        let d = planned.poses[index]
            .point()
            .distance(expert.poses[index].point());
        if d > threshold {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Errors and miss verdict for one scenario in a single call.
pub fn evaluate_open_loop(
    planned: &Trajectory,
    expert: &Trajectory,
    params: &MetricParams,
) -> Result<OpenLoopErrors, MetricsError> {
    let (ade, fde, ahe, fhe) = open_loop_errors(planned, expert)?;
    Ok(OpenLoopErrors {
        ade,
        fde,
        ahe,
        fhe,
        miss: is_miss(planned, expert, params)?,
    })
}

/// Per-scenario OLS contribution: the mean of the four capped sub-scores,
/// zeroed when the scenario is a miss.
pub fn scenario_ols(errors: &OpenLoopErrors, params: &MetricParams) -> f64 {
    if errors.miss {
        return 0.0;
    }
    let sub = |err: f64, cap: f64| (1.0 - err / cap).max(0.0);
    (sub(errors.ade, params.ade_cap)
        + sub(errors.fde, params.fde_cap)
        + sub(errors.ahe, params.ahe_cap)
        + sub(errors.fhe, params.fhe_cap))
        / 4.0
}

/// Aggregates per-scenario errors into mean errors, the miss rate, and
/// OLS = 100 x mean per-scenario score.
pub fn open_loop_report(
    scenarios: &[OpenLoopErrors],
    params: &MetricParams,
) -> Result<OpenLoopReport, MetricsError> {
    if scenarios.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let n = scenarios.len() as f64;
    let mean = |f: fn(&OpenLoopErrors) -> f64| scenarios.iter().map(f).sum::<f64>() / n;
    Ok(OpenLoopReport {
        ade: mean(|e| e.ade),
        fde: mean(|e| e.fde),
        ahe: mean(|e| e.ahe),
        fhe: mean(|e| e.fhe),
        miss_rate: scenarios.iter().filter(|e| e.miss).count() as f64 / n,
        ols: 100.0 * scenarios.iter().map(|e| scenario_ols(e, params)).sum::<f64>() / n,
    })
}

/// Scores a closed-loop rollout against the scenario it ran in. Geometry is
/// recomputed from the recorded poses, so the report does not trust the
/// rollout's own safety verdicts beyond the terminal status. The expert
/// yardstick for progress is the log ego's travel over the configured step
/// window regardless of how far the rollout got.
pub fn closed_loop_score(
    log: &SimLog,
    file: &ScenarioFile,
    params: &MetricParams,
) -> Result<ClosedLoopReport, MetricsError> {
    if log.records.is_empty() {
        return Err(MetricsError::EmptyLog);
    }
    let start = log.start_frame;
    let window = log.records.len().max(log.steps + 1);
    if start + window > file.frames.len() {
        return Err(MetricsError::RecordsPastFile {
            records: window,
            start,
            frames: file.frames.len(),
        });
    }
    let to_points = |pts: &[[f64; 2]]| pts.iter().map(|&p| Point::from(p)).collect();
    let map = &file.frames[start].map;
    let centerline = Polyline::new(to_points(&map.centerline))?;
    let left = Polyline::new(to_points(&map.left_boundary))?;
    let right = Polyline::new(to_points(&map.right_boundary))?;
    let (length, width) = (file.frames[start].ego.length, file.frames[start].ego.width);

    let n = log.records.len();
    let mut drivable = 0usize;
    let mut direction = 0usize;
    let mut comfortable = 0usize;
    let mut legal = 0usize;
    for (i, record) in log.records.iter().enumerate() {
        let pose = record.ego.pose;
        let footprint = Quad::from_center_dims(pose.point(), pose.yaw, length, width)?;
        let inside =
            |p: Point| left.project(p).1 <= 0.0 && right.project(p).1 >= 0.0;
        if footprint.vertices().iter().all(|&v| inside(v)) {
            drivable += 1;
        }
        let tangent = centerline.tangent_at(centerline.project(pose.point()).0);
        let along = record.ego.speed * (pose.yaw.cos() * tangent.x + pose.yaw.sin() * tangent.y);
        if along >= 0.0 {
            direction += 1;
        }
        let jerk_ok = i == 0
            || (record.ego.accel - log.records[i - 1].ego.accel).abs() / log.dt
                <= params.comfort_jerk;
        if record.ego.accel.abs() <= params.comfort_accel && jerk_ok {
            comfortable += 1;
        }
        if record.ego.speed <= file.frames[start + i].map.speed_limit + params.speed_tolerance {
            legal += 1;
        }
    }

    let arc = |points: &mut dyn Iterator<Item = Point>| -> f64 {
        let mut total = 0.0;
        let mut prev: Option<Point> = None;
        for p in points {
            if let Some(q) = prev {
                total += q.distance(p);
            }
            prev = Some(p);
        }
        total
    };
    // Expert travel spans the configured window even when the rollout
    // terminated early, so aborted runs cannot claim full progress.
    let driven = arc(&mut log.records.iter().map(|r| r.ego.pose.point()));
    let expert = arc(&mut file.frames[start..start + log.steps + 1]
        .iter()
        .map(|f| Point::new(f.ego.x, f.ego.y)));
    let progress_ratio = if expert < params.min_expert_progress {
        1.0
    } else {
        (driven / expert).clamp(0.0, 1.0)
    };

    let fraction = |count: usize| count as f64 / n as f64;
    let report = ClosedLoopReport {
        collision_free: log.status != SimStatus::Collided,
        drivable_compliance: fraction(drivable),
        direction_compliance: fraction(direction),
        progress_ratio,
        comfort_score: fraction(comfortable),
        speed_compliance: fraction(legal),
        cls: 0.0,
    };
    Ok(ClosedLoopReport {
        cls: composite_cls(&report, params),
        ..report
    })
}

/// CLS = 100 x [collision-free] x [drivable over the gate] x the mean of the
/// progress, comfort, speed, and direction terms. Progress saturates at
/// `progress_saturation` so tracking noise against a matched expert cannot
/// shave the composite.
pub fn composite_cls(report: &ClosedLoopReport, params: &MetricParams) -> f64 {
    if !report.collision_free || report.drivable_compliance < params.drivable_gate {
        return 0.0;
    }
    let progress = (report.progress_ratio / params.progress_saturation).min(1.0);
    100.0
        * (progress
            + report.comfort_score
            + report.speed_compliance
            + report.direction_compliance)
        / 4.0
}
