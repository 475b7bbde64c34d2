//! Trajectory tracking: discrete LQR gain synthesis plus the longitudinal
//! and lateral feedback laws that turn a reference trajectory into accel
//! and steer commands.

use nalgebra::{Matrix2, RowVector2, Vector2};
use serde::{Deserialize, Serialize};

use super::{SimError, VehicleState};
use crate::world::{wrap_angle, Point, Pose, Trajectory};

/// Elementwise convergence tolerance for the Riccati fixed point.
const RICCATI_TOL: f64 = 1e-10;
/// Iteration budget before the fixed point is declared divergent.
const RICCATI_MAX_ITERATIONS: usize = 10_000;

/// Solves the discrete-time LQR problem for a two-state, single-input
/// system by fixed-point iteration on the algebraic Riccati equation
///
///   P = Q + AᵀPA − AᵀPB (R + BᵀPB)⁻¹ BᵀPA
///
/// starting from P = Q, to elementwise tolerance 1e-10. Returns the gain
/// row K = (R + BᵀPB)⁻¹ BᵀPA so the control law is u = −K·x.
pub fn solve_lqr_gain(
    a: [[f64; 2]; 2],
    b: [f64; 2],
    q: [[f64; 2]; 2],
    r: f64,
) -> Result<[f64; 2], SimError> {
    let a = Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1]);
    let b = Vector2::new(b[0], b[1]);
    let q = Matrix2::new(q[0][0], q[0][1], q[1][0], q[1][1]);

    let gain = |p: &Matrix2<f64>| -> RowVector2<f64> {
        let btpb = r + (b.transpose() * p * b)[(0, 0)];
        (b.transpose() * p * a) / btpb
    };

    let mut p = q;
    for _ in 0..RICCATI_MAX_ITERATIONS {
        let k = gain(&p);
        let next = q + a.transpose() * p * (a - b * k);
        let delta = (next - p).abs().max();
        p = next;
        if delta <= RICCATI_TOL {
            let k = gain(&p);
            return Ok([k[0], k[1]]);
        }
    }
    Err(SimError::RiccatiDiverged {
        iterations: RICCATI_MAX_ITERATIONS,
    })
}

/// Tracker weights and bounds. Longitudinal state is (position error along
/// the reference heading, speed error); lateral state is (signed lateral
/// offset, heading error).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerParams {
    /// Longitudinal state weights diag(Q) over (s error, v error).
    pub q_lon: [f64; 2],
    pub r_lon: f64,
    /// Lateral state weights diag(Q) over (lateral offset, heading error).
    pub q_lat: [f64; 2],
    pub r_lat: f64,
    /// Acceleration command bound, m/s².
    pub max_accel: f64,
    /// Steer command bound, radians.
    pub max_steer: f64,
    /// Minimum speed substituted into the lateral model; at v = 0 the
    /// lateral dynamics lose controllability and the Riccati iteration
    /// cannot converge.
    pub speed_floor: f64,
    /// Re-solve the lateral gain when speed drifts this far from the speed
    /// it was solved at, m/s.
    pub gain_speed_tolerance: f64,
}

impl Default for TrackerParams {
    fn default() -> Self {
        Self {
            q_lon: [0.5, 1.0],
            r_lon: 1.0,
            q_lat: [1.0, 0.1],
            r_lat: 1.0,
            max_accel: 4.0,
            max_steer: super::MAX_STEER,
            speed_floor: 1.0,
            gain_speed_tolerance: 1.0,
        }
    }
}

/// One tracking command with the error terms it was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackCommand {
    pub accel: f64,
    pub steer: f64,
    /// Signed offset of the vehicle to the left of the reference, meters.
    pub lateral_error: f64,
    /// Reference speed minus vehicle speed, m/s.
    pub speed_error: f64,
}

/// Feedback tracker with cached LQR gains. The longitudinal gain depends
/// only on the step period; the lateral gain depends on speed and is
/// re-solved when speed moves more than `gain_speed_tolerance` from the
/// speed it was last solved at.
#[derive(Debug, Clone)]
pub struct Tracker {
    params: TrackerParams,
    dt: f64,
    wheelbase: f64,
    lon_gain: [f64; 2],
    lat_gain: Option<(f64, [f64; 2])>,
}

impl Tracker {
    pub fn new(params: TrackerParams, dt: f64, wheelbase: f64) -> Result<Self, SimError> {
        let lon_gain = solve_lqr_gain(
            [[1.0, dt], [0.0, 1.0]],
            [dt * dt / 2.0, dt],
            [[params.q_lon[0], 0.0], [0.0, params.q_lon[1]]],
            params.r_lon,
        )?;
        Ok(Self {
            params,
            dt,
            wheelbase,
            lon_gain,
            lat_gain: None,
        })
    }

    fn lateral_gain(&mut self, speed: f64) -> Result<[f64; 2], SimError> {
        let v = speed.max(self.params.speed_floor);
        if let Some((solved_at, gain)) = self.lat_gain {
            if (v - solved_at).abs() <= self.params.gain_speed_tolerance {
                return Ok(gain);
            }
        }
        let gain = solve_lqr_gain(
            [[1.0, v * self.dt], [0.0, 1.0]],
            [0.0, v * self.dt / self.wheelbase],
            [[self.params.q_lat[0], 0.0], [0.0, self.params.q_lat[1]]],
            self.params.r_lat,
        )?;
        self.lat_gain = Some((v, gain));
        Ok(gain)
    }

    /// Computes the command toward a planner-style reference (pose i sits
    /// at elapsed time (i + 1)·ref_dt). The first interval extrapolates the
    /// first segment backward to the plan instant; past the final pose the
    /// tracker holds it as a stationary target. Reference speed always
    /// comes from the reference's own pose spacing, never from the
    /// vehicle's offset to it, so a vehicle ahead of a stopped reference
    /// reads v_ref = 0 rather than a phantom forward speed.
    pub fn command(
        &mut self,
        state: &VehicleState,
        reference: &[Pose],
        ref_dt: f64,
        elapsed: f64,
    ) -> Result<TrackCommand, SimError> {
        assert!(!reference.is_empty(), "reference must hold at least one pose");
        let u = elapsed / ref_dt - 1.0;
        let last = reference.len() - 1;
        let (target, heading_ref, v_ref, accel_ff) = if reference.len() == 1 || u >= last as f64 {
            let pose = reference[last];
            (pose.point(), pose.yaw, 0.0, 0.0)
        } else {
            // Clamp to the first segment, extended backward to the plan
            // instant (u = -1) for the interval before the first pose.
            let index = (u.floor().max(0.0) as usize).min(last - 1);
            let alpha = (u - index as f64).max(-1.0);
            let (a, b) = (reference[index], reference[index + 1]);
            let target = Point::new(a.x + alpha * (b.x - a.x), a.y + alpha * (b.y - a.y));
            let heading = wrap_angle(a.yaw + alpha.max(0.0) * wrap_angle(b.yaw - a.yaw));

            // Reference speed and feedforward accel interpolated through
            // per-pose knots (central averages of adjacent chord speeds and
            // their differences, linearly extended at the ends). Successive
            // plans sample the same absolute grid, so interior knots agree
            // across replans and the commands stay continuous; segment
            // averages would jump every replan, and feedback alone lags a
            // braking reference by accel / gain -- metres, not centimetres.
            let chord = |i: usize| reference[i].point().distance(reference[i + 1].point()) / ref_dt;
            let v_knot = |i: usize| -> f64 {
                if last == 1 {
                    chord(0)
                } else if i == 0 {
                    1.5 * chord(0) - 0.5 * chord(1)
                } else if i == last {
                    1.5 * chord(last - 1) - 0.5 * chord(last - 2)
                } else {
                    0.5 * (chord(i - 1) + chord(i))
                }
            };
            let a_knot = |i: usize| -> f64 {
                if last == 1 {
                    0.0
                } else if i == 0 {
                    (v_knot(1) - v_knot(0)) / ref_dt
                } else if i == last {
                    (v_knot(last) - v_knot(last - 1)) / ref_dt
                } else {
                    (v_knot(i + 1) - v_knot(i - 1)) / (2.0 * ref_dt)
                }
            };
            let (v, a_ff) = if alpha < 0.0 {
                let v_start = 2.0 * v_knot(0) - v_knot(1);
                let a_start = 2.0 * a_knot(0) - a_knot(1);
                (
                    v_start + (alpha + 1.0) * (v_knot(0) - v_start),
                    a_start + (alpha + 1.0) * (a_knot(0) - a_start),
                )
            } else {
                (
                    v_knot(index) + alpha * (v_knot(index + 1) - v_knot(index)),
                    a_knot(index) + alpha * (a_knot(index + 1) - a_knot(index)),
                )
            };
            (target, heading, v.max(0.0), a_ff)
        };

        let dir = Point::new(heading_ref.cos(), heading_ref.sin());
        let offset = target - state.pose.point();
        let s_error = offset.dot(dir);
        let speed_error = v_ref - state.speed;
        let accel = (accel_ff + self.lon_gain[0] * s_error + self.lon_gain[1] * speed_error)
            .clamp(-self.params.max_accel, self.params.max_accel);

        // Vehicle offset to the left of the reference line.
        let lateral_error = offset.cross(dir);
        let heading_error = wrap_angle(state.pose.yaw - heading_ref);
        let k = self.lateral_gain(state.speed)?;
        let steer = (-(k[0] * lateral_error + k[1] * heading_error))
            .clamp(-self.params.max_steer, self.params.max_steer);

        Ok(TrackCommand {
            accel,
            steer,
            lateral_error,
            speed_error,
        })
    }
}

/// One-shot tracking command against a planner trajectory; a convenience
/// wrapper that solves the gains afresh instead of caching them.
pub fn track_trajectory(
    state: &VehicleState,
    trajectory: &Trajectory,
    elapsed: f64,
    params: &TrackerParams,
    dt: f64,
    wheelbase: f64,
) -> Result<(f64, f64), SimError> {
    let mut tracker = Tracker::new(*params, dt, wheelbase)?;
    let command = tracker.command(state, &trajectory.poses, trajectory.dt, elapsed)?;
    Ok((command.accel, command.steer))
}
