//! Eight-way relative sector classification around a pose.

use serde::{Deserialize, Serialize};

use super::geometry::{wrap_angle, Point};
use super::scene::Pose;

/// Relative placement of a point around the ego, split into eight 45-degree
/// octants centered on the cardinal and diagonal directions (front is
/// centered on the heading direction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    Front,
    LeftFront,
    Left,
    LeftRear,
    Rear,
    RightRear,
    Right,
    RightFront,
}

impl Sector {
    pub fn label(&self) -> &'static str {
        match self {
            Sector::Front => "front",
            Sector::LeftFront => "left-front",
            Sector::Left => "left",
            Sector::LeftRear => "left-rear",
            Sector::Rear => "rear",
            Sector::RightRear => "right-rear",
            Sector::Right => "right",
            Sector::RightFront => "right-front",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "front" => Sector::Front,
            "left-front" => Sector::LeftFront,
            "left" => Sector::Left,
            "left-rear" => Sector::LeftRear,
            "rear" => Sector::Rear,
            "right-rear" => Sector::RightRear,
            "right" => Sector::Right,
            "right-front" => Sector::RightFront,
            _ => return None,
        })
    }

    /// Whether the sector is one of the three forward-facing octants.
    pub fn is_frontal(&self) -> bool {
        matches!(self, Sector::Front | Sector::LeftFront | Sector::RightFront)
    }

    /// Octant steps away from straight ahead (0 front, 4 rear), used to
    /// break boundary ties toward the more frontal sector.
    fn frontality(&self) -> u8 {
        match self {
            Sector::Front => 0,
            Sector::LeftFront | Sector::RightFront => 1,
            Sector::Left | Sector::Right => 2,
            Sector::LeftRear | Sector::RightRear => 3,
            Sector::Rear => 4,
        }
    }
}

/// Sector order by bearing, counterclockwise from straight ahead.
const BY_BEARING: [Sector; 8] = [
    Sector::Front,
    Sector::LeftFront,
    Sector::Left,
    Sector::LeftRear,
    Sector::Rear,
    Sector::RightRear,
    Sector::Right,
    Sector::RightFront,
];

/// Classifies `point` into one of eight sectors around `ego_pose`. Both
/// arguments share one frame; the pose's yaw follows the ego-frame
/// convention (yaw 0 means heading along +Y, so the forward direction is
/// the angle yaw + pi/2 from +X). Bearing is measured from the forward
/// direction, counterclockwise positive; each sector spans 45 degrees
/// centered on its axis, and an exact boundary goes to the more frontal
/// sector. A point coincident with the ego position reads front.
pub fn relative_sector(ego_pose: Pose, point: Point) -> Sector {
    let offset = point - ego_pose.point();
    if offset.x == 0.0 && offset.y == 0.0 {
        return Sector::Front;
    }
    let forward = ego_pose.yaw + std::f64::consts::FRAC_PI_2;
    let bearing = wrap_angle(offset.y.atan2(offset.x) - forward);
    let step = std::f64::consts::FRAC_PI_4;
    let half = step / 2.0;
    let mut best = Sector::Front;
    let mut best_key = (f64::INFINITY, u8::MAX);
    for (i, &sector) in BY_BEARING.iter().enumerate() {
        let center = wrap_angle(i as f64 * step);
        let diff = wrap_angle(bearing - center).abs();
        if diff > half + 1e-12 {
            continue;
        }
        let key = (diff, sector.frontality());
        if key.0 < best_key.0 - 1e-12 || ((key.0 - best_key.0).abs() <= 1e-12 && key.1 < best_key.1)
        {
            best = sector;
            best_key = key;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at_origin(p: Point) -> Sector {
        relative_sector(Pose::new(0.0, 0.0, 0.0), p)
    }

    #[test]
    fn cardinal_positions() {
        assert_eq!(at_origin(Point::new(0.0, 10.0)), Sector::Front);
        assert_eq!(at_origin(Point::new(0.0, -10.0)), Sector::Rear);
        assert_eq!(at_origin(Point::new(-10.0, 0.0)), Sector::Left);
        assert_eq!(at_origin(Point::new(10.0, 0.0)), Sector::Right);
    }

    #[test]
    fn diagonal_positions() {
        assert_eq!(at_origin(Point::new(-7.0, 7.0)), Sector::LeftFront);
        assert_eq!(at_origin(Point::new(7.0, 7.0)), Sector::RightFront);
        assert_eq!(at_origin(Point::new(-7.0, -7.0)), Sector::LeftRear);
        assert_eq!(at_origin(Point::new(7.0, -7.0)), Sector::RightRear);
    }

    #[test]
    fn mostly_behind_is_rear() {
        // Bearing for (3, -9) is about -161.6 degrees from forward, which
        // falls inside the rear octant (more than 157.5 degrees off axis).
        assert_eq!(at_origin(Point::new(3.0, -9.0)), Sector::Rear);
    }

    #[test]
    fn coincident_point_reads_front() {
        assert_eq!(at_origin(Point::new(0.0, 0.0)), Sector::Front);
    }

    #[test]
    fn boundary_goes_frontal() {
        // Exactly between front and left-front (22.5 degrees left of ahead).
        let a = 22.5_f64.to_radians();
        let p = Point::new(-a.sin() * 10.0, a.cos() * 10.0);
        assert_eq!(at_origin(p), Sector::Front);
        // Exactly between left and left-rear goes to left.
        let b = 112.5_f64.to_radians();
        let q = Point::new(-b.sin() * 10.0, b.cos() * 10.0);
        assert_eq!(at_origin(q), Sector::Left);
    }

    #[test]
    fn invariant_under_rigid_motion() {
        let pose = Pose::new(4.0, -2.0, 0.9);
        let point = Point::new(7.0, 3.0);
        let base = relative_sector(pose, point);
        let angle = 1.7;
        let shift = Point::new(-11.0, 6.0);
        let moved_pose = {
            let p = pose.point().rotated(angle) + shift;
            Pose::new(p.x, p.y, wrap_angle(pose.yaw + angle))
        };
        let moved_point = point.rotated(angle) + shift;
        assert_eq!(relative_sector(moved_pose, moved_point), base);
    }
}
