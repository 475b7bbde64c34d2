//! Convex quadrilateral footprints.

use super::geometry::{point_segment_distance, segment_segment_distance, segments_intersect, Point};
use super::polyline::Polyline;
use super::WorldError;
use serde::{Deserialize, Serialize};

/// A convex quadrilateral with vertices stored in counterclockwise order.
///
/// Every object in a scene (the ego vehicle included) carries one of these as
/// its footprint, so "distance between objects" always means the minimum
/// distance between two convex polygons rather than between center points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 4]", into = "[[f64; 2]; 4]")]
pub struct Quad {
    vertices: [Point; 4],
}

impl Quad {
    /// Build from four vertices already in counterclockwise order.
    pub fn new(vertices: [Point; 4]) -> Result<Self, WorldError> {
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(WorldError::QuadNotFinite);
        }
        let mut area2 = 0.0;
        for i in 0..4 {
            let a = vertices[i];
            let b = vertices[(i + 1) % 4];
            let c = vertices[(i + 2) % 4];
            if (b - a).cross(c - b) < 0.0 {
                return Err(WorldError::QuadNotConvex);
            }
            area2 += a.cross(b);
        }
        if area2 <= 0.0 {
            return Err(WorldError::QuadZeroArea);
        }
        Ok(Self { vertices })
    }

    /// Build from a slice, rejecting anything that is not exactly 4 points.
    pub fn from_points(points: &[Point]) -> Result<Self, WorldError> {
        let vertices: [Point; 4] = points
            .try_into()
            .map_err(|_| WorldError::QuadVertexCount(points.len()))?;
        Self::new(vertices)
    }

    /// Axis-aligned rectangle of `length` x `width` centered at `center`,
    /// rotated so its long axis points along `heading` (radians from +X).
    /// Vertices start at the front-left corner and run counterclockwise.
    pub fn from_center_dims(
        center: Point,
        heading: f64,
        length: f64,
        width: f64,
    ) -> Result<Self, WorldError> {
        let half_l = length / 2.0;
        let half_w = width / 2.0;
        let local = [
            Point::new(half_l, half_w),
            Point::new(-half_l, half_w),
            Point::new(-half_l, -half_w),
            Point::new(half_l, -half_w),
        ];
        Self::new(local.map(|p| center + p.rotated(heading)))
    }

    pub fn vertices(&self) -> &[Point; 4] {
        &self.vertices
    }

    pub fn centroid(&self) -> Point {
        let sum = self
            .vertices
            .iter()
            .fold(Point::default(), |acc, &v| acc + v);
        sum * 0.25
    }

    pub fn area(&self) -> f64 {
        let mut area2 = 0.0;
        for i in 0..4 {
            area2 += self.vertices[i].cross(self.vertices[(i + 1) % 4]);
        }
        area2 / 2.0
    }

    /// Whether `p` lies inside or on the boundary.
    pub fn contains(&self, p: Point) -> bool {
        (0..4).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % 4];
            (b - a).cross(p - a) >= 0.0
        })
    }

    /// Apply a point transform to every vertex.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Result<Self, WorldError> {
        Self::new(self.vertices.map(f))
    }

    /// Whether any edge of this quad intersects any segment of `line`.
    pub fn intersects_polyline(&self, line: &Polyline) -> bool {
        let pts = line.points();
        (0..4).any(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % 4];
            pts.windows(2).any(|seg| segments_intersect(a, b, seg[0], seg[1]))
        })
    }

    /// Minimum distance from a point to this quad (0 if inside).
    pub fn distance_to_point(&self, p: Point) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        (0..4)
            .map(|i| point_segment_distance(p, self.vertices[i], self.vertices[(i + 1) % 4]))
            .fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<[[f64; 2]; 4]> for Quad {
    type Error = WorldError;
    fn try_from(v: [[f64; 2]; 4]) -> Result<Self, WorldError> {
        Quad::new(v.map(Point::from))
    }
}

impl From<Quad> for [[f64; 2]; 4] {
    fn from(q: Quad) -> Self {
        q.vertices.map(<[f64; 2]>::from)
    }
}

/// Euclidean minimum distance between two convex quadrilaterals.
///
/// Returns 0 exactly when the quads intersect or touch. The closest pair of
/// points between disjoint convex polygons lies on their boundaries, so the
/// minimum over all edge pairs is exact; containment covers the nested case.
pub fn min_polygon_distance(a: &Quad, b: &Quad) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..4 {
        for j in 0..4 {
            let d = segment_segment_distance(
                a.vertices[i],
                a.vertices[(i + 1) % 4],
                b.vertices[j],
                b.vertices[(j + 1) % 4],
            );
            if d == 0.0 {
                return 0.0;
            }
            best = best.min(d);
        }
    }
    if a.contains(b.vertices[0]) || b.contains(a.vertices[0]) {
        return 0.0;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_at(cx: f64, cy: f64) -> Quad {
        Quad::from_center_dims(Point::new(cx, cy), 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_wrong_vertex_count() {
        let pts = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert!(matches!(
            Quad::from_points(&pts),
            Err(WorldError::QuadVertexCount(3))
        ));
    }

    #[test]
    fn rejects_clockwise_winding() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
        ];
        assert!(Quad::new(pts).is_err());
    }

    #[test]
    fn rejects_zero_area() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(3.0, 0.0),
        ];
        assert!(Quad::new(pts).is_err());
    }

    #[test]
    fn overlapping_squares_have_zero_distance() {
        let a = unit_square_at(0.0, 0.0);
        assert_eq!(min_polygon_distance(&a, &a), 0.0);
    }

    #[test]
    fn separated_squares_distance_is_edge_gap() {
        let a = unit_square_at(0.0, 0.0);
        let b = unit_square_at(5.0, 0.0);
        assert_eq!(min_polygon_distance(&a, &b), 4.0);
    }

    #[test]
    fn nested_quads_have_zero_distance() {
        let outer = Quad::from_center_dims(Point::new(0.0, 0.0), 0.0, 10.0, 10.0).unwrap();
        let inner = unit_square_at(0.0, 0.0);
        assert_eq!(min_polygon_distance(&outer, &inner), 0.0);
        assert_eq!(min_polygon_distance(&inner, &outer), 0.0);
    }

    #[test]
    fn centroid_of_rotated_rect_is_center() {
        let q = Quad::from_center_dims(Point::new(3.0, -2.0), 0.7, 4.0, 2.0).unwrap();
        let c = q.centroid();
        assert!((c.x - 3.0).abs() < 1e-12);
        assert!((c.y + 2.0).abs() < 1e-12);
        assert!((q.area() - 8.0).abs() < 1e-9);
    }
}
