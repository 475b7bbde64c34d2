//! Arc-length queries over piecewise-linear paths.

use super::geometry::Point;
use super::WorldError;

/// A polyline with precomputed cumulative arc lengths, supporting projection
/// and interpolation by arc length. Lane centerlines and boundaries are
/// wrapped in this for the chain, IDM, and scoring code.
#[derive(Debug, Clone)]
pub struct Polyline {
    points: Vec<Point>,
    cumulative: Vec<f64>,
}

impl Polyline {
    pub fn new(points: Vec<Point>) -> Result<Self, WorldError> {
        if points.len() < 2 {
            return Err(WorldError::PolylineTooShort(points.len()));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        let mut total = 0.0;
        cumulative.push(0.0);
        for pair in points.windows(2) {
            total += pair[0].distance(pair[1]);
            cumulative.push(total);
        }
        Ok(Self { points, cumulative })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Point at arc length `s`. Beyond either end the final (or initial)
    /// tangent is extended, so callers can advance past the stored path.
    pub fn point_at(&self, s: f64) -> Point {
        if s <= 0.0 {
            let t = self.tangent_at(0.0);
            return self.points[0] + t * s;
        }
        if s >= self.length() {
            let t = self.tangent_at(self.length());
            return *self.points.last().unwrap() + t * (s - self.length());
        }
        let i = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&s).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let seg_len = self.cumulative[i + 1] - self.cumulative[i];
        let frac = if seg_len > 0.0 {
            (s - self.cumulative[i]) / seg_len
        } else {
            0.0
        };
        self.points[i] + (self.points[i + 1] - self.points[i]) * frac
    }

    /// Unit tangent of the segment containing arc length `s` (clamped to the
    /// first/last segment outside the path).
    pub fn tangent_at(&self, s: f64) -> Point {
        let i = self.segment_index(s);
        let d = self.points[i + 1] - self.points[i];
        let n = d.norm();
        if n > 0.0 {
            d * (1.0 / n)
        } else {
            Point::new(1.0, 0.0)
        }
    }

    /// Heading angle (radians from +X) of the tangent at arc length `s`.
    pub fn heading_at(&self, s: f64) -> f64 {
        let t = self.tangent_at(s);
        t.y.atan2(t.x)
    }

    /// Project `p` onto the polyline: returns (arc length, signed lateral
    /// offset). Positive lateral offset means `p` is on the left of the
    /// path direction.
    pub fn project(&self, p: Point) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..self.points.len() - 1 {
            let a = self.points[i];
            let b = self.points[i + 1];
            let ab = b - a;
            let len2 = ab.dot(ab);
            if len2 == 0.0 {
                continue;
            }
            let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
            let q = a + ab * t;
            let d = p.distance(q);
            if d < best.0 {
                let s = self.cumulative[i] + ab.norm() * t;
                let lateral = ab.cross(p - a) / ab.norm();
                best = (d, s, lateral);
            }
        }
        (best.1, best.2)
    }

    /// Signed side of `p` relative to the nearest segment: positive left,
    /// negative right.
    pub fn side_of(&self, p: Point) -> f64 {
        let (_, lateral) = self.project(p);
        lateral
    }

    /// Applies `f` to every point and rebuilds the cumulative lengths.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Polyline {
        let points: Vec<Point> = self.points.iter().map(|&p| f(p)).collect();
        Polyline::new(points).expect("mapped polyline keeps its point count")
    }

    fn segment_index(&self, s: f64) -> usize {
        if s <= 0.0 {
            return 0;
        }
        if s >= self.length() {
            return self.points.len() - 2;
        }
        match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(self.points.len() - 2),
            Err(i) => i - 1,
        }
    }
}
