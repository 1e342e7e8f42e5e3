/// A position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        self.distance_squared(other).sqrt()
    }

    pub fn distance_squared(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Linear interpolation: `u = 0` gives `self`, `u = 1` gives `other`.
    pub fn lerp(self, other: Point, u: f64) -> Point {
        Point {
            x: self.x + (other.x - self.x) * u,
            y: self.y + (other.y - self.y) * u,
        }
    }
}

/// Distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let len2 = a.distance_squared(b);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let u = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / len2;
    p.distance(a.lerp(b, u.clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn distance_is_euclidean() {
        let d = Point::new(0.0, 0.0).distance(Point::new(3.0, 4.0));
        assert_abs_diff_eq!(d, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn lerp_hits_endpoints_and_midpoint() {
        let a = Point::new(2.0, -1.0);
        let b = Point::new(6.0, 3.0);
        assert_eq!(a.lerp(b, 0.0), a);
        assert_eq!(a.lerp(b, 1.0), b);
        assert_abs_diff_eq!(a.lerp(b, 0.5).x, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.lerp(b, 0.5).y, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn segment_distance_projects_inside_and_clamps_outside() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(10.0, 0.0);
        assert_abs_diff_eq!(
            point_segment_distance(Point::new(5.0, 3.0), a, b),
            3.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            point_segment_distance(Point::new(-4.0, 3.0), a, b),
            5.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            point_segment_distance(Point::new(13.0, 4.0), a, b),
            5.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn degenerate_segment_falls_back_to_point_distance() {
        let a = Point::new(1.0, 1.0);
        assert_abs_diff_eq!(
            point_segment_distance(Point::new(4.0, 5.0), a, a),
            5.0,
            epsilon = 1e-12
        );
    }
}
