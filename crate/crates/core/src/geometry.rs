//! Floating-point 2D geometry: points, segments, triangles and clipping.
//!
//! All predicates use the absolute tolerance [`GEOM_EPS`]; the paper domains
//! live in boxes of size ~1, so an absolute tolerance is adequate.

use std::ops::{Add, Mul, Sub};

use crate::{Error, Result};

/// Absolute geometric tolerance in domain units.
pub const GEOM_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn midpoint(self, o: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        Point2::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// A closed segment with distinct endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid_argument("segment endpoint is not finite"));
        }
        if a.dist(b) <= GEOM_EPS {
            return Err(Error::invalid_argument(format!(
                "degenerate segment ({}, {})-({}, {})",
                a.x, a.y, b.x, b.y
            )));
        }
        Ok(Segment { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn direction(&self) -> Point2 {
        self.b - self.a
    }

    pub fn point_at(&self, t: f64) -> Point2 {
        self.a.lerp(self.b, t)
    }

    /// Left unit normal of the direction `a -> b`.
    pub fn left_normal(&self) -> Point2 {
        let d = self.direction();
        let l = d.norm();
        Point2::new(-d.y / l, d.x / l)
    }

    /// Euclidean distance from `p` to the closed segment.
    pub fn distance_to(&self, p: Point2) -> f64 {
        let d = self.direction();
        let t = ((p - self.a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
        p.dist(self.point_at(t))
    }

    pub fn contains_point(&self, p: Point2) -> bool {
        self.distance_to(p) <= GEOM_EPS
    }

    /// Parameter of the orthogonal projection of `p` onto the supporting line.
    pub fn parameter_of(&self, p: Point2) -> f64 {
        let d = self.direction();
        (p - self.a).dot(d) / d.dot(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle2 {
    pub v0: Point2,
    pub v1: Point2,
    pub v2: Point2,
}

impl Triangle2 {
    pub const fn new(v0: Point2, v1: Point2, v2: Point2) -> Self {
        Triangle2 { v0, v1, v2 }
    }

    pub fn vertices(&self) -> [Point2; 3] {
        [self.v0, self.v1, self.v2]
    }

    pub fn area(&self) -> f64 {
        signed_area(self).abs()
    }

    /// Longest edge length.
    pub fn diameter(&self) -> f64 {
        let [a, b, c] = self.vertices();
        a.dist(b).max(b.dist(c)).max(c.dist(a))
    }

    pub fn centroid(&self) -> Point2 {
        Point2::new(
            (self.v0.x + self.v1.x + self.v2.x) / 3.0,
            (self.v0.y + self.v1.y + self.v2.y) / 3.0,
        )
    }

    /// Barycentric coordinates of `p`; they sum to one and are all
    /// non-negative when `p` is inside.
    pub fn barycentric(&self, p: Point2) -> [f64; 3] {
        let det = 2.0 * signed_area(self);
        let l1 = (p - self.v0).cross(self.v2 - self.v0) / det;
        let l2 = (self.v1 - self.v0).cross(p - self.v0) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn from_barycentric(&self, l: [f64; 3]) -> Point2 {
        Point2::new(
            l[0] * self.v0.x + l[1] * self.v1.x + l[2] * self.v2.x,
            l[0] * self.v0.y + l[1] * self.v1.y + l[2] * self.v2.y,
        )
    }

    /// Whether `p` lies in the closed triangle up to [`GEOM_EPS`] in distance.
    pub fn contains(&self, p: Point2) -> bool {
        let ccw = self.ccw();
        let [a, b, c] = ccw.vertices();
        [(a, b), (b, c), (c, a)].iter().all(|&(s, e)| {
            let d = e - s;
            d.cross(p - s) / d.norm() >= -GEOM_EPS
        })
    }

    /// The same triangle with counterclockwise vertex order.
    pub fn ccw(&self) -> Triangle2 {
        if signed_area(self) < 0.0 {
            Triangle2::new(self.v0, self.v2, self.v1)
        } else {
            *self
        }
    }
}

/// `½ (v1 - v0) × (v2 - v0)`; positive for counterclockwise triangles.
pub fn signed_area(tri: &Triangle2) -> f64 {
    0.5 * (tri.v1 - tri.v0).cross(tri.v2 - tri.v0)
}

/// Clip the parameter range of `seg` against half-planes `n·p >= c`, given as
/// pairs of inward unit normal and offset. Returns the surviving parameter
/// interval, or `None` when it is empty or shorter than [`GEOM_EPS`].
fn clip_halfplanes(seg: &Segment, planes: &[(Point2, f64)]) -> Option<(f64, f64)> {
    let d = seg.direction();
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for &(n, c) in planes {
        // signed distance along n at parameter t: s0 + t * ds
        let s0 = n.dot(seg.a) - c;
        let ds = n.dot(d);
        if ds.abs() <= f64::EPSILON * d.norm() {
            if s0 < -GEOM_EPS {
                return None;
            }
            continue;
        }
        let t = -s0 / ds;
        if ds > 0.0 {
            t0 = t0.max(t);
        } else {
            t1 = t1.min(t);
        }
        if t0 > t1 {
            return None;
        }
    }
    let (t0, t1) = (t0.clamp(0.0, 1.0), t1.clamp(0.0, 1.0));
    if (t1 - t0) * seg.length() <= GEOM_EPS {
        return None;
    }
    Some((t0, t1))
}

fn snap(p: Point2, candidates: &[Point2]) -> Point2 {
    candidates.iter().copied().find(|c| c.dist(p) <= GEOM_EPS).unwrap_or(p)
}

/// Portion of `seg` inside the closed triangle `tri`, or `None` when the
/// intersection is empty or degenerates to a point. Endpoints within
/// [`GEOM_EPS`] of a triangle vertex or a segment endpoint are snapped.
pub fn clip_segment_to_triangle(seg: &Segment, tri: &Triangle2) -> Option<Segment> {
    let t = tri.ccw();
    let vs = t.vertices();
    let mut planes = [(Point2::default(), 0.0); 3];
    for i in 0..3 {
        let (s, e) = (vs[i], vs[(i + 1) % 3]);
        let d = e - s;
        let n = Point2::new(-d.y, d.x) * (1.0 / d.norm());
        planes[i] = (n, n.dot(s));
    }
    let (t0, t1) = clip_halfplanes(seg, &planes)?;
    let snaps = [vs[0], vs[1], vs[2], seg.a, seg.b];
    let a = snap(seg.point_at(t0), &snaps);
    let b = snap(seg.point_at(t1), &snaps);
    Segment::new(a, b).ok()
}

/// Portion of `seg` inside the closed square `[center ± halfwidth]²`.
pub fn clip_segment_to_box(seg: &Segment, center: Point2, halfwidth: f64) -> Option<Segment> {
    debug_assert!(halfwidth > 0.0);
    let planes = [
        (Point2::new(1.0, 0.0), center.x - halfwidth),
        (Point2::new(-1.0, 0.0), -(center.x + halfwidth)),
        (Point2::new(0.0, 1.0), center.y - halfwidth),
        (Point2::new(0.0, -1.0), -(center.y + halfwidth)),
    ];
    let (t0, t1) = clip_halfplanes(seg, &planes)?;
    let snaps = [seg.a, seg.b];
    Segment::new(snap(seg.point_at(t0), &snaps), snap(seg.point_at(t1), &snaps)).ok()
}

/// Whether a simple polygon given by its vertex loop contains `p`
/// (boundary points count as inside).
pub fn polygon_contains(poly: &[Point2], p: Point2) -> bool {
    let n = poly.len();
    for i in 0..n {
        let s = Segment {
            a: poly[i],
            b: poly[(i + 1) % n],
        };
        if s.distance_to(p) <= GEOM_EPS {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (poly[i], poly[j]);
        if (pi.y > p.y) != (pj.y > p.y) {
            let x = pj.x + (p.y - pj.y) / (pi.y - pj.y) * (pi.x - pj.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Twice the signed area of a polygon loop (positive when CCW).
pub fn polygon_signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    0.5 * (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn unit_tri() -> Triangle2 {
        Triangle2::new(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0))
    }

    #[test]
    fn signed_area_examples() {
        assert_eq!(signed_area(&unit_tri()), 0.5);
        assert_eq!(
            signed_area(&Triangle2::new(p(0.0, 0.0), p(0.0, 1.0), p(1.0, 0.0))),
            -0.5
        );
        assert_eq!(signed_area(&Triangle2::new(p(0.0, 0.0), p(2.0, 0.0), p(0.0, 3.0))), 3.0);
    }

    #[test]
    fn clip_inside_is_identity() {
        let s = Segment::new(p(0.1, 0.1), p(0.3, 0.2)).unwrap();
        assert_eq!(clip_segment_to_triangle(&s, &unit_tri()), Some(s));
    }

    #[test]
    fn clip_disjoint_is_none() {
        let s = Segment::new(p(2.0, 2.0), p(3.0, 2.5)).unwrap();
        assert_eq!(clip_segment_to_triangle(&s, &unit_tri()), None);
    }

    #[test]
    fn clip_against_hypotenuse() {
        let s = Segment::new(p(0.0, 0.5), p(1.0, 0.5)).unwrap();
        let c = clip_segment_to_triangle(&s, &unit_tri()).unwrap();
        assert!(c.a.dist(p(0.0, 0.5)) < 1e-15);
        assert!(c.b.dist(p(0.5, 0.5)) < 1e-15);
    }

    #[test]
    fn clip_through_vertex_only_is_none() {
        // touches the triangle at (1, 0) only
        let s = Segment::new(p(1.0, -1.0), p(2.0, 1.0)).unwrap();
        assert_eq!(clip_segment_to_triangle(&s, &unit_tri()), None);
    }

    #[test]
    fn clip_along_edge_is_kept() {
        let s = Segment::new(p(-1.0, 0.0), p(0.5, 0.0)).unwrap();
        let c = clip_segment_to_triangle(&s, &unit_tri()).unwrap();
        assert_eq!(c.a, p(0.0, 0.0));
        assert!((c.b.x - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clip_handles_clockwise_input() {
        let cw = Triangle2::new(p(0.0, 0.0), p(0.0, 1.0), p(1.0, 0.0));
        let s = Segment::new(p(0.0, 0.5), p(1.0, 0.5)).unwrap();
        let c = clip_segment_to_triangle(&s, &cw).unwrap();
        assert!((c.length() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn box_clip_examples() {
        let r = 0.05;
        let c = p(0.3, 0.4);
        let s = Segment::new(p(0.0, 0.4), p(1.0, 0.4)).unwrap();
        let k = clip_segment_to_box(&s, c, r).unwrap();
        assert!((k.length() - 2.0 * r).abs() < 1e-15);

        let far = Segment::new(p(0.0, 0.46), p(1.0, 0.46)).unwrap();
        assert_eq!(clip_segment_to_box(&far, c, r), None);

        let one_sided = Segment::new(p(0.0, 0.0), p(0.08, 0.0)).unwrap();
        let k = clip_segment_to_box(&one_sided, p(0.0, 0.0), 0.05).unwrap();
        assert_eq!(k.a, p(0.0, 0.0));
        assert!(k.b.dist(p(0.05, 0.0)) < 1e-15);
        assert!((k.length() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn degenerate_segment_rejected() {
        assert!(Segment::new(p(0.2, 0.2), p(0.2, 0.2)).is_err());
    }

    #[test]
    fn polygon_queries() {
        let l = [
            p(-1.0, -1.0),
            p(1.0, -1.0),
            p(1.0, 0.0),
            p(0.0, 0.0),
            p(0.0, 1.0),
            p(-1.0, 1.0),
        ];
        assert!(polygon_signed_area(&l) > 0.0);
        assert!((polygon_signed_area(&l) - 3.0).abs() < 1e-15);
        assert!(polygon_contains(&l, p(-0.5, 0.5)));
        assert!(!polygon_contains(&l, p(0.5, 0.5)));
        assert!(polygon_contains(&l, p(0.0, 0.5)));
    }

    fn pt() -> impl Strategy<Value = Point2> {
        (-1.0..2.0f64, -1.0..2.0f64).prop_map(|(x, y)| Point2::new(x, y))
    }

    proptest! {
        #[test]
        fn clip_is_contained_and_idempotent(a in pt(), b in pt(), v0 in pt(), v1 in pt(), v2 in pt()) {
            let tri = Triangle2::new(v0, v1, v2);
            prop_assume!(tri.area() > 1e-3);
            let Ok(seg) = Segment::new(a, b) else { return Ok(()); };
            if let Some(c) = clip_segment_to_triangle(&seg, &tri) {
                prop_assert!(c.length() <= seg.length() + 1e-14);
                for q in [c.a, c.b] {
                    prop_assert!(seg.distance_to(q) <= 1e-12);
                    let l = tri.barycentric(q);
                    prop_assert!(l.iter().all(|&x| x >= -1e-9), "{:?}", l);
                }
                let again = clip_segment_to_triangle(&c, &tri).expect("idempotent clip lost the piece");
                prop_assert!(again.a.dist(c.a) <= 1e-14 && again.b.dist(c.b) <= 1e-14);
            }
        }

        #[test]
        fn box_clip_is_contained_and_idempotent(a in pt(), b in pt(), c in pt(), h in 0.01..0.5f64) {
            let Ok(seg) = Segment::new(a, b) else { return Ok(()); };
            if let Some(k) = clip_segment_to_box(&seg, c, h) {
                prop_assert!(k.length() <= seg.length() + 1e-14);
                for q in [k.a, k.b] {
                    prop_assert!((q.x - c.x).abs() <= h + 1e-12 && (q.y - c.y).abs() <= h + 1e-12);
                }
                let again = clip_segment_to_box(&k, c, h).unwrap();
                prop_assert!(again.a.dist(k.a) <= 1e-14 && again.b.dist(k.b) <= 1e-14);
            }
        }
    }
}
