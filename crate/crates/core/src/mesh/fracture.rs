use crate::fem::Coefficient;
use crate::geometry::{Point2, Segment, GEOM_EPS};
use crate::mesh::DomainSpec;
use crate::{Error, Result};

/// Line fractures `γ_l` with their source densities `g_l`.
#[derive(Debug, Clone, Default)]
pub struct FractureSet {
    segments: Vec<Segment>,
    coefficients: Vec<Coefficient>,
}

impl FractureSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Fractures may meet only at shared endpoints.
    pub fn new(segments: Vec<Segment>, coefficients: Vec<Coefficient>) -> Result<Self> {
        if segments.len() != coefficients.len() {
            return Err(Error::invalid_argument(format!(
                "{} fractures but {} coefficients",
                segments.len(),
                coefficients.len()
            )));
        }
        for i in 0..segments.len() {
            for j in i + 1..segments.len() {
                if improper_overlap(&segments[i], &segments[j]) {
                    return Err(Error::invalid_argument(format!(
                        "fractures {i} and {j} intersect away from a shared endpoint"
                    )));
                }
            }
        }
        Ok(FractureSet { segments, coefficients })
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn coefficients(&self) -> &[Coefficient] {
        &self.coefficients
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Segment, &Coefficient)> {
        self.segments.iter().zip(&self.coefficients)
    }

    /// Checks that every fracture lies strictly inside `domain`.
    pub fn check_inside(&self, domain: &DomainSpec) -> Result<()> {
        for (l, s) in self.segments.iter().enumerate() {
            for t in [0.0, 0.5, 1.0] {
                let p = s.point_at(t);
                if !domain.contains(p) || domain.on_boundary(p) {
                    return Err(Error::invalid_argument(format!(
                        "fracture {l} point ({}, {}) is not strictly inside the domain",
                        p.x, p.y
                    )));
                }
            }
        }
        Ok(())
    }
}

fn improper_overlap(s: &Segment, t: &Segment) -> bool {
    let shared = |p: Point2| p.dist(t.a) <= GEOM_EPS || p.dist(t.b) <= GEOM_EPS;
    let d = s.direction();
    let e = t.direction();
    let denom = d.cross(e);
    if denom.abs() <= GEOM_EPS * d.norm() * e.norm() {
        // Parallel: overlap only if collinear with a common stretch.
        if s.distance_to(t.a).min(s.distance_to(t.b)) > GEOM_EPS && t.distance_to(s.a) > GEOM_EPS {
            return false;
        }
        let (ta, tb) = (s.parameter_of(t.a), s.parameter_of(t.b));
        let (lo, hi) = (ta.min(tb).max(0.0), ta.max(tb).min(1.0));
        return (hi - lo) * s.length() > GEOM_EPS;
    }
    let w = t.a - s.a;
    let u = w.cross(e) / denom;
    let v = w.cross(d) / denom;
    let tol = GEOM_EPS;
    if u < -tol || u > 1.0 + tol || v < -tol || v > 1.0 + tol {
        return false;
    }
    let p = s.point_at(u.clamp(0.0, 1.0));
    let at_s_end = p.dist(s.a) <= GEOM_EPS || p.dist(s.b) <= GEOM_EPS;
    !(at_s_end && shared(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
        Segment::new(Point2::new(ax, ay), Point2::new(bx, by)).unwrap()
    }

    #[test]
    fn star_fractures_meeting_at_center_are_accepted() {
        let q = (0.5, 0.5);
        let segs = vec![
            seg(q.0, q.1, 0.25, 0.5),
            seg(q.0, q.1, 0.75, 0.5),
            seg(q.0, q.1, 0.5, 0.25),
            seg(q.0, q.1, 0.5, 0.75),
        ];
        let g = vec![Coefficient::Constant(1.0); 4];
        assert!(FractureSet::new(segs, g).is_ok());
    }

    #[test]
    fn crossing_fractures_are_rejected() {
        let segs = vec![seg(0.2, 0.5, 0.8, 0.5), seg(0.5, 0.2, 0.5, 0.8)];
        let g = vec![Coefficient::Constant(1.0); 2];
        assert!(FractureSet::new(segs, g).is_err());
    }

    #[test]
    fn collinear_overlap_rejected_but_chain_accepted() {
        let g = vec![Coefficient::Constant(1.0); 2];
        assert!(FractureSet::new(vec![seg(0.2, 0.5, 0.6, 0.5), seg(0.4, 0.5, 0.8, 0.5)], g.clone()).is_err());
        assert!(FractureSet::new(vec![seg(0.2, 0.5, 0.6, 0.5), seg(0.6, 0.5, 0.8, 0.5)], g).is_ok());
    }

    #[test]
    fn inside_check() {
        let f = FractureSet::new(vec![seg(0.0, 0.5, 0.5, 0.5)], vec![Coefficient::Constant(1.0)]).unwrap();
        assert!(f.check_inside(&DomainSpec::unit_square()).is_err());
    }
}
