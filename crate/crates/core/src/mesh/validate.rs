use std::fmt;

use crate::geometry::{signed_area, GEOM_EPS};
use crate::mesh::{EdgeClass, Mesh};

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveArea {
        triangle: usize,
    },
    /// Triangle/edge adjacency tables disagree.
    Adjacency {
        triangle: usize,
    },
    /// Boundary tag does not match the number of adjacent triangles.
    EdgeClass {
        edge: usize,
    },
    HangingNode {
        edge: usize,
        vertex: usize,
    },
    FractureOffSegment {
        edge: usize,
        fracture: usize,
    },
    FractureNotTiled {
        fracture: usize,
        covered: f64,
        expected: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveArea { triangle } => write!(f, "triangle {triangle} has non-positive area"),
            Violation::Adjacency { triangle } => write!(f, "triangle {triangle} has inconsistent edge adjacency"),
            Violation::EdgeClass { edge } => write!(f, "edge {edge} has a class inconsistent with its neighbours"),
            Violation::HangingNode { edge, vertex } => {
                write!(f, "hanging node: vertex {vertex} lies inside edge {edge}")
            }
            Violation::FractureOffSegment { edge, fracture } => {
                write!(
                    f,
                    "edge {edge} is tagged with fracture {fracture} but does not lie on it"
                )
            }
            Violation::FractureNotTiled {
                fracture,
                covered,
                expected,
            } => {
                write!(
                    f,
                    "fracture {fracture}: tagged length {covered} differs from {expected}"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Check every mesh invariant and list the violations found.
pub fn validate(mesh: &Mesh) -> ValidationReport {
    let mut out = Vec::new();
    for t in 0..mesh.num_triangles() {
        if signed_area(&mesh.triangle_geom(t)) <= 0.0 {
            out.push(Violation::NonPositiveArea { triangle: t });
        }
        let tri = mesh.triangle(t);
        let consistent = mesh.triangle_edges(t).iter().enumerate().all(|(i, &e)| {
            let mut ends = mesh.edge(e);
            ends.sort();
            let mut expect = [tri[(i + 1) % 3], tri[(i + 2) % 3]];
            expect.sort();
            let (a, b) = mesh.edge_triangles(e);
            ends == expect && (a == t || b == Some(t))
        });
        if !consistent {
            out.push(Violation::Adjacency { triangle: t });
        }
    }
    for e in 0..mesh.num_edges() {
        let single = mesh.edge_triangles(e).1.is_none();
        if single != (mesh.edge_class(e) == EdgeClass::Boundary) {
            out.push(Violation::EdgeClass { edge: e });
        }
    }
    hanging_nodes(mesh, &mut out);

    let fr = mesh.fractures();
    let mut covered = vec![0.0; fr.len()];
    for e in 0..mesh.num_edges() {
        if let Some(l) = mesh.edge_class(e).fracture() {
            let seg = mesh.edge_segment(e);
            if l >= fr.len() || !(fr[l].contains_point(seg.a) && fr[l].contains_point(seg.b)) {
                out.push(Violation::FractureOffSegment { edge: e, fracture: l });
            } else {
                covered[l] += seg.length();
            }
        }
    }
    if mesh.num_fracture_edges() > 0 {
        for (l, s) in fr.iter().enumerate() {
            if (covered[l] - s.length()).abs() > 1e-12 * s.length().max(1.0) {
                out.push(Violation::FractureNotTiled {
                    fracture: l,
                    covered: covered[l],
                    expected: s.length(),
                });
            }
        }
    }
    ValidationReport { violations: out }
}

/// A hanging node leaves an edge with a single neighbour that has a vertex
/// in its interior; only such edges need scanning.
fn hanging_nodes(mesh: &Mesh, out: &mut Vec<Violation>) {
    let nv = mesh.num_vertices();
    if nv == 0 {
        return;
    }
    let (mut lo, mut hi) = (mesh.vertex(0), mesh.vertex(0));
    for p in mesh.vertices() {
        lo = crate::geometry::Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = crate::geometry::Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let g = (nv as f64).sqrt().ceil().max(1.0) as usize;
    let (w, h) = ((hi.x - lo.x).max(GEOM_EPS), (hi.y - lo.y).max(GEOM_EPS));
    let cell = |x: f64, y: f64| {
        let i = (((x - lo.x) / w * g as f64) as usize).min(g - 1);
        let j = (((y - lo.y) / h * g as f64) as usize).min(g - 1);
        (i, j)
    };
    let mut buckets = vec![Vec::new(); g * g];
    for (v, p) in mesh.vertices().iter().enumerate() {
        let (i, j) = cell(p.x, p.y);
        buckets[j * g + i].push(v);
    }
    for e in 0..mesh.num_edges() {
        if mesh.edge_triangles(e).1.is_some() {
            continue;
        }
        let [a, b] = mesh.edge(e);
        let seg = mesh.edge_segment(e);
        let (i0, j0) = cell(seg.a.x.min(seg.b.x) - GEOM_EPS, seg.a.y.min(seg.b.y) - GEOM_EPS);
        let (i1, j1) = cell(seg.a.x.max(seg.b.x) + GEOM_EPS, seg.a.y.max(seg.b.y) + GEOM_EPS);
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &v in &buckets[j * g + i] {
                    if v != a && v != b && seg.distance_to(mesh.vertex(v)) <= GEOM_EPS {
                        out.push(Violation::HangingNode { edge: e, vertex: v });
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    #[test]
    fn hanging_node_is_reported_with_edge() {
        // Left triangle keeps the whole diagonal, the right side is split at
        // its midpoint.
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.5, 0.5),
        ];
        let m = Mesh::from_triangles(v, vec![[0, 2, 3], [0, 1, 4], [4, 1, 2]], vec![]).unwrap();
        let report = validate(&m);
        let diag = (0..m.num_edges()).find(|&e| m.edge(e) == [0, 2]).unwrap();
        assert!(report
            .violations
            .contains(&Violation::HangingNode { edge: diag, vertex: 4 }));
    }

    #[test]
    fn flipped_triangle_is_reported() {
        let v = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let mut m = Mesh::from_triangles(v, vec![[0, 1, 2]], vec![]).unwrap();
        m.raw_parts_mut().0[2] = Point2::new(0.0, -1.0);
        assert!(validate(&m)
            .violations
            .contains(&Violation::NonPositiveArea { triangle: 0 }));
    }
}
