use crate::geometry::Point2;
use crate::mesh::{DomainSpec, FractureSet, Mesh};
use crate::{Error, Result};

/// How each grid cell of a structured mesh is split into two triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagonalPattern {
    /// Every cell split along its bottom-left to top-right diagonal.
    #[default]
    Uniform,
    /// Diagonal direction alternates in a checkerboard.
    Alternating,
}

/// `n × n` cells on the unit square, each split into four triangles by both
/// diagonals. Fractures are not resolved by the mesh.
pub fn build_unit_square_unionjack(n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::invalid_argument(format!(
            "union-jack mesh needs n >= 2, got {n}"
        )));
    }
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1) + n * n);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point2::new(i as f64 * h, j as f64 * h));
        }
    }
    let grid = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::with_capacity(4 * n * n);
    for j in 0..n {
        for i in 0..n {
            let c = vertices.len();
            vertices.push(Point2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h));
            let (bl, br, tr, tl) = (grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1));
            triangles.extend([[bl, br, c], [br, tr, c], [tr, tl, c], [tl, bl, c]]);
        }
    }
    Mesh::from_triangles(vertices, triangles, Vec::new())
}

/// Structured mesh of `domain` whose edges tile every fracture. The grid has
/// `n` cells along the longer side of the domain's bounding box.
pub fn build_fracture_conforming(domain: &DomainSpec, fractures: &FractureSet, n: usize) -> Result<Mesh> {
    build_fracture_conforming_with(domain, fractures, n, DiagonalPattern::Uniform)
}

pub fn build_fracture_conforming_with(
    domain: &DomainSpec,
    fractures: &FractureSet,
    n: usize,
    pattern: DiagonalPattern,
) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::invalid_argument("grid needs n >= 1"));
    }
    fractures.check_inside(domain)?;
    let (lo, hi) = domain.bounding_box();
    let h = (hi.x - lo.x).max(hi.y - lo.y) / n as f64;
    let grid_index = |v: f64, origin: f64| -> Option<usize> {
        let k = (v - origin) / h;
        ((k - k.round()).abs() <= 1e-9).then(|| k.round() as usize)
    };
    let nx = grid_index(hi.x, lo.x)
        .ok_or_else(|| Error::invalid_argument(format!("domain width is not a multiple of h = {h}")))?;
    let ny = grid_index(hi.y, lo.y)
        .ok_or_else(|| Error::invalid_argument(format!("domain height is not a multiple of h = {h}")))?;
    let on_grid = |p: Point2| grid_index(p.x, lo.x).is_some() && grid_index(p.y, lo.y).is_some();
    for p in &domain.polygon {
        if !on_grid(*p) {
            return Err(Error::invalid_argument(format!(
                "domain vertex ({}, {}) is not on the grid of spacing {h}",
                p.x, p.y
            )));
        }
    }
    for (l, s) in fractures.segments().iter().enumerate() {
        for p in [s.a, s.b] {
            if !on_grid(p) {
                return Err(Error::invalid_argument(format!(
                    "fracture {l} endpoint ({}, {}) is not on the grid of spacing {h}",
                    p.x, p.y
                )));
            }
        }
    }

    let node = |i: usize, j: usize| j * (nx + 1) + i;
    let mut used = vec![u32::MAX; (nx + 1) * (ny + 1)];
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let center = Point2::new(lo.x + (i as f64 + 0.5) * h, lo.y + (j as f64 + 0.5) * h);
            if !domain.contains(center) {
                continue;
            }
            let mut id = |i: usize, j: usize| {
                let k = node(i, j);
                if used[k] == u32::MAX {
                    used[k] = vertices.len() as u32;
                    vertices.push(Point2::new(lo.x + i as f64 * h, lo.y + j as f64 * h));
                }
                used[k] as usize
            };
            let (bl, br, tr, tl) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let flip = pattern == DiagonalPattern::Alternating && (i + j) % 2 == 1;
            if flip {
                triangles.extend([[bl, br, tl], [br, tr, tl]]);
            } else {
                triangles.extend([[bl, br, tr], [bl, tr, tl]]);
            }
        }
    }
    let mesh = Mesh::from_triangles(vertices, triangles, fractures.segments().to_vec())?;
    for (l, s) in fractures.segments().iter().enumerate() {
        let covered = mesh.tagged_length(l);
        if (covered - s.length()).abs() > 1e-12 * s.length().max(1.0) {
            return Err(Error::invalid_argument(format!(
                "fracture {l} is not a union of grid edges (covered {covered} of {})",
                s.length()
            )));
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Coefficient;
    use crate::geometry::Segment;
    use crate::mesh::{validate, EdgeClass};

    fn gamma1() -> FractureSet {
        let s = Segment::new(Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)).unwrap();
        FractureSet::new(vec![s], vec![Coefficient::Constant(2.0)]).unwrap()
    }

    #[test]
    fn unionjack_counts() {
        let m = build_unit_square_unionjack(2).unwrap();
        assert_eq!((m.num_triangles(), m.num_vertices()), (16, 13));
        let m = build_unit_square_unionjack(4).unwrap();
        assert_eq!(m.num_triangles(), 64);
        for t in 0..m.num_triangles() {
            assert!((m.area(t) - 1.0 / 64.0).abs() < 1e-15);
        }
        assert_eq!(m.num_fracture_edges(), 0);
        assert!(validate(&m).is_ok());
        assert!(build_unit_square_unionjack(1).is_err());
    }

    #[test]
    fn conforming_unit_square_tags_two_edges() {
        let m = build_fracture_conforming(&DomainSpec::unit_square(), &gamma1(), 4).unwrap();
        assert_eq!(m.num_fracture_edges(), 2);
        assert!(m.is_fracture_conforming());
        assert!(validate(&m).is_ok());
    }

    #[test]
    fn off_grid_fracture_names_coordinate() {
        let s = Segment::new(Point2::new(0.3, 0.5), Point2::new(0.75, 0.5)).unwrap();
        let f = FractureSet::new(vec![s], vec![Coefficient::Constant(1.0)]).unwrap();
        let err = build_fracture_conforming(&DomainSpec::unit_square(), &f, 4).unwrap_err();
        assert!(err.to_string().contains("(0.3, 0.5)"), "{err}");
    }

    #[test]
    fn lshape_loop_tags_all_six_edges() {
        let p = |x, y| Point2::new(x, y);
        let corners = [
            p(-0.8, -0.8),
            p(-0.2, -0.8),
            p(-0.2, -0.5),
            p(-0.5, -0.5),
            p(-0.5, -0.2),
            p(-0.8, -0.2),
        ];
        let segs: Vec<_> = (0..6)
            .map(|i| Segment::new(corners[i], corners[(i + 1) % 6]).unwrap())
            .collect();
        let f = FractureSet::new(segs, vec![Coefficient::Constant(5.0); 6]).unwrap();
        let m = build_fracture_conforming(&DomainSpec::lshape(), &f, 20).unwrap();
        assert_eq!(m.num_triangles(), 600);
        for l in 0..6 {
            assert!((m.tagged_length(l) - f.segments()[l].length()).abs() < 1e-12);
        }
        assert!(validate(&m).is_ok());
        let boundary = m.edge_classes().iter().filter(|c| **c == EdgeClass::Boundary).count();
        assert_eq!(boundary, 80);
    }

    #[test]
    fn empty_fracture_set_gives_plain_mesh() {
        for pattern in [DiagonalPattern::Uniform, DiagonalPattern::Alternating] {
            let m =
                build_fracture_conforming_with(&DomainSpec::unit_square(), &FractureSet::empty(), 3, pattern).unwrap();
            assert_eq!(m.num_fracture_edges(), 0);
            assert_eq!(m.num_triangles(), 18);
            assert!(validate(&m).is_ok());
        }
    }
}
