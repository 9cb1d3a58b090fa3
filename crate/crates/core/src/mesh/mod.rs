//! Conforming triangulations with fracture-tagged edges.
//!
//! A [`Mesh`] is immutable once built. Refinement ([`red_refine`],
//! [`bisect`]) returns a new mesh that records, for every child triangle, the
//! triangle of the input mesh it lies in; prolongation between nested spaces
//! relies on that link.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::geometry::{polygon_signed_area, signed_area, Point2, Segment, Triangle2, GEOM_EPS};
use crate::{par, Error, Result};

mod build;
mod fracture;
pub mod io;
mod refine;
mod validate;

pub use build::{
    build_fracture_conforming, build_fracture_conforming_with, build_unit_square_unionjack, DiagonalPattern,
};
pub use fracture::FractureSet;
pub use refine::{bisect, red_refine};
pub use validate::{validate, ValidationReport, Violation};

/// Sentinel for "no triangle" in edge adjacency.
pub const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    Boundary,
    /// Lies on fracture `l` (index into [`Mesh::fractures`]).
    Fracture(u32),
    Interior,
}

impl EdgeClass {
    pub fn is_interior(self) -> bool {
        !matches!(self, EdgeClass::Boundary)
    }

    pub fn fracture(self) -> Option<usize> {
        match self {
            EdgeClass::Fracture(l) => Some(l as usize),
            _ => None,
        }
    }
}

/// Simple polygonal domain, counterclockwise, no holes.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub polygon: Vec<Point2>,
}

impl DomainSpec {
    pub fn new(polygon: Vec<Point2>) -> Result<Self> {
        if polygon.len() < 3 {
            return Err(Error::invalid_argument("domain polygon needs at least 3 vertices"));
        }
        if polygon_signed_area(&polygon) <= 0.0 {
            return Err(Error::invalid_argument("domain polygon must be counterclockwise"));
        }
        let n = polygon.len();
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let a = (polygon[i], polygon[(i + 1) % n]);
                let b = (polygon[j], polygon[(j + 1) % n]);
                if segments_intersect(a, b) {
                    return Err(Error::invalid_argument(format!(
                        "domain polygon is not simple: edges {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(DomainSpec { polygon })
    }

    pub fn unit_square() -> Self {
        DomainSpec {
            polygon: vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0),
            ],
        }
    }

    /// `(-1, 1)² \ [0, 1)²`.
    pub fn lshape() -> Self {
        DomainSpec {
            polygon: vec![
                Point2::new(-1.0, -1.0),
                Point2::new(1.0, -1.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 0.0),
                Point2::new(0.0, 1.0),
                Point2::new(-1.0, 1.0),
            ],
        }
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.polygon {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    pub fn contains(&self, p: Point2) -> bool {
        crate::geometry::polygon_contains(&self.polygon, p)
    }

    pub fn on_boundary(&self, p: Point2) -> bool {
        let n = self.polygon.len();
        (0..n).any(|i| {
            Segment {
                a: self.polygon[i],
                b: self.polygon[(i + 1) % n],
            }
            .distance_to(p)
                <= GEOM_EPS
        })
    }
}

fn segments_intersect((a, b): (Point2, Point2), (c, d): (Point2, Point2)) -> bool {
    let o = |p: Point2, q: Point2, r: Point2| (q - p).cross(r - p);
    let (d1, d2) = (o(c, d, a), o(c, d, b));
    let (d3, d4) = (o(a, b, c), o(a, b, d));
    ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0)) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// Link from a refined mesh to the mesh it was refined from.
#[derive(Debug, Clone)]
pub struct ParentLink {
    pub mesh_id: u64,
    /// For every triangle of the fine mesh, the coarse triangle containing it.
    pub coarse_triangle: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    id: u64,
    vertices: Vec<Point2>,
    triangles: Vec<[u32; 3]>,
    /// Edge opposite local vertex `i`.
    tri_edges: Vec<[u32; 3]>,
    /// Endpoints with `lo < hi`.
    edges: Vec<[u32; 2]>,
    /// First adjacent triangle, and the second or [`NONE`].
    edge_tris: Vec<[u32; 2]>,
    edge_class: Vec<EdgeClass>,
    generation: Vec<u32>,
    fractures: Vec<Segment>,
    parent: Option<ParentLink>,
}

static NEXT_MESH_ID: AtomicU64 = AtomicU64::new(1);

impl Mesh {
    /// Build a mesh from vertices and triangles, tagging interior edges that
    /// lie on one of `fractures` as fracture edges. Clockwise triangles are
    /// reoriented; degenerate ones are rejected.
    pub fn from_triangles(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>, fractures: Vec<Segment>) -> Result<Mesh> {
        let tris = checked_triangles(&vertices, &triangles)?;
        let generation = vec![0; tris.len()];
        let frac = fractures.clone();
        let verts = &vertices;
        Mesh::assemble(vertices.clone(), tris, generation, fractures, None, |a, b| {
            let (pa, pb) = (verts[a as usize], verts[b as usize]);
            frac.iter()
                .position(|s| s.contains_point(pa) && s.contains_point(pb))
                .map(|l| l as u32)
        })
    }

    /// Like [`Mesh::from_triangles`] but with explicit fracture tags keyed by
    /// sorted vertex pair.
    pub fn from_tagged_edges(
        vertices: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
        fractures: Vec<Segment>,
        tags: &HashMap<(u32, u32), u32>,
    ) -> Result<Mesh> {
        let tris = checked_triangles(&vertices, &triangles)?;
        let generation = vec![0; tris.len()];
        Mesh::assemble(vertices, tris, generation, fractures, None, |a, b| {
            tags.get(&(a, b)).copied()
        })
    }

    /// Core constructor: builds the edge table from CCW triangles. `tag`
    /// returns the fracture index for an interior edge `(lo, hi)`, if any.
    pub(crate) fn assemble(
        vertices: Vec<Point2>,
        triangles: Vec<[u32; 3]>,
        generation: Vec<u32>,
        fractures: Vec<Segment>,
        parent: Option<ParentLink>,
        tag: impl Fn(u32, u32) -> Option<u32> + Sync,
    ) -> Result<Mesh> {
        let nt = triangles.len();
        let mut half: Vec<(u64, u32)> = Vec::with_capacity(3 * nt);
        for (t, tri) in triangles.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                let key = ((a.min(b) as u64) << 32) | a.max(b) as u64;
                half.push((key, (3 * t + i) as u32));
            }
        }
        par::sort_unstable(&mut half);

        let mut edges = Vec::with_capacity(3 * nt / 2 + 1);
        let mut edge_tris = Vec::with_capacity(edges.capacity());
        let mut tri_edges = vec![[NONE; 3]; nt];
        let mut i = 0;
        while i < half.len() {
            let key = half[i].0;
            let mut j = i + 1;
            while j < half.len() && half[j].0 == key {
                j += 1;
            }
            if j - i > 2 {
                return Err(Error::invalid_argument(format!(
                    "edge ({}, {}) is shared by {} triangles",
                    key >> 32,
                    key & 0xffff_ffff,
                    j - i
                )));
            }
            let e = edges.len() as u32;
            edges.push([(key >> 32) as u32, (key & 0xffff_ffff) as u32]);
            let mut adj = [NONE; 2];
            for (k, &(_, slot)) in half[i..j].iter().enumerate() {
                let (t, l) = (slot as usize / 3, slot as usize % 3);
                tri_edges[t][l] = e;
                adj[k] = t as u32;
            }
            edge_tris.push(adj);
            i = j;
        }
        drop(half);

        let edge_class = par::map_range(edges.len(), |e| {
            if edge_tris[e][1] == NONE {
                EdgeClass::Boundary
            } else {
                match tag(edges[e][0], edges[e][1]) {
                    Some(l) => EdgeClass::Fracture(l),
                    None => EdgeClass::Interior,
                }
            }
        });

        Ok(Mesh {
            id: NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed),
            vertices,
            triangles,
            tri_edges,
            edges,
            edge_tris,
            edge_class,
            generation,
            fractures,
            parent,
        })
    }

    /// Process-unique identifier, used to check nesting of mesh pairs.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point2 {
        self.vertices[v]
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        let [a, b, c] = self.triangles[t];
        [a as usize, b as usize, c as usize]
    }

    pub fn triangle_geom(&self, t: usize) -> Triangle2 {
        let [a, b, c] = self.triangles[t];
        Triangle2::new(
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        )
    }

    /// Edges of triangle `t`, the `i`-th opposite local vertex `i`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        let [a, b, c] = self.tri_edges[t];
        [a as usize, b as usize, c as usize]
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        let [a, b] = self.edges[e];
        [a as usize, b as usize]
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn edge_segment(&self, e: usize) -> Segment {
        let [a, b] = self.edges[e];
        Segment {
            a: self.vertices[a as usize],
            b: self.vertices[b as usize],
        }
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        self.edge_segment(e).length()
    }

    /// Adjacent triangles: the first always exists.
    pub fn edge_triangles(&self, e: usize) -> (usize, Option<usize>) {
        let [a, b] = self.edge_tris[e];
        (a as usize, (b != NONE).then_some(b as usize))
    }

    pub fn edge_class(&self, e: usize) -> EdgeClass {
        self.edge_class[e]
    }

    pub fn edge_classes(&self) -> &[EdgeClass] {
        &self.edge_class
    }

    pub fn generation(&self, t: usize) -> u32 {
        self.generation[t]
    }

    pub fn generations(&self) -> &[u32] {
        &self.generation
    }

    /// Fracture segments the edge tags refer to.
    pub fn fractures(&self) -> &[Segment] {
        &self.fractures
    }

    pub fn parent(&self) -> Option<&ParentLink> {
        self.parent.as_ref()
    }

    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.triangle_geom(t))
    }

    /// Diameter `h_T` (longest edge).
    pub fn diameter(&self, t: usize) -> f64 {
        self.triangle_geom(t).diameter()
    }

    /// Largest triangle diameter.
    pub fn max_diameter(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    pub fn num_fracture_edges(&self) -> usize {
        self.edge_class.iter().filter(|c| c.fracture().is_some()).count()
    }

    /// Total length of edges tagged with fracture `l`.
    pub fn tagged_length(&self, l: usize) -> f64 {
        (0..self.num_edges())
            .filter(|&e| self.edge_class[e].fracture() == Some(l))
            .map(|e| self.edge_length(e))
            .sum()
    }

    /// Whether every fracture is exactly tiled by edges tagged with it.
    pub fn is_fracture_conforming(&self) -> bool {
        !self.fractures.is_empty()
            && self
                .fractures
                .iter()
                .enumerate()
                .all(|(l, s)| (self.tagged_length(l) - s.length()).abs() <= 1e-12 * s.length().max(1.0))
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        (0..self.num_triangles())
            .map(|t| triangle_min_angle(&self.triangle_geom(t)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Vertices lying on the boundary (endpoints of boundary edges).
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.num_vertices()];
        for (e, c) in self.edge_class.iter().enumerate() {
            if *c == EdgeClass::Boundary {
                on[self.edges[e][0] as usize] = true;
                on[self.edges[e][1] as usize] = true;
            }
        }
        on
    }

    /// Index of a triangle containing `p`, if any.
    pub fn locate(&self, p: Point2) -> Option<usize> {
        (0..self.num_triangles()).find(|&t| self.triangle_geom(t).contains(p))
    }

    #[cfg(test)]
    pub(crate) fn raw_parts_mut(&mut self) -> (&mut Vec<Point2>, &mut Vec<[u32; 3]>) {
        (&mut self.vertices, &mut self.triangles)
    }
}

fn checked_triangles(vertices: &[Point2], triangles: &[[usize; 3]]) -> Result<Vec<[u32; 3]>> {
    if let Some(v) = vertices.iter().position(|p| !p.is_finite()) {
        return Err(Error::invalid_argument(format!("vertex {v} is not finite")));
    }
    let nv = vertices.len();
    if nv >= NONE as usize {
        return Err(Error::invalid_argument("too many vertices"));
    }
    let mut tris = Vec::with_capacity(triangles.len());
    for (t, tri) in triangles.iter().enumerate() {
        if tri.iter().any(|&v| v >= nv) {
            return Err(Error::invalid_argument(format!(
                "triangle {t} references a missing vertex"
            )));
        }
        let mut tri = [tri[0] as u32, tri[1] as u32, tri[2] as u32];
        let geom = Triangle2::new(
            vertices[tri[0] as usize],
            vertices[tri[1] as usize],
            vertices[tri[2] as usize],
        );
        let a = signed_area(&geom);
        if a.abs() <= GEOM_EPS * GEOM_EPS {
            return Err(Error::invalid_argument(format!("triangle {t} is degenerate")));
        }
        if a < 0.0 {
            tri.swap(1, 2);
        }
        tris.push(tri);
    }
    Ok(tris)
}

pub(crate) fn triangle_min_angle(t: &Triangle2) -> f64 {
    let v = t.vertices();
    (0..3)
        .map(|i| {
            let (a, b, c) = (v[i], v[(i + 1) % 3], v[(i + 2) % 3]);
            let (u, w) = (b - a, c - a);
            u.cross(w).abs().atan2(u.dot(w))
        })
        .fold(f64::INFINITY, f64::min)
}
