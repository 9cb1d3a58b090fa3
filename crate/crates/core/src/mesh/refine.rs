use std::collections::HashMap;

use crate::geometry::Point2;
use crate::mesh::{Mesh, ParentLink, NONE};

/// Split every triangle into four similar children through its edge
/// midpoints. The midpoint of edge `e` becomes vertex `num_vertices + e`.
pub fn red_refine(mesh: &Mesh) -> Mesh {
    let nv = mesh.num_vertices() as u32;
    let mut vertices = mesh.vertices().to_vec();
    vertices.extend((0..mesh.num_edges()).map(|e| {
        let [a, b] = mesh.edge(e);
        mesh.vertex(a).midpoint(mesh.vertex(b))
    }));
    let nt = mesh.num_triangles();
    let mut triangles = Vec::with_capacity(4 * nt);
    let mut generation = Vec::with_capacity(4 * nt);
    let mut coarse = Vec::with_capacity(4 * nt);
    for t in 0..nt {
        let [v0, v1, v2] = mesh.triangles()[t];
        let [e0, e1, e2] = mesh.triangle_edges(t);
        let (m0, m1, m2) = (nv + e0 as u32, nv + e1 as u32, nv + e2 as u32);
        triangles.extend([[v0, m2, m1], [m2, v1, m0], [m1, m0, v2], [m0, m1, m2]]);
        generation.extend([mesh.generation(t) + 1; 4]);
        coarse.extend([t as u32; 4]);
    }
    let mut tags = HashMap::new();
    for e in 0..mesh.num_edges() {
        if let Some(l) = mesh.edge_class(e).fracture() {
            let [a, b] = mesh.edges()[e];
            let m = nv + e as u32;
            tags.insert(key(a, m), l as u32);
            tags.insert(key(m, b), l as u32);
        }
    }
    let parent = ParentLink {
        mesh_id: mesh.id(),
        coarse_triangle: coarse,
    };
    Mesh::assemble(
        vertices,
        triangles,
        generation,
        mesh.fractures().to_vec(),
        Some(parent),
        |a, b| tags.get(&(a, b)).copied(),
    )
    .expect("red refinement of a conforming mesh is conforming")
}

/// Longest-edge bisection of the marked triangles, followed by the
/// conformity closure: any triangle with a split edge is bisected through
/// its own longest edge until no hanging nodes remain. Longest-edge ties
/// (relative 1e-12) go to the smallest edge index.
///
/// Panics if a marked index is out of range.
pub fn bisect(mesh: &Mesh, marked: &[usize]) -> Mesh {
    let mut w = Work::new(mesh);
    let mut stack = Vec::new();
    for &t in marked {
        assert!(t < mesh.num_triangles(), "marked triangle {t} out of range");
        let e = w.longest_edge(t);
        if w.split[e as usize].is_none() {
            w.split_edge(e);
            stack.extend(w.edge_tris[e as usize].iter().filter(|&&s| s != NONE));
        }
    }
    while let Some(t) = stack.pop() {
        if w.has_split_edge(t) {
            let t2 = w.bisect_triangle(t, &mut stack);
            stack.push(t);
            stack.push(t2);
        }
    }
    w.finish(mesh)
}

fn key(a: u32, b: u32) -> (u32, u32) {
    (a.min(b), a.max(b))
}

struct Work {
    verts: Vec<Point2>,
    tris: Vec<[u32; 3]>,
    tri_edges: Vec<[u32; 3]>,
    gen: Vec<u32>,
    root: Vec<u32>,
    edges: Vec<[u32; 2]>,
    edge_tris: Vec<[u32; 2]>,
    len2: Vec<f64>,
    /// Midpoint vertex and the two halves (the first contains `edges[e][0]`).
    split: Vec<Option<(u32, [u32; 2])>>,
    frac: Vec<u32>,
}

impl Work {
    fn new(mesh: &Mesh) -> Self {
        let ne = mesh.num_edges();
        let verts = mesh.vertices().to_vec();
        let edges = mesh.edges().to_vec();
        let len2 = edges
            .iter()
            .map(|&[a, b]| {
                let d = verts[a as usize] - verts[b as usize];
                d.dot(d)
            })
            .collect();
        Work {
            tris: mesh.triangles().to_vec(),
            tri_edges: (0..mesh.num_triangles())
                .map(|t| mesh.triangle_edges(t).map(|e| e as u32))
                .collect(),
            gen: mesh.generations().to_vec(),
            root: (0..mesh.num_triangles() as u32).collect(),
            edge_tris: (0..ne)
                .map(|e| {
                    let (a, b) = mesh.edge_triangles(e);
                    [a as u32, b.map_or(NONE, |b| b as u32)]
                })
                .collect(),
            split: vec![None; ne],
            frac: mesh
                .edge_classes()
                .iter()
                .map(|c| c.fracture().map_or(NONE, |l| l as u32))
                .collect(),
            verts,
            edges,
            len2,
        }
    }

    fn longest_local(&self, t: u32) -> usize {
        let te = self.tri_edges[t as usize];
        let mut best = 0;
        for i in 1..3 {
            let (a, b) = (self.len2[te[i] as usize], self.len2[te[best] as usize]);
            let tie = (a - b).abs() <= 1e-12 * a.max(b);
            if (tie && te[i] < te[best]) || (!tie && a > b) {
                best = i;
            }
        }
        best
    }

    fn longest_edge(&self, t: usize) -> u32 {
        self.tri_edges[t][self.longest_local(t as u32)]
    }

    fn has_split_edge(&self, t: u32) -> bool {
        self.tri_edges[t as usize]
            .iter()
            .any(|&e| self.split[e as usize].is_some())
    }

    fn push_edge(&mut self, a: u32, b: u32, frac: u32) -> u32 {
        let d = self.verts[a as usize] - self.verts[b as usize];
        self.edges.push([a, b]);
        self.edge_tris.push([NONE; 2]);
        self.len2.push(d.dot(d));
        self.split.push(None);
        self.frac.push(frac);
        (self.edges.len() - 1) as u32
    }

    fn split_edge(&mut self, e: u32) -> (u32, [u32; 2]) {
        if let Some(s) = self.split[e as usize] {
            return s;
        }
        let [a, b] = self.edges[e as usize];
        let m = self.verts.len() as u32;
        self.verts.push(self.verts[a as usize].midpoint(self.verts[b as usize]));
        let f = self.frac[e as usize];
        let c0 = self.push_edge(a, m, f);
        let c1 = self.push_edge(m, b, f);
        self.split[e as usize] = Some((m, [c0, c1]));
        (m, [c0, c1])
    }

    fn attach(&mut self, e: u32, old: u32, new: u32) {
        let slots = &mut self.edge_tris[e as usize];
        if let Some(s) = slots.iter_mut().find(|s| **s == old) {
            *s = new;
        }
    }

    /// Bisect `t` through its longest edge; `t` keeps the first child and the
    /// second is returned.
    fn bisect_triangle(&mut self, t: u32, stack: &mut Vec<u32>) -> u32 {
        let i = self.longest_local(t);
        let te = self.tri_edges[t as usize];
        let e = te[i];
        if self.split[e as usize].is_none() {
            self.split_edge(e);
            stack.extend(self.edge_tris[e as usize].iter().filter(|&&s| s != NONE && s != t));
        }
        let (m, [c0, c1]) = self.split[e as usize].unwrap();
        let tri = self.tris[t as usize];
        let (vi, vj, vk) = (tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]);
        let (cj, ck) = if self.edges[c0 as usize].contains(&vj) {
            (c0, c1)
        } else {
            (c1, c0)
        };
        let (ej, ek) = (te[(i + 1) % 3], te[(i + 2) % 3]);
        let n = self.push_edge(vi, m, NONE);
        let t2 = self.tris.len() as u32;

        self.tris[t as usize] = [vi, vj, m];
        self.tri_edges[t as usize] = [cj, n, ek];
        self.tris.push([vi, m, vk]);
        self.tri_edges.push([ck, ej, n]);
        self.gen[t as usize] += 1;
        self.gen.push(self.gen[t as usize]);
        self.root.push(self.root[t as usize]);

        self.attach(ej, t, t2);
        self.attach(cj, NONE, t);
        self.attach(ck, NONE, t2);
        self.edge_tris[n as usize] = [t, t2];
        t2
    }

    fn finish(self, mesh: &Mesh) -> Mesh {
        let tags: HashMap<(u32, u32), u32> = (0..self.edges.len())
            .filter(|&e| self.split[e].is_none() && self.frac[e] != NONE)
            .map(|e| (key(self.edges[e][0], self.edges[e][1]), self.frac[e]))
            .collect();
        let parent = ParentLink {
            mesh_id: mesh.id(),
            coarse_triangle: self.root,
        };
        Mesh::assemble(
            self.verts,
            self.tris,
            self.gen,
            mesh.fractures().to_vec(),
            Some(parent),
            |a, b| tags.get(&(a, b)).copied(),
        )
        .expect("bisection closure yields a conforming mesh")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Coefficient;
    use crate::geometry::Segment;
    use crate::mesh::{build_fracture_conforming, build_unit_square_unionjack, validate, DomainSpec, FractureSet};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square_pair() -> Mesh {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        Mesh::from_triangles(v, vec![[0, 1, 2], [0, 2, 3]], vec![]).unwrap()
    }

    fn conforming(n: usize) -> Mesh {
        let s = Segment::new(Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)).unwrap();
        let f = FractureSet::new(vec![s], vec![Coefficient::Constant(1.0)]).unwrap();
        build_fracture_conforming(&DomainSpec::unit_square(), &f, n).unwrap()
    }

    #[test]
    fn red_refine_counts_and_areas() {
        let m = build_unit_square_unionjack(2).unwrap();
        let f = red_refine(&m);
        assert_eq!(f.num_triangles(), 64);
        assert_eq!(f.num_vertices(), m.num_vertices() + m.num_edges());
        let link = f.parent().unwrap();
        assert_eq!(link.mesh_id, m.id());
        for t in 0..f.num_triangles() {
            let c = link.coarse_triangle[t] as usize;
            assert!((f.area(t) - m.area(c) / 4.0).abs() < 1e-15);
            assert!(m.triangle_geom(c).contains(f.triangle_geom(t).centroid()));
        }
        assert!(validate(&f).is_ok());
    }

    #[test]
    fn red_refine_halves_fracture_edges() {
        let m = conforming(4);
        let f = red_refine(&m);
        assert_eq!(f.num_fracture_edges(), 4);
        for e in 0..f.num_edges() {
            if f.edge_class(e).fracture().is_some() {
                assert!((f.edge_length(e) - 0.125).abs() < 1e-15);
            }
        }
        assert!(f.is_fracture_conforming());
    }

    #[test]
    fn bisect_shared_longest_edge_splits_both() {
        let m = square_pair();
        let f = bisect(&m, &[0]);
        assert_eq!(f.num_triangles(), 4);
        assert!(validate(&f).is_ok());
    }

    #[test]
    fn bisect_nothing_keeps_mesh() {
        let m = conforming(4);
        let f = bisect(&m, &[]);
        assert_eq!(f.vertices(), m.vertices());
        assert_eq!(f.triangles(), m.triangles());
        assert_eq!(f.edge_classes(), m.edge_classes());
    }

    #[test]
    fn repeated_full_bisection_keeps_angles() {
        let mut m = square_pair();
        let alpha0 = m.min_angle();
        for _ in 0..8 {
            let all: Vec<_> = (0..m.num_triangles()).collect();
            m = bisect(&m, &all);
            assert!(m.min_angle() >= alpha0 / 2.0 - 1e-12);
            assert!(validate(&m).is_ok());
        }
        assert_eq!(m.num_triangles(), 2 << 8);
    }

    #[test]
    fn bisect_is_deterministic() {
        let m = conforming(4);
        let a = bisect(&m, &[3, 7, 11]);
        let b = bisect(&m, &[3, 7, 11]);
        assert_eq!(a.vertices(), b.vertices());
        assert_eq!(a.triangles(), b.triangles());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn random_bisection_rounds_stay_valid(seed in any::<u64>(), unionjack in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut m = if unionjack { build_unit_square_unionjack(2).unwrap() } else { conforming(4) };
            let alpha0 = m.min_angle();
            for _ in 0..10 {
                let marked: Vec<usize> = (0..m.num_triangles()).filter(|_| rng.gen_bool(0.2)).collect();
                let fine = bisect(&m, &marked);
                for (a, b) in m.vertices().iter().zip(fine.vertices()) {
                    prop_assert_eq!(a, b);
                }
                m = fine;
            }
            let report = validate(&m);
            prop_assert!(report.is_ok(), "{:?}", report.violations);
            prop_assert!(m.min_angle() >= alpha0 / 2.0 - 1e-12);
            if !unionjack {
                prop_assert!((m.tagged_length(0) - 0.5).abs() < 1e-12);
            }
        }
    }
}
