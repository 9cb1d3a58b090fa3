use crate::fem::basis::{self, ElementGeom, MAX_LOCAL};
use crate::fem::{CsrMatrix, FeSpace, ScalarFn};
use crate::geometry::{clip_segment_to_triangle, Segment, Triangle2};
use crate::mesh::FractureSet;
use crate::quadrature::{graded_interval, interval_rule, triangle_rule, IntervalRule, SINGULAR_GRADING_LEVELS};
use crate::{par, Error, Result};

/// Gauss points per fracture edge (or clipped piece).
pub const LINE_SOURCE_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSourceMode {
    /// Integrate edge by edge over fracture-tagged edges.
    Conforming,
    /// Clip each fracture against every triangle.
    Clipped,
}

fn stiffness_rule_degree(degree: usize) -> usize {
    (2 * (degree - 1)).max(1)
}

/// Local stiffness matrix of a triangle using a triangle rule of the given
/// degree.
pub fn local_stiffness(degree: usize, tri: &Triangle2, quad_degree: usize) -> Vec<Vec<f64>> {
    let g = ElementGeom::new(tri);
    let n = basis::local_count(degree);
    (0..n)
        .map(|a| local_stiffness_row(degree, &g, a, quad_degree)[..n].to_vec())
        .collect()
}

fn local_stiffness_row(degree: usize, g: &ElementGeom, a: usize, quad_degree: usize) -> [f64; MAX_LOCAL] {
    let mut row = [0.0; MAX_LOCAL];
    let n = basis::local_count(degree);
    if degree == 1 {
        for (b, r) in row.iter_mut().enumerate().take(n) {
            *r = g.area * g.grad_lambda[a].dot(g.grad_lambda[b]);
        }
        return row;
    }
    let rule = triangle_rule(quad_degree);
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let grads = basis::gradients(degree, g, *l);
        let scale = 2.0 * g.area * w;
        for b in 0..n {
            row[b] += scale * grads[a].dot(grads[b]);
        }
    }
    row
}

/// Stiffness matrix over the free DOFs (Dirichlet rows and columns removed).
pub fn assemble_stiffness(space: &FeSpace) -> CsrMatrix {
    assemble(space, true)
}

/// Stiffness matrix over all DOFs, before boundary elimination.
pub fn assemble_stiffness_full(space: &FeSpace) -> CsrMatrix {
    assemble(space, false)
}

/// Row-wise assembly: each row gathers the contributions of its incident
/// elements in ascending element order, so the result does not depend on how
/// rows are distributed over workers.
fn assemble(space: &FeSpace, reduced: bool) -> CsrMatrix {
    const CHUNK: usize = 4096;
    let (ptr, elems) = space.dof_elements();
    let k = space.degree();
    let nloc = space.local_count();
    let qd = stiffness_rule_degree(k);
    let nrows = if reduced { space.num_free() } else { space.dof_count() };
    let row_dof = |r: usize| if reduced { space.free_dofs()[r] as usize } else { r };
    let col_of = |d: usize| if reduced { space.free_index(d) } else { Some(d) };

    let chunks = par::map_range(nrows.div_ceil(CHUNK), |c| {
        let mut lens = Vec::with_capacity(CHUNK);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut scratch: Vec<(u32, f64)> = Vec::new();
        for r in c * CHUNK..((c + 1) * CHUNK).min(nrows) {
            let d = row_dof(r);
            scratch.clear();
            for &t in &elems[ptr[d]..ptr[d + 1]] {
                let t = t as usize;
                let dofs = space.element_dofs(t);
                let a = dofs[..nloc].iter().position(|&x| x == d).unwrap();
                let row = local_stiffness_row(k, &space.element_geom(t), a, qd);
                for b in 0..nloc {
                    if let Some(col) = col_of(dofs[b]) {
                        scratch.push((col as u32, row[b]));
                    }
                }
            }
            scratch.sort_by_key(|p| p.0);
            let start = cols.len();
            for &(col, v) in &scratch {
                if cols.len() > start && *cols.last().unwrap() == col {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(col);
                    vals.push(v);
                }
            }
            lens.push(cols.len() - start);
        }
        (lens, cols, vals)
    });

    let nnz = chunks.iter().map(|c| c.1.len()).sum();
    let mut row_ptr = Vec::with_capacity(nrows + 1);
    let mut cols = Vec::with_capacity(nnz);
    let mut vals = Vec::with_capacity(nnz);
    row_ptr.push(0);
    for (lens, c, v) in chunks {
        for l in lens {
            row_ptr.push(row_ptr.last().unwrap() + l);
        }
        cols.extend(c);
        vals.extend(v);
    }
    CsrMatrix::from_parts(nrows, row_ptr, cols, vals)
}

/// Rule on `[0, 1]` for integrating `g` along `seg`, graded toward
/// endpoints where `g` is singular.
fn line_rule(g: &crate::fem::Coefficient, seg: &Segment) -> IntervalRule {
    let (s, e) = (g.is_singular_at(seg.a), g.is_singular_at(seg.b));
    if s || e {
        graded_interval(LINE_SOURCE_POINTS, SINGULAR_GRADING_LEVELS, s, e)
    } else {
        interval_rule(LINE_SOURCE_POINTS).clone()
    }
}

/// Load vector `b_i = Σ_l ∫_{γ_l} g_l φ_i ds` over all DOFs.
pub fn assemble_line_source(space: &FeSpace, fractures: &FractureSet, mode: LineSourceMode) -> Result<Vec<f64>> {
    let mut b = vec![0.0; space.dof_count()];
    if fractures.is_empty() {
        return Ok(b);
    }
    let mesh = space.mesh();
    match mode {
        LineSourceMode::Conforming => {
            check_conforming(space, fractures)?;
            for e in 0..mesh.num_edges() {
                let Some(l) = mesh.edge_class(e).fracture() else {
                    continue;
                };
                let g = &fractures.coefficients()[l];
                let seg = mesh.edge_segment(e);
                let rule = line_rule(g, &seg);
                let (dofs, n) = space.edge_dofs(e);
                let len = seg.length();
                let mut acc = [0.0; 3];
                for (&t, &w) in rule.points.iter().zip(&rule.weights) {
                    let gw = w * len * g.eval_on(&seg, t);
                    let phi = if n == 2 {
                        [1.0 - t, t, 0.0]
                    } else {
                        [(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)]
                    };
                    for i in 0..n {
                        acc[i] += gw * phi[i];
                    }
                }
                for i in 0..n {
                    b[dofs[i]] += acc[i];
                }
            }
        }
        LineSourceMode::Clipped => {
            let k = space.degree();
            let nloc = space.local_count();
            let boxes: Vec<_> = fractures.segments().iter().map(bbox).collect();
            let local = par::map_range(mesh.num_triangles(), |t| {
                let tri = mesh.triangle_geom(t);
                let tb = bbox_tri(&tri);
                let mut acc = [0.0; MAX_LOCAL];
                let mut hit = false;
                for (l, (seg, g)) in fractures.iter().enumerate() {
                    if !overlaps(&boxes[l], &tb) {
                        continue;
                    }
                    let Some(piece) = clip_segment_to_triangle(seg, &tri) else {
                        continue;
                    };
                    hit = true;
                    let factor = shared_edge_factor(space, t, &tri, &piece);
                    let rule = line_rule(g, &piece);
                    let len = piece.length();
                    for (&s, &w) in rule.points.iter().zip(&rule.weights) {
                        let p = piece.point_at(s);
                        let gw = factor * w * len * g.eval_on(&piece, s);
                        let phi = basis::values(k, tri.barycentric(p));
                        for i in 0..nloc {
                            acc[i] += gw * phi[i];
                        }
                    }
                }
                hit.then_some(acc)
            });
            for (t, acc) in local.iter().enumerate() {
                if let Some(acc) = acc {
                    let dofs = space.element_dofs(t);
                    for i in 0..nloc {
                        b[dofs[i]] += acc[i];
                    }
                }
            }
        }
    }
    Ok(b)
}

/// A piece lying on an edge shared by two triangles is found from both sides;
/// each side then carries half of it.
fn shared_edge_factor(space: &FeSpace, t: usize, tri: &Triangle2, piece: &Segment) -> f64 {
    let (la, lb) = (tri.barycentric(piece.a), tri.barycentric(piece.b));
    for i in 0..3 {
        if la[i].abs() <= 1e-12 && lb[i].abs() <= 1e-12 {
            let e = space.mesh().triangle_edges(t)[i];
            return if space.mesh().edge_triangles(e).1.is_some() {
                0.5
            } else {
                1.0
            };
        }
    }
    1.0
}

fn check_conforming(space: &FeSpace, fractures: &FractureSet) -> Result<()> {
    let mesh = space.mesh();
    for (l, seg) in fractures.segments().iter().enumerate() {
        let covered = mesh.tagged_length(l);
        if (covered - seg.length()).abs() > 1e-12 * seg.length().max(1.0) {
            return Err(Error::invalid_state(format!(
                "mesh does not resolve fracture {l}: tagged edges cover {covered} of {}",
                seg.length()
            )));
        }
    }
    Ok(())
}

type BBox = [f64; 4];

fn bbox(s: &Segment) -> BBox {
    [s.a.x.min(s.b.x), s.a.y.min(s.b.y), s.a.x.max(s.b.x), s.a.y.max(s.b.y)]
}

fn bbox_tri(t: &Triangle2) -> BBox {
    let v = t.vertices();
    [
        v[0].x.min(v[1].x).min(v[2].x),
        v[0].y.min(v[1].y).min(v[2].y),
        v[0].x.max(v[1].x).max(v[2].x),
        v[0].y.max(v[1].y).max(v[2].y),
    ]
}

fn overlaps(a: &BBox, b: &BBox) -> bool {
    let eps = 1e-12;
    a[0] <= b[2] + eps && b[0] <= a[2] + eps && a[1] <= b[3] + eps && b[1] <= a[3] + eps
}

/// Load vector `b_i = ∫_Ω q φ_i dx` over all DOFs (triangle rule of degree
/// k + 2).
pub fn assemble_area_source(space: &FeSpace, q: &ScalarFn) -> Vec<f64> {
    let mesh = space.mesh();
    let k = space.degree();
    let nloc = space.local_count();
    let rule = triangle_rule(k + 2);
    let local = par::map_range(mesh.num_triangles(), |t| {
        let tri = mesh.triangle_geom(t);
        let area = tri.area();
        let mut acc = [0.0; MAX_LOCAL];
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let qv = 2.0 * area * w * q.eval(tri.from_barycentric(*l));
            let phi = basis::values(k, *l);
            for i in 0..nloc {
                acc[i] += qv * phi[i];
            }
        }
        acc
    });
    let mut b = vec![0.0; space.dof_count()];
    for (t, acc) in local.iter().enumerate() {
        let dofs = space.element_dofs(t);
        for i in 0..nloc {
            b[dofs[i]] += acc[i];
        }
    }
    b
}
