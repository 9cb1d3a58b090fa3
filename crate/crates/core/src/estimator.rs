//! A posteriori error indicators.
//!
//! * `η`: residual indicator for the transmission form of the problem. On a
//!   mesh that resolves the fractures, the exact solution is smooth on each
//!   element and its normal-derivative jump across fracture edges equals
//!   `g_l`, so the jump residual is `f − [∂_n u_h]` with `f = g_l` on
//!   fracture edges and `f = 0` elsewhere.
//! * `ξ`: classical residual indicator for the Poisson problem with the
//!   fracture source replaced by a box-kernel regularization `g^r`.
//!
//! The jump `[∂_n v] = n⁺·∇v⁺ + n⁻·∇v⁻` sums the outward normal derivatives
//! of both neighbours, so it does not depend on an edge orientation.

use crate::fem::{resolves_fractures, Coefficient, ElementGradient, ProblemSpec, Solution};
use crate::geometry::{clip_segment_to_box, Point2, Segment};
use crate::mesh::{EdgeClass, Mesh};
use crate::quadrature::{graded_interval, interval_rule, triangle_rule, IntervalRule, SINGULAR_GRADING_LEVELS};
use crate::{par, Error, Result};

/// Box-kernel half-width used for `ξ` unless configured otherwise.
pub const DEFAULT_REG_RADIUS: f64 = 0.05;

/// Gauss points per piece for singular data and for `g^r`.
const SOURCE_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorKind {
    Eta,
    /// Regularized-source indicator with box half-width `r`.
    Xi {
        r: f64,
    },
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::Eta => "eta",
            EstimatorKind::Xi { .. } => "xi",
        }
    }
}

/// Per-element indicator values (not squared).
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    pub kind: EstimatorKind,
    pub values: Vec<f64>,
}

impl IndicatorField {
    /// `(Σ_T η_T²)^{1/2}`, summed in element order.
    pub fn total(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn squares(&self) -> Vec<f64> {
        self.values.iter().map(|v| v * v).collect()
    }
}

/// The edge data `f` of the `η` indicator: `g_l` on edges of fracture `l`,
/// zero on other interior edges.
#[derive(Debug, Clone, Copy)]
pub struct EdgeExtension<'a> {
    mesh: &'a Mesh,
    coefficients: &'a [Coefficient],
}

impl<'a> EdgeExtension<'a> {
    pub fn new(mesh: &'a Mesh, problem: &'a ProblemSpec) -> Self {
        EdgeExtension {
            mesh,
            coefficients: problem.fractures.coefficients(),
        }
    }

    /// Density on edge `e`, or `None` where `f` vanishes identically.
    pub fn density(&self, e: usize) -> Option<&'a Coefficient> {
        self.mesh.edge_class(e).fracture().map(|l| &self.coefficients[l])
    }

    pub fn eval(&self, e: usize, p: Point2) -> f64 {
        self.density(e).map_or(0.0, |g| g.eval(p))
    }
}

/// Rule on `[0, 1]` for integrating data built from `g` along `seg`.
fn rule_for(g: Option<&Coefficient>, seg: &Segment, npts: usize) -> IntervalRule {
    match g {
        Some(g) if g.is_singular_at(seg.a) || g.is_singular_at(seg.b) => graded_interval(
            SOURCE_POINTS,
            SINGULAR_GRADING_LEVELS,
            g.is_singular_at(seg.a),
            g.is_singular_at(seg.b),
        ),
        Some(g) if !matches!(g, Coefficient::Constant(_)) => interval_rule(SOURCE_POINTS).clone(),
        _ => interval_rule(npts).clone(),
    }
}

/// `∫_e (f − [∂_n u_h])² ds` for every edge (zero on boundary edges).
fn jump_terms(sol: &Solution, ext: Option<&EdgeExtension>) -> Vec<f64> {
    let space = sol.space();
    let mesh = space.mesh();
    let npts = space.degree() + 2;
    par::map_range(mesh.num_edges(), |e| {
        let (t0, Some(t1)) = mesh.edge_triangles(e) else {
            return 0.0;
        };
        let seg = mesh.edge_segment(e);
        let g = ext.and_then(|x| x.density(e));
        let rule = rule_for(g, &seg, npts);
        let sides = [side_data(sol, t0, e), side_data(sol, t1, e)];
        let len = seg.length();
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(&s, &w)| {
                let jump: f64 = sides
                    .iter()
                    .map(|(grad, normal, ia, ib)| {
                        let mut l = [0.0; 3];
                        l[*ia] = 1.0 - s;
                        l[*ib] = s;
                        grad.eval(l).dot(*normal)
                    })
                    .sum();
                let f = g.map_or(0.0, |g| g.eval_on(&seg, s));
                w * len * (f - jump) * (f - jump)
            })
            .sum()
    })
}

/// Gradient on `t`, its outward unit normal on edge `e`, and the local
/// indices of the edge's first and second endpoint.
fn side_data(sol: &Solution, t: usize, e: usize) -> (ElementGradient, Point2, usize, usize) {
    let mesh = sol.space().mesh();
    let tri = mesh.triangle(t);
    let i = mesh.triangle_edges(t).iter().position(|&x| x == e).unwrap();
    let (from, to) = (mesh.vertex(tri[(i + 1) % 3]), mesh.vertex(tri[(i + 2) % 3]));
    let d = to - from;
    let normal = Point2::new(d.y, -d.x) * (1.0 / d.norm());
    let [a, b] = mesh.edge(e);
    let ia = tri.iter().position(|&v| v == a).unwrap();
    let ib = tri.iter().position(|&v| v == b).unwrap();
    (sol.gradient_on(t), normal, ia, ib)
}

/// Combine element and edge terms:
/// `h_T² · elem_T + ½ Σ_{e ⊂ ∂T interior} h_T · edge_e`.
fn combine(mesh: &Mesh, elem: &[f64], edge: &[f64], kind: EstimatorKind) -> IndicatorField {
    let values = par::map_range(mesh.num_triangles(), |t| {
        let h = mesh.diameter(t);
        let edges: f64 = mesh
            .triangle_edges(t)
            .iter()
            .filter(|&&e| mesh.edge_class(e) != EdgeClass::Boundary)
            .map(|&e| edge[e])
            .sum();
        (h * h * elem[t] + 0.5 * h * edges).sqrt()
    });
    IndicatorField { kind, values }
}

/// `‖Δu_h + s‖²_T` per element, with `s` evaluated at the quadrature points
/// of a triangle rule of degree `2k + 2`.
fn element_terms(sol: &Solution, source: impl Fn(Point2) -> f64 + Sync) -> Vec<f64> {
    let space = sol.space();
    let mesh = space.mesh();
    let rule = triangle_rule(2 * space.degree() + 2);
    par::map_range(mesh.num_triangles(), |t| {
        let lap = sol.laplacian_on(t);
        let tri = mesh.triangle_geom(t);
        let area = tri.area();
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(l, w)| {
                let r = lap + source(tri.from_barycentric(*l));
                2.0 * area * w * r * r
            })
            .sum()
    })
}

/// `η_T` for every element. Requires a mesh whose edges resolve every
/// fracture of the problem.
pub fn eta_indicators(sol: &Solution, problem: &ProblemSpec) -> Result<IndicatorField> {
    let space = sol.space();
    let mesh = space.mesh();
    if !resolves_fractures(space, &problem.fractures) {
        return Err(Error::invalid_state(
            "eta needs a mesh whose edges resolve every fracture",
        ));
    }
    let ext = EdgeExtension::new(mesh, problem);
    let q = problem.area_source.as_ref();
    let elem = element_terms(sol, |p| q.map_or(0.0, |q| q.eval(p)));
    let edge = jump_terms(sol, Some(&ext));
    Ok(combine(mesh, &elem, &edge, EstimatorKind::Eta))
}

/// Box-kernel regularization of the fracture source:
/// `g^r(p) = (1/(4r²)) Σ_l ∫_{γ_l ∩ [p − r, p + r]²} g_l ds`.
pub fn regularized_source(p: Point2, problem: &ProblemSpec, r: f64) -> f64 {
    let mut total = 0.0;
    for (seg, g) in problem.fractures.iter() {
        let Some(piece) = clip_segment_to_box(seg, p, r) else {
            continue;
        };
        let rule = rule_for(Some(g), &piece, SOURCE_POINTS);
        let len = piece.length();
        total += rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(&s, &w)| w * len * g.eval_on(&piece, s))
            .sum::<f64>();
    }
    total / (4.0 * r * r)
}

/// `ξ_T` for every element, with box half-width `r`.
pub fn xi_indicators(sol: &Solution, problem: &ProblemSpec, r: f64) -> Result<IndicatorField> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid_argument(format!(
            "regularization radius {r} must be positive"
        )));
    }
    let mesh = sol.space().mesh();
    let q = problem.area_source.as_ref();
    let elem = element_terms(sol, |p| {
        regularized_source(p, problem, r) + q.map_or(0.0, |q| q.eval(p))
    });
    let edge = jump_terms(sol, None);
    Ok(combine(mesh, &elem, &edge, EstimatorKind::Xi { r }))
}

pub fn indicators(sol: &Solution, problem: &ProblemSpec, kind: EstimatorKind) -> Result<IndicatorField> {
    match kind {
        EstimatorKind::Eta => eta_indicators(sol, problem),
        EstimatorKind::Xi { r } => xi_indicators(sol, problem, r),
    }
}

/// `osc(e)² = h_e ‖f − Π_k f‖²_e` with `Π_k` the L² projection onto
/// polynomials of degree `k` on the edge. Returns `osc(e)`.
pub fn oscillation(mesh: &Mesh, e: usize, problem: &ProblemSpec, k: usize) -> Result<f64> {
    if mesh.edge_class(e) == EdgeClass::Boundary {
        return Err(Error::invalid_argument(format!("edge {e} is a boundary edge")));
    }
    let ext = EdgeExtension::new(mesh, problem);
    let Some(g) = ext.density(e) else { return Ok(0.0) };
    let seg = mesh.edge_segment(e);
    let rule = rule_for(Some(g), &seg, SOURCE_POINTS);
    let f: Vec<f64> = rule.points.iter().map(|&s| g.eval_on(&seg, s)).collect();
    // Shifted Legendre polynomials are orthogonal on [0, 1] with
    // ∫ P_m² = 1/(2m + 1).
    let coeffs: Vec<f64> = (0..=k)
        .map(|m| {
            let moment: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .zip(&f)
                .map(|((&s, &w), &fv)| w * fv * shifted_legendre(m, s))
                .sum();
            moment * (2 * m + 1) as f64
        })
        .collect();
    let err2: f64 = rule
        .points
        .iter()
        .zip(&rule.weights)
        .zip(&f)
        .map(|((&s, &w), &fv)| {
            let proj: f64 = coeffs.iter().enumerate().map(|(m, c)| c * shifted_legendre(m, s)).sum();
            w * (fv - proj) * (fv - proj)
        })
        .sum();
    let len = seg.length();
    Ok((len * len * err2).sqrt())
}

fn shifted_legendre(m: usize, s: f64) -> f64 {
    let x = 2.0 * s - 1.0;
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return p0;
    }
    for n in 1..m {
        let p2 = ((2 * n + 1) as f64 * x * p1 - n as f64 * p0) / (n + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}
