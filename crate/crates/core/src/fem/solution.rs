use std::sync::Arc;

use crate::fem::basis::{self, MAX_LOCAL};
use crate::fem::FeSpace;
use crate::geometry::Point2;
use crate::quadrature::triangle_rule;
use crate::{par, Error, Result};

/// Finite element function: coefficients with respect to the nodal basis of
/// a space.
#[derive(Debug, Clone)]
pub struct Solution {
    space: Arc<FeSpace>,
    coeffs: Vec<f64>,
}

/// Gradient of a P1/P2 function on one triangle. It is linear in the
/// barycentric coordinates, so its vertex values determine it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGradient {
    pub at_vertices: [Point2; 3],
}

impl ElementGradient {
    pub fn eval(&self, l: [f64; 3]) -> Point2 {
        let g = self.at_vertices;
        g[0] * l[0] + g[1] * l[1] + g[2] * l[2]
    }
}

impl Solution {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dof_count() {
            return Err(Error::invalid_argument(format!(
                "{} coefficients for a space with {} DOFs",
                coeffs.len(),
                space.dof_count()
            )));
        }
        Ok(Solution { space, coeffs })
    }

    pub fn zero(space: Arc<FeSpace>) -> Self {
        let n = space.dof_count();
        Solution {
            space,
            coeffs: vec![0.0; n],
        }
    }

    /// Nodal interpolant of `f` (boundary values are kept as given).
    pub fn interpolate(space: Arc<FeSpace>, f: impl Fn(Point2) -> f64 + Sync) -> Self {
        let coeffs = par::map_range(space.dof_count(), |d| f(space.node_point(d)));
        Solution { space, coeffs }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Values at the mesh vertices.
    pub fn vertex_values(&self) -> &[f64] {
        &self.coeffs[..self.space.mesh().num_vertices()]
    }

    fn local(&self, t: usize) -> [f64; MAX_LOCAL] {
        let dofs = self.space.element_dofs(t);
        let mut c = [0.0; MAX_LOCAL];
        for i in 0..self.space.local_count() {
            c[i] = self.coeffs[dofs[i]];
        }
        c
    }

    /// Value on triangle `t` at barycentric coordinates `l`.
    pub fn value_at(&self, t: usize, l: [f64; 3]) -> f64 {
        let c = self.local(t);
        let phi = basis::values(self.space.degree(), l);
        (0..self.space.local_count()).map(|i| c[i] * phi[i]).sum()
    }

    pub fn evaluate(&self, p: Point2) -> Result<f64> {
        let mesh = self.space.mesh();
        let t = mesh
            .locate(p)
            .ok_or_else(|| Error::invalid_argument(format!("point ({}, {}) is outside the mesh", p.x, p.y)))?;
        Ok(self.value_at(t, mesh.triangle_geom(t).barycentric(p)))
    }

    pub fn gradient_on(&self, t: usize) -> ElementGradient {
        let k = self.space.degree();
        let g = self.space.element_geom(t);
        let c = self.local(t);
        let n = self.space.local_count();
        let at_vertices = std::array::from_fn(|v| {
            let grads = basis::gradients(k, &g, basis::node_barycentric(v));
            (0..n).fold(Point2::new(0.0, 0.0), |acc, i| acc + grads[i] * c[i])
        });
        ElementGradient { at_vertices }
    }

    /// `Δu_h` on triangle `t` (zero for P1).
    pub fn laplacian_on(&self, t: usize) -> f64 {
        let lap = basis::laplacians(self.space.degree(), &self.space.element_geom(t));
        let c = self.local(t);
        (0..self.space.local_count()).map(|i| c[i] * lap[i]).sum()
    }
}

/// Represent `coarse` exactly on the nested space `fine`, whose mesh must
/// have been refined directly from the coarse mesh.
pub fn prolongate(coarse: &Solution, fine: &Arc<FeSpace>) -> Result<Solution> {
    let cmesh = coarse.space.mesh();
    let fmesh = fine.mesh();
    let link = fmesh
        .parent()
        .filter(|p| p.mesh_id == cmesh.id())
        .ok_or_else(|| Error::invalid_argument("fine mesh was not refined from the coarse mesh"))?;
    if fine.degree() != coarse.space.degree() {
        return Err(Error::invalid_argument(
            "prolongation between spaces of different degree",
        ));
    }
    let nloc = fine.local_count();
    let local = par::map_range(fmesh.num_triangles(), |t| {
        let c = link.coarse_triangle[t] as usize;
        let ctri = cmesh.triangle_geom(c);
        let ftri = fmesh.triangle_geom(t);
        let mut v = [0.0; MAX_LOCAL];
        for (i, vi) in v.iter_mut().enumerate().take(nloc) {
            let p = ftri.from_barycentric(basis::node_barycentric(i));
            *vi = coarse.value_at(c, ctri.barycentric(p));
        }
        v
    });
    let mut coeffs = vec![0.0; fine.dof_count()];
    for (t, v) in local.iter().enumerate() {
        let dofs = fine.element_dofs(t);
        for i in 0..nloc {
            coeffs[dofs[i]] = v[i];
        }
    }
    Ok(Solution {
        space: fine.clone(),
        coeffs,
    })
}

fn same_space(a: &FeSpace, b: &FeSpace) -> bool {
    a.mesh().id() == b.mesh().id() && a.degree() == b.degree()
}

/// `|a − b|_{H¹}`, integrated exactly element by element.
pub fn h1_seminorm_diff(a: &Solution, b: &Solution) -> Result<f64> {
    if !same_space(&a.space, &b.space) {
        return Err(Error::invalid_argument("solutions live on different spaces"));
    }
    let diff: Vec<f64> = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect();
    Ok(h1_seminorm(&Solution {
        space: a.space.clone(),
        coeffs: diff,
    }))
}

pub fn h1_seminorm(u: &Solution) -> f64 {
    let k = u.space.degree();
    let rule = triangle_rule((2 * (k - 1)).max(1));
    let local = par::map_range(u.space.mesh().num_triangles(), |t| {
        let grad = u.gradient_on(t);
        let area = u.space.element_geom(t).area;
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(l, w)| {
                let g = grad.eval(*l);
                2.0 * area * w * g.dot(g)
            })
            .sum::<f64>()
    });
    local.iter().sum::<f64>().sqrt()
}

/// `|u − u_h|_{H¹}` against an exact gradient, with a triangle rule of degree
/// `quad_degree`.
pub fn h1_error(u: &Solution, exact_grad: impl Fn(Point2) -> Point2 + Sync, quad_degree: usize) -> f64 {
    let rule = triangle_rule(quad_degree);
    let mesh = u.space.mesh();
    let local = par::map_range(mesh.num_triangles(), |t| {
        let grad = u.gradient_on(t);
        let tri = mesh.triangle_geom(t);
        let area = tri.area();
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(l, w)| {
                let d = exact_grad(tri.from_barycentric(*l)) - grad.eval(*l);
                2.0 * area * w * d.dot(d)
            })
            .sum::<f64>()
    });
    local.iter().sum::<f64>().sqrt()
}

/// `log₂(e_prev / e_curr)`.
pub fn convergence_rate(e_prev: f64, e_curr: f64) -> Result<f64> {
    if !(e_prev > 0.0 && e_curr > 0.0) {
        return Err(Error::invalid_argument(format!(
            "convergence rate needs positive errors, got {e_prev} and {e_curr}"
        )));
    }
    Ok((e_prev / e_curr).log2())
}
