//! Lagrange shape functions on a triangle in barycentric form.
//!
//! Local node order: the three vertices, then for P2 the midpoints of the
//! edges opposite vertex 0, 1, 2.

use crate::geometry::{Point2, Triangle2};

pub const MAX_LOCAL: usize = 6;

pub fn local_count(degree: usize) -> usize {
    if degree == 1 {
        3
    } else {
        6
    }
}

/// Area and barycentric gradients of a triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeom {
    pub area: f64,
    pub grad_lambda: [Point2; 3],
}

impl ElementGeom {
    pub fn new(tri: &Triangle2) -> Self {
        let v = tri.vertices();
        let det = (v[1] - v[0]).cross(v[2] - v[0]);
        let grad_lambda = std::array::from_fn(|i| {
            let (a, b) = (v[(i + 1) % 3], v[(i + 2) % 3]);
            Point2::new(a.y - b.y, b.x - a.x) * (1.0 / det)
        });
        ElementGeom {
            area: 0.5 * det,
            grad_lambda,
        }
    }
}

pub fn values(degree: usize, l: [f64; 3]) -> [f64; MAX_LOCAL] {
    if degree == 1 {
        [l[0], l[1], l[2], 0.0, 0.0, 0.0]
    } else {
        [
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
            4.0 * l[0] * l[1],
        ]
    }
}

pub fn gradients(degree: usize, g: &ElementGeom, l: [f64; 3]) -> [Point2; MAX_LOCAL] {
    let gl = g.grad_lambda;
    let zero = Point2::new(0.0, 0.0);
    if degree == 1 {
        [gl[0], gl[1], gl[2], zero, zero, zero]
    } else {
        [
            gl[0] * (4.0 * l[0] - 1.0),
            gl[1] * (4.0 * l[1] - 1.0),
            gl[2] * (4.0 * l[2] - 1.0),
            (gl[2] * l[1] + gl[1] * l[2]) * 4.0,
            (gl[0] * l[2] + gl[2] * l[0]) * 4.0,
            (gl[1] * l[0] + gl[0] * l[1]) * 4.0,
        ]
    }
}

/// Laplacians of the shape functions (constant on the element).
pub fn laplacians(degree: usize, g: &ElementGeom) -> [f64; MAX_LOCAL] {
    if degree == 1 {
        return [0.0; MAX_LOCAL];
    }
    let gl = g.grad_lambda;
    [
        4.0 * gl[0].dot(gl[0]),
        4.0 * gl[1].dot(gl[1]),
        4.0 * gl[2].dot(gl[2]),
        8.0 * gl[1].dot(gl[2]),
        8.0 * gl[2].dot(gl[0]),
        8.0 * gl[0].dot(gl[1]),
    ]
}

/// Barycentric coordinates of the local nodes.
pub fn node_barycentric(i: usize) -> [f64; 3] {
    match i {
        0 => [1.0, 0.0, 0.0],
        1 => [0.0, 1.0, 0.0],
        2 => [0.0, 0.0, 1.0],
        3 => [0.0, 0.5, 0.5],
        4 => [0.5, 0.0, 0.5],
        _ => [0.5, 0.5, 0.0],
    }
}
