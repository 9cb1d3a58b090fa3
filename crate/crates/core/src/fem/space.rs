use std::sync::Arc;

use crate::fem::basis::{self, ElementGeom, MAX_LOCAL};
use crate::geometry::Point2;
use crate::mesh::{EdgeClass, Mesh, NONE};
use crate::{Error, Result};

/// Continuous P1 or P2 Lagrange space with homogeneous Dirichlet conditions.
///
/// Vertex `v` carries DOF `v`; for P2 the midpoint of edge `e` carries DOF
/// `num_vertices + e`.
#[derive(Debug)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    degree: usize,
    ndofs: usize,
    dirichlet: Vec<bool>,
    free_index: Vec<u32>,
    free_dofs: Vec<u32>,
}

pub fn build_space(mesh: Arc<Mesh>, degree: usize) -> Result<Arc<FeSpace>> {
    FeSpace::new(mesh, degree)
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Arc<FeSpace>> {
        if !(1..=2).contains(&degree) {
            return Err(Error::invalid_argument(format!(
                "unsupported polynomial degree {degree}"
            )));
        }
        let nv = mesh.num_vertices();
        let ndofs = if degree == 1 { nv } else { nv + mesh.num_edges() };
        let mut dirichlet = vec![false; ndofs];
        for e in 0..mesh.num_edges() {
            if mesh.edge_class(e) == EdgeClass::Boundary {
                let [a, b] = mesh.edge(e);
                dirichlet[a] = true;
                dirichlet[b] = true;
                if degree == 2 {
                    dirichlet[nv + e] = true;
                }
            }
        }
        let mut free_index = vec![NONE; ndofs];
        let mut free_dofs = Vec::new();
        for (d, &fixed) in dirichlet.iter().enumerate() {
            if !fixed {
                free_index[d] = free_dofs.len() as u32;
                free_dofs.push(d as u32);
            }
        }
        Ok(Arc::new(FeSpace {
            mesh,
            degree,
            ndofs,
            dirichlet,
            free_index,
            free_dofs,
        }))
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dof_count(&self) -> usize {
        self.ndofs
    }

    pub fn num_free(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn dirichlet_mask(&self) -> &[bool] {
        &self.dirichlet
    }

    pub fn free_dofs(&self) -> &[u32] {
        &self.free_dofs
    }

    /// Position of `dof` among the free DOFs.
    pub fn free_index(&self, dof: usize) -> Option<usize> {
        let i = self.free_index[dof];
        (i != NONE).then_some(i as usize)
    }

    pub fn local_count(&self) -> usize {
        basis::local_count(self.degree)
    }

    /// Global DOFs of triangle `t` in local node order; only the first
    /// [`Self::local_count`] entries are meaningful.
    pub fn element_dofs(&self, t: usize) -> [usize; MAX_LOCAL] {
        let [a, b, c] = self.mesh.triangle(t);
        if self.degree == 1 {
            [a, b, c, 0, 0, 0]
        } else {
            let nv = self.mesh.num_vertices();
            let [e0, e1, e2] = self.mesh.triangle_edges(t);
            [a, b, c, nv + e0, nv + e1, nv + e2]
        }
    }

    pub fn element_geom(&self, t: usize) -> ElementGeom {
        ElementGeom::new(&self.mesh.triangle_geom(t))
    }

    /// Location of the node carrying `dof`.
    pub fn node_point(&self, dof: usize) -> Point2 {
        let nv = self.mesh.num_vertices();
        if dof < nv {
            self.mesh.vertex(dof)
        } else {
            let [a, b] = self.mesh.edge(dof - nv);
            self.mesh.vertex(a).midpoint(self.mesh.vertex(b))
        }
    }

    /// DOFs on edge `e`: its endpoints and, for P2, its midpoint.
    pub fn edge_dofs(&self, e: usize) -> ([usize; 3], usize) {
        let [a, b] = self.mesh.edge(e);
        if self.degree == 1 {
            ([a, b, 0], 2)
        } else {
            ([a, b, self.mesh.num_vertices() + e], 3)
        }
    }

    /// Full-length vector from values at the free DOFs (zero elsewhere).
    pub fn extend(&self, free: &[f64]) -> Vec<f64> {
        assert_eq!(free.len(), self.num_free());
        let mut full = vec![0.0; self.ndofs];
        for (&d, &v) in self.free_dofs.iter().zip(free) {
            full[d as usize] = v;
        }
        full
    }

    /// Entries of a full-length vector at the free DOFs.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        assert_eq!(full.len(), self.ndofs);
        self.free_dofs.iter().map(|&d| full[d as usize]).collect()
    }

    /// DOF → incident triangles, in ascending triangle order.
    pub(crate) fn dof_elements(&self) -> (Vec<usize>, Vec<u32>) {
        let nloc = self.local_count();
        let mut count = vec![0usize; self.ndofs + 1];
        for t in 0..self.mesh.num_triangles() {
            for &d in &self.element_dofs(t)[..nloc] {
                count[d + 1] += 1;
            }
        }
        for i in 0..self.ndofs {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut elems = vec![0u32; count[self.ndofs]];
        for t in 0..self.mesh.num_triangles() {
            for &d in &self.element_dofs(t)[..nloc] {
                elems[fill[d]] = t as u32;
                fill[d] += 1;
            }
        }
        (count, elems)
    }
}
