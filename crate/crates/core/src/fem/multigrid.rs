//! Geometric multigrid over a hierarchy of nested spaces, used as a
//! preconditioner for conjugate gradients on large uniform refinements.
//!
//! Coarse operators are the stiffness matrices of the coarse spaces; for
//! nested conforming spaces these coincide with the Galerkin products
//! `Pᵀ A P`.

use std::sync::Arc;

use crate::fem::basis;
use crate::fem::sparse::{dot, norm2};
use crate::fem::{assemble_stiffness, Cholesky, CsrMatrix, FeSpace, SolveStats};
use crate::mesh::NONE;
use crate::{par, Error, Result};

/// Rectangular sparse matrix (fine free DOFs × coarse free DOFs).
#[derive(Debug)]
struct Prolongation {
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Prolongation {
    fn build(coarse: &FeSpace, fine: &FeSpace) -> Result<Self> {
        let link = fine
            .mesh()
            .parent()
            .filter(|p| p.mesh_id == coarse.mesh().id())
            .ok_or_else(|| Error::invalid_argument("multigrid levels must be directly nested"))?;
        if coarse.degree() != fine.degree() {
            return Err(Error::invalid_argument(
                "multigrid levels must share the polynomial degree",
            ));
        }
        let nloc = fine.local_count();
        let k = fine.degree();
        // Any triangle containing a fine node determines its coarse values.
        let mut owner = vec![NONE; fine.dof_count()];
        for t in (0..fine.mesh().num_triangles()).rev() {
            let dofs = fine.element_dofs(t);
            for (i, &d) in dofs[..nloc].iter().enumerate() {
                owner[d] = (t * 8 + i) as u32;
            }
        }
        let cmesh = coarse.mesh();
        let fmesh = fine.mesh();
        let free = fine.free_dofs();
        const CHUNK: usize = 8192;
        let chunks = par::map_range(free.len().div_ceil(CHUNK), |c| {
            let mut lens = Vec::with_capacity(CHUNK);
            let (mut cols, mut vals) = (Vec::new(), Vec::new());
            for &d in &free[c * CHUNK..((c + 1) * CHUNK).min(free.len())] {
                let o = owner[d as usize] as usize;
                let (t, i) = (o / 8, o % 8);
                let ct = link.coarse_triangle[t] as usize;
                let p = fmesh.triangle_geom(t).from_barycentric(basis::node_barycentric(i));
                let phi = basis::values(k, cmesh.triangle_geom(ct).barycentric(p));
                let cdofs = coarse.element_dofs(ct);
                let mut row: Vec<(u32, f64)> = (0..nloc)
                    .filter(|&j| phi[j].abs() > 1e-12)
                    .filter_map(|j| coarse.free_index(cdofs[j]).map(|cj| (cj as u32, phi[j])))
                    .collect();
                row.sort_by_key(|e| e.0);
                lens.push(row.len());
                for (cj, v) in row {
                    cols.push(cj);
                    vals.push(v);
                }
            }
            (lens, cols, vals)
        });
        let mut row_ptr = vec![0];
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        for (lens, c, v) in chunks {
            for l in lens {
                row_ptr.push(row_ptr.last().unwrap() + l);
            }
            cols.extend(c);
            vals.extend(v);
        }
        Ok(Prolongation {
            ncols: coarse.num_free(),
            row_ptr,
            cols,
            vals,
        })
    }

    /// `y += P x`
    fn apply_add(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                *yi += self.vals[k] * x[self.cols[k] as usize];
            }
        }
    }

    /// `Pᵀ r`
    fn restrict(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (i, ri) in r.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.cols[k] as usize] += self.vals[k] * ri;
            }
        }
        out
    }
}

#[derive(Debug)]
struct Level {
    a: CsrMatrix,
    diag_pos: Vec<usize>,
    /// From the next coarser level; `None` on the coarsest.
    p: Option<Prolongation>,
}

/// Multigrid hierarchy built by pushing successively refined spaces.
#[derive(Debug)]
pub struct Multigrid {
    levels: Vec<Level>,
    coarse: Option<Cholesky>,
    last: Option<Arc<FeSpace>>,
    smoothing_steps: usize,
}

/// Iteration cap for multigrid-preconditioned CG.
const MG_MAX_ITERATIONS: usize = 200;

impl Multigrid {
    pub fn new() -> Self {
        Multigrid {
            levels: Vec::new(),
            coarse: None,
            last: None,
            smoothing_steps: 2,
        }
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// The finest level's stiffness matrix.
    pub fn matrix(&self) -> Option<&CsrMatrix> {
        self.levels.last().map(|l| &l.a)
    }

    /// Add `space` as the new finest level; it must be refined directly from
    /// the previously pushed space.
    pub fn push_level(&mut self, space: &Arc<FeSpace>) -> Result<()> {
        let a = assemble_stiffness(space);
        let p = match &self.last {
            None => {
                self.coarse = Some(Cholesky::new(&a)?);
                None
            }
            Some(prev) => Some(Prolongation::build(prev, space)?),
        };
        let diag_pos = (0..a.nrows())
            .map(|i| {
                let (c, _) = a.row(i);
                a.row_ptr()[i] + c.binary_search(&(i as u32)).expect("stiffness diagonal present")
            })
            .collect();
        self.levels.push(Level { a, diag_pos, p });
        self.last = Some(space.clone());
        Ok(())
    }

    fn gauss_seidel(level: &Level, b: &[f64], x: &mut [f64], forward: bool) {
        let a = &level.a;
        let (rp, cols, vals) = (a.row_ptr(), a.cols(), a.values());
        let n = a.nrows();
        let mut sweep = |i: usize| {
            let mut s = b[i];
            for k in rp[i]..rp[i + 1] {
                s -= vals[k] * x[cols[k] as usize];
            }
            let d = vals[level.diag_pos[i]];
            x[i] += s / d;
        };
        if forward {
            (0..n).for_each(&mut sweep);
        } else {
            (0..n).rev().for_each(&mut sweep);
        }
    }

    fn vcycle(&self, l: usize, b: &[f64]) -> Vec<f64> {
        if l == 0 {
            return self.coarse.as_ref().expect("coarsest level factorized").solve(b);
        }
        let level = &self.levels[l];
        let mut x = vec![0.0; b.len()];
        for _ in 0..self.smoothing_steps {
            Self::gauss_seidel(level, b, &mut x, true);
        }
        let ax = level.a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let p = level.p.as_ref().expect("fine levels carry a prolongation");
        let ec = self.vcycle(l - 1, &p.restrict(&r));
        p.apply_add(&ec, &mut x);
        for _ in 0..self.smoothing_steps {
            Self::gauss_seidel(level, b, &mut x, false);
        }
        x
    }

    /// Solve on the finest level with V-cycle-preconditioned CG. Iteration
    /// stops once the recursively updated residual falls below `rtol·‖b‖`;
    /// the reported residual is recomputed from the returned solution.
    pub fn solve(&self, b: &[f64], rtol: f64) -> Result<(Vec<f64>, SolveStats)> {
        let top = self
            .levels
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::invalid_state("multigrid hierarchy is empty"))?;
        let a = &self.levels[top].a;
        if b.len() != a.nrows() {
            return Err(Error::invalid_argument("rhs length does not match the finest level"));
        }
        let bnorm = norm2(b);
        let mut x = vec![0.0; b.len()];
        if bnorm == 0.0 {
            return Ok((
                x,
                SolveStats {
                    iterations: 0,
                    relative_residual: 0.0,
                },
            ));
        }
        let mut r = b.to_vec();
        let mut z = self.vcycle(top, &r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut iterations = 0;
        while norm2(&r) > rtol * bnorm {
            if iterations == MG_MAX_ITERATIONS {
                return Err(Error::SolverFailure {
                    iterations,
                    residual: norm2(&r) / bnorm,
                });
            }
            let ap = a.matvec(&p);
            let alpha = rz / dot(&p, &ap);
            for i in 0..x.len() {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            z = self.vcycle(top, &r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..p.len() {
                p[i] = z[i] + beta * p[i];
            }
            iterations += 1;
        }
        let ax = a.matvec(&x);
        let true_res = norm2(&b.iter().zip(&ax).map(|(b, a)| b - a).collect::<Vec<_>>()) / bnorm;
        Ok((
            x,
            SolveStats {
                iterations,
                relative_residual: true_res,
            },
        ))
    }
}

impl Default for Multigrid {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{build_space, solve_direct, Coefficient, LineSourceMode};
    use crate::geometry::{Point2, Segment};
    use crate::mesh::{build_unit_square_unionjack, red_refine, FractureSet};

    #[test]
    fn coarse_operator_is_galerkin_product() {
        let m0 = Arc::new(build_unit_square_unionjack(3).unwrap());
        let m1 = Arc::new(red_refine(&m0));
        for k in [1, 2] {
            let (s0, s1) = (build_space(m0.clone(), k).unwrap(), build_space(m1.clone(), k).unwrap());
            let p = Prolongation::build(&s0, &s1).unwrap();
            let (a0, a1) = (assemble_stiffness(&s0), assemble_stiffness(&s1));
            for j in 0..a0.nrows() {
                let mut e = vec![0.0; a0.nrows()];
                e[j] = 1.0;
                let mut pe = vec![0.0; a1.nrows()];
                p.apply_add(&e, &mut pe);
                let col = p.restrict(&a1.matvec(&pe));
                for (i, c) in col.iter().enumerate() {
                    assert!((c - a0.get(i, j)).abs() < 1e-12, "k={k} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn multigrid_matches_direct_solve() {
        let seg = Segment::new(Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)).unwrap();
        let f = FractureSet::new(vec![seg], vec![Coefficient::Constant(2.0)]).unwrap();
        for k in [1, 2] {
            let mut mg = Multigrid::new();
            let mut mesh = Arc::new(build_unit_square_unionjack(3).unwrap());
            for _ in 0..4 {
                let space = build_space(mesh.clone(), k).unwrap();
                mg.push_level(&space).unwrap();
                let b = space.restrict(&crate::fem::assemble_line_source(&space, &f, LineSourceMode::Clipped).unwrap());
                let (x, stats) = mg.solve(&b, 1e-12).unwrap();
                let (y, _) = solve_direct(mg.matrix().unwrap(), &b, 1e-12).unwrap();
                let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!(x.iter().zip(&y).all(|(x, y)| (x - y).abs() <= 1e-10 * scale));
                assert!(stats.iterations < 30, "{stats:?}");
                mesh = Arc::new(red_refine(&mesh));
            }
        }
    }
}
