use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Side};

use crate::fem::sparse::{dot, norm2};
use crate::fem::CsrMatrix;
use crate::{par, Error, Result};

pub const DEFAULT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Sparse Cholesky factorization with iterative refinement.
    #[default]
    Direct,
    /// Jacobi-preconditioned conjugate gradients.
    Pcg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖Ax − b‖₂ / ‖b‖₂` of the returned solution.
    pub relative_residual: f64,
}

/// Jacobi-preconditioned CG to `‖Ax − b‖₂ ≤ rtol·‖b‖₂`, capped at
/// `50·√n + 1000` iterations.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], rtol: f64) -> Result<Vec<f64>> {
    pcg(a, b, rtol).map(|(x, _)| x)
}

pub fn pcg(a: &CsrMatrix, b: &[f64], rtol: f64) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.nrows();
    if b.len() != n {
        return Err(Error::invalid_argument(format!(
            "rhs has length {}, matrix {n}",
            b.len()
        )));
    }
    if !(rtol > 0.0 && rtol <= 1e-6) {
        return Err(Error::invalid_argument(format!("rtol {rtol} outside (0, 1e-6]")));
    }
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let cap = (50.0 * (n as f64).sqrt()) as usize + 1000;
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut rnorm = bnorm;
    for it in 0..cap {
        if rnorm <= rtol * bnorm {
            return Ok((
                x,
                SolveStats {
                    iterations: it,
                    relative_residual: rnorm / bnorm,
                },
            ));
        }
        let ap = a.matvec(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = norm2(&r);
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if rnorm <= rtol * bnorm {
        return Ok((
            x,
            SolveStats {
                iterations: cap,
                relative_residual: rnorm / bnorm,
            },
        ));
    }
    Err(Error::SolverFailure {
        iterations: cap,
        residual: rnorm / bnorm,
    })
}

/// Sparse Cholesky factor of an SPD matrix (lower triangle).
pub struct Cholesky {
    n: usize,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl std::fmt::Debug for Cholesky {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cholesky {{ n: {} }}", self.n)
    }
}

impl Cholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        // The lower triangle in CSC form is the upper triangle of the CSR rows.
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::with_capacity(a.nnz() / 2 + n);
        let mut vals = Vec::with_capacity(row_idx.capacity());
        col_ptr.push(0usize);
        for j in 0..n {
            let (c, v) = a.row(j);
            let start = c.partition_point(|&i| (i as usize) < j);
            row_idx.extend(c[start..].iter().map(|&i| i as usize));
            vals.extend_from_slice(&v[start..]);
            col_ptr.push(row_idx.len());
        }
        let symbolic = SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx);
        let lower = SparseColMat::new(symbolic, vals);
        let llt = lower
            .as_ref()
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Cholesky { n, llt })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        if self.n == 0 {
            return Vec::new();
        }
        let mut m = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.llt.solve_in_place(m.as_mut());
        (0..self.n).map(|i| m[(i, 0)]).collect()
    }
}

/// Sparse Cholesky solve. Up to three steps of iterative refinement are
/// taken while the residual exceeds `rtol`; the achieved residual is
/// reported rather than enforced, since for large stiffness matrices it is
/// bounded below by rounding (roughly machine epsilon times the condition
/// number).
pub fn solve_direct(a: &CsrMatrix, b: &[f64], rtol: f64) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.nrows();
    if b.len() != n {
        return Err(Error::invalid_argument(format!(
            "rhs has length {}, matrix {n}",
            b.len()
        )));
    }
    let bnorm = norm2(b);
    if n == 0 || bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let chol = Cholesky::new(a)?;
    let mut x = chol.solve(b);
    let residual = |x: &[f64]| -> Vec<f64> {
        let ax = a.matvec(x);
        par::map_range(n, |i| b[i] - ax[i])
    };
    let mut r = residual(&x);
    let mut rel = norm2(&r) / bnorm;
    let mut steps = 0;
    while rel > rtol && steps < 3 {
        let dx = chol.solve(&r);
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(x, d)| x + d).collect();
        let rc = residual(&candidate);
        let rel_c = norm2(&rc) / bnorm;
        steps += 1;
        if rel_c >= rel {
            break;
        }
        x = candidate;
        r = rc;
        rel = rel_c;
    }
    if !rel.is_finite() {
        return Err(Error::SolverFailure {
            iterations: steps,
            residual: rel,
        });
    }
    Ok((
        x,
        SolveStats {
            iterations: steps,
            relative_residual: rel,
        },
    ))
}

pub fn solve_with(kind: SolverKind, a: &CsrMatrix, b: &[f64], rtol: f64) -> Result<(Vec<f64>, SolveStats)> {
    match kind {
        SolverKind::Direct => solve_direct(a, b, rtol),
        SolverKind::Pcg => pcg(a, b, rtol),
    }
}
