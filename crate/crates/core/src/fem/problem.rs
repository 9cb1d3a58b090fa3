use std::sync::Arc;

use crate::fem::{
    assemble_area_source, assemble_line_source, assemble_stiffness, solve_with, FeSpace, LineSourceMode, ScalarFn,
    Solution, SolveStats, SolverKind, DEFAULT_RTOL,
};
use crate::mesh::{DomainSpec, FractureSet};
use crate::Result;

/// `−Δu = Σ_l g_l δ_{γ_l} + q` in the domain, `u = 0` on its boundary.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub domain: DomainSpec,
    pub fractures: FractureSet,
    pub area_source: Option<ScalarFn>,
}

impl ProblemSpec {
    pub fn new(domain: DomainSpec, fractures: FractureSet, area_source: Option<ScalarFn>) -> Result<Self> {
        fractures.check_inside(&domain)?;
        Ok(ProblemSpec {
            domain,
            fractures,
            area_source,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub solver: SolverKind,
    pub rtol: f64,
    /// `None` picks conforming integration when the mesh resolves every
    /// fracture and clipping otherwise.
    pub line_source: Option<LineSourceMode>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            solver: SolverKind::Direct,
            rtol: DEFAULT_RTOL,
            line_source: None,
        }
    }
}

/// Whether each fracture of `fractures` is tiled by edges of the space's
/// mesh carrying its tag (vacuously true without fractures).
pub fn resolves_fractures(space: &FeSpace, fractures: &FractureSet) -> bool {
    let mesh = space.mesh();
    fractures.is_empty()
        || fractures
            .segments()
            .iter()
            .enumerate()
            .all(|(l, s)| (mesh.tagged_length(l) - s.length()).abs() <= 1e-12 * s.length().max(1.0))
}

/// Full-length load vector of the problem.
pub fn load_vector(space: &FeSpace, problem: &ProblemSpec, mode: Option<LineSourceMode>) -> Result<Vec<f64>> {
    let mode = mode.unwrap_or(if resolves_fractures(space, &problem.fractures) {
        LineSourceMode::Conforming
    } else {
        LineSourceMode::Clipped
    });
    let mut b = assemble_line_source(space, &problem.fractures, mode)?;
    if let Some(q) = &problem.area_source {
        for (bi, qi) in b.iter_mut().zip(assemble_area_source(space, q)) {
            *bi += qi;
        }
    }
    Ok(b)
}

/// Assemble and solve the Galerkin system on `space`.
pub fn solve_problem(
    space: &Arc<FeSpace>,
    problem: &ProblemSpec,
    opts: &SolveOptions,
) -> Result<(Solution, SolveStats)> {
    let a = assemble_stiffness(space);
    let b = space.restrict(&load_vector(space, problem, opts.line_source)?);
    let (x, stats) = solve_with(opts.solver, &a, &b, opts.rtol)?;
    log::debug!(
        "solved {} unknowns ({} nnz), relative residual {:.2e}",
        a.nrows(),
        a.nnz(),
        stats.relative_residual
    );
    Ok((Solution::new(space.clone(), space.extend(&x))?, stats))
}
