//! Dörfler marking and the solve, estimate, mark, refine loop.

use std::sync::Arc;
use std::time::Instant;

use crate::estimator::{indicators, EstimatorKind, IndicatorField};
use crate::fem::{build_space, solve_problem, ProblemSpec, Solution, SolveOptions, SolverKind, DEFAULT_RTOL};
use crate::mesh::{bisect, Mesh};
use crate::{Error, Result};

/// Default bulk parameter.
pub const DEFAULT_THETA: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct AfemConfig {
    pub theta: f64,
    /// Number of refinements `n`; the loop solves on `n + 1` meshes.
    pub max_refinements: usize,
    pub degree: usize,
    pub estimator: EstimatorKind,
    pub solver: SolverKind,
    pub rtol: f64,
    /// Stop early once a solve reaches this many DOFs.
    pub max_dofs: Option<usize>,
}

impl AfemConfig {
    pub fn new(degree: usize, max_refinements: usize) -> Self {
        AfemConfig {
            theta: DEFAULT_THETA,
            max_refinements,
            degree,
            estimator: EstimatorKind::Eta,
            solver: SolverKind::Direct,
            rtol: DEFAULT_RTOL,
            max_dofs: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::invalid_argument(format!(
                "theta {} must lie in (0, 1)",
                self.theta
            )));
        }
        if !matches!(self.degree, 1 | 2) {
            return Err(Error::invalid_argument(format!(
                "degree {} must be 1 or 2",
                self.degree
            )));
        }
        Ok(())
    }
}

/// One pass of the loop.
#[derive(Debug, Clone, PartialEq)]
pub struct AfemRecord {
    pub iteration: usize,
    pub dofs: usize,
    pub elements: usize,
    pub estimator: f64,
    /// Elements marked on this mesh (zero on the last one).
    pub marked: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct AfemRun {
    pub solution: Solution,
    pub mesh: Arc<Mesh>,
    pub indicators: IndicatorField,
    pub records: Vec<AfemRecord>,
}

/// Minimal set `M` with `Σ_{T∈M} η_T² ≥ θ² Σ_T η_T²`: the greedy prefix of
/// the elements sorted by decreasing indicator, ties to the lower index.
pub fn dorfler_mark(field: &IndicatorField, theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::invalid_argument(format!("theta {theta} must lie in (0, 1)")));
    }
    let sq = field.squares();
    let total: f64 = sq.iter().sum();
    if total <= 0.0 {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..sq.len()).collect();
    order.sort_by(|&a, &b| sq[b].total_cmp(&sq[a]).then(a.cmp(&b)));
    let goal = theta * theta * total;
    let mut acc = 0.0;
    for (m, &t) in order.iter().enumerate() {
        acc += sq[t];
        if acc >= goal {
            order.truncate(m + 1);
            return Ok(order);
        }
    }
    Ok(order)
}

/// Run the adaptive loop from `initial`. Deterministic for a fixed config.
pub fn afem_run(problem: &ProblemSpec, initial: Arc<Mesh>, cfg: &AfemConfig) -> Result<AfemRun> {
    cfg.validate()?;
    let opts = SolveOptions {
        solver: cfg.solver,
        rtol: cfg.rtol,
        line_source: None,
    };
    let mut mesh = initial;
    let mut records = Vec::new();
    for j in 0..=cfg.max_refinements {
        let start = Instant::now();
        let space = build_space(mesh.clone(), cfg.degree)?;
        let (solution, _) = solve_problem(&space, problem, &opts)?;
        let field = indicators(&solution, problem, cfg.estimator)?;
        let last = j == cfg.max_refinements || cfg.max_dofs.is_some_and(|m| space.dof_count() >= m);
        let marked = if last {
            Vec::new()
        } else {
            dorfler_mark(&field, cfg.theta)?
        };
        let record = AfemRecord {
            iteration: j,
            dofs: space.dof_count(),
            elements: mesh.num_triangles(),
            estimator: field.total(),
            marked: marked.len(),
            seconds: 0.0,
        };
        if last || marked.is_empty() {
            records.push(AfemRecord {
                seconds: start.elapsed().as_secs_f64(),
                ..record
            });
            log::info!("afem j={j} N={} est={:.6e}", space.dof_count(), field.total());
            return Ok(AfemRun {
                solution,
                mesh,
                indicators: field,
                records,
            });
        }
        mesh = Arc::new(bisect(&mesh, &marked));
        records.push(AfemRecord {
            seconds: start.elapsed().as_secs_f64(),
            ..record
        });
        log::info!(
            "afem j={j} N={} est={:.6e} marked={}",
            space.dof_count(),
            field.total(),
            marked.len()
        );
    }
    unreachable!("the last iteration returns")
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::fem::{Axis, Coefficient};
    use crate::geometry::{Point2, Segment};
    use crate::mesh::{build_fracture_conforming, DomainSpec, FractureSet};

    fn field(values: Vec<f64>) -> IndicatorField {
        IndicatorField {
            kind: EstimatorKind::Eta,
            values,
        }
    }

    fn bulk_ok(sq: &[f64], set: &[usize], theta: f64) -> bool {
        let total: f64 = sq.iter().sum();
        set.iter().map(|&t| sq[t]).sum::<f64>() >= theta * theta * total
    }

    #[test]
    fn dorfler_examples() {
        assert_eq!(dorfler_mark(&field(vec![2.0, 1.0, 1.0]), 0.25).unwrap(), vec![0]);
        let f = field(vec![0.3, 0.1, 0.7, 0.2]);
        assert_eq!(dorfler_mark(&f, 1.0 - 1e-9).unwrap().len(), 4);
        for n in [1, 7, 16, 33, 100] {
            let m = dorfler_mark(&field(vec![1.5; n]), 0.25).unwrap();
            assert_eq!(m.len(), (0.0625 * n as f64).ceil() as usize);
            assert_eq!(m, (0..m.len()).collect::<Vec<_>>());
        }
        assert!(dorfler_mark(&field(vec![0.0; 5]), 0.25).unwrap().is_empty());
        assert!(dorfler_mark(&f, 0.0).is_err());
        assert!(dorfler_mark(&f, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn dorfler_is_minimal(values in prop::collection::vec(0.0f64..10.0, 1..60), theta in 0.01f64..0.99) {
            let f = field(values);
            let sq = f.squares();
            let set = dorfler_mark(&f, theta).unwrap();
            if sq.iter().sum::<f64>() > 0.0 {
                prop_assert!(bulk_ok(&sq, &set, theta));
                prop_assert!(!bulk_ok(&sq, &set[..set.len() - 1], theta));
                let smallest = set.iter().map(|&t| sq[t]).fold(f64::INFINITY, f64::min);
                prop_assert!((0..sq.len()).filter(|t| !set.contains(t)).all(|t| sq[t] <= smallest));
            }
        }

        #[test]
        fn dorfler_is_monotone_in_theta(values in prop::collection::vec(0.0f64..10.0, 1..60), a in 0.01f64..0.99, b in 0.01f64..0.99) {
            let f = field(values);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let small = dorfler_mark(&f, lo).unwrap();
            let large = dorfler_mark(&f, hi).unwrap();
            prop_assert!(small.len() <= large.len());
            prop_assert_eq!(&large[..small.len()], &small[..]);
        }
    }

    fn case3() -> (ProblemSpec, Arc<Mesh>) {
        let seg = Segment::new(Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)).unwrap();
        let g = Coefficient::powerlaw(Axis::X, 0.25, 0.75, 0.0, 1.0).unwrap();
        let pb = ProblemSpec::new(
            DomainSpec::unit_square(),
            FractureSet::new(vec![seg], vec![g]).unwrap(),
            None,
        )
        .unwrap();
        let mesh = Arc::new(build_fracture_conforming(&pb.domain, &pb.fractures, 4).unwrap());
        (pb, mesh)
    }

    #[test]
    fn zero_refinements_give_one_record() {
        let (pb, mesh) = case3();
        let run = afem_run(&pb, mesh.clone(), &AfemConfig::new(1, 0)).unwrap();
        assert_eq!(run.records.len(), 1);
        assert_eq!(run.records[0].dofs, 25);
        assert_eq!(run.records[0].marked, 0);
        assert_eq!(run.mesh.num_triangles(), mesh.num_triangles());
    }

    #[test]
    fn rerun_is_bitwise_identical() {
        let (pb, mesh) = case3();
        let cfg = AfemConfig::new(2, 6);
        let a = afem_run(&pb, mesh.clone(), &cfg).unwrap();
        let b = afem_run(&pb, mesh, &cfg).unwrap();
        assert_eq!(a.mesh.vertices(), b.mesh.vertices());
        assert_eq!(a.mesh.triangles(), b.mesh.triangles());
        assert_eq!(a.solution.coeffs(), b.solution.coeffs());
        assert_eq!(a.indicators.values, b.indicators.values);
        let strip = |r: &[AfemRecord]| r.iter().map(|r| (r.dofs, r.marked, r.estimator)).collect::<Vec<_>>();
        assert_eq!(strip(&a.records), strip(&b.records));
    }

    #[test]
    fn dofs_increase_and_stop_at_limit() {
        let (pb, mesh) = case3();
        let mut cfg = AfemConfig::new(1, 100);
        cfg.max_dofs = Some(400);
        let run = afem_run(&pb, mesh, &cfg).unwrap();
        assert!(run.records.windows(2).all(|w| w[1].dofs > w[0].dofs));
        let last = run.records.last().unwrap();
        assert!(last.dofs >= 400 && last.marked == 0);
        assert!(run.records[..run.records.len() - 1]
            .iter()
            .all(|r| r.dofs < 400 && r.marked > 0));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let (pb, mesh) = case3();
        let mut cfg = AfemConfig::new(3, 1);
        assert!(afem_run(&pb, mesh.clone(), &cfg).is_err());
        cfg.degree = 1;
        cfg.theta = 1.5;
        assert!(afem_run(&pb, mesh, &cfg).is_err());
    }
}
