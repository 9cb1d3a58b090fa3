//! Uniform-refinement rate studies, adaptive studies and estimator comparisons.

use std::sync::Arc;
use std::time::Instant;

use super::scenario::{manufactured_exact, Scenario, SeedMesh};
use crate::adapt::{afem_run, AfemConfig, AfemRecord, AfemRun};
use crate::estimator::{eta_indicators, EstimatorKind};
use crate::fem::{
    build_space, convergence_rate, h1_error, h1_seminorm_diff, load_vector, prolongate, resolves_fractures, Multigrid,
    Solution, DEFAULT_RTOL,
};
use crate::geometry::Point2;
use crate::mesh::{red_refine, FractureSet, Mesh};
use crate::{Error, Result};

/// Peak bytes per DOF observed for the multigrid rate study, rounded up.
pub const BYTES_PER_DOF: usize = 640;

/// Default memory budget of a rate study.
pub const DEFAULT_MEMORY_LIMIT: usize = 4 << 30;

#[derive(Debug, Clone, PartialEq)]
pub struct UniformOptions {
    pub degree: usize,
    /// Number of meshes; the initial mesh is level 1.
    pub levels: usize,
    pub seed: SeedMesh,
    pub n: usize,
    pub rtol: f64,
    /// Compute `η` on each level (only where the mesh resolves the fractures).
    pub estimate: bool,
    pub memory_limit: usize,
}

impl UniformOptions {
    pub fn new(degree: usize, levels: usize) -> Self {
        UniformOptions {
            degree,
            levels,
            seed: SeedMesh::Conforming,
            n: 4,
            rtol: DEFAULT_RTOL,
            estimate: false,
            memory_limit: DEFAULT_MEMORY_LIMIT,
        }
    }
}

/// One level of a rate study. `diff` is `|u^{j+1} − u^j|_{H¹}` and `rate`
/// is `log2(|u^j − u^{j−1}| / |u^{j+1} − u^j|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub dofs: usize,
    pub h: f64,
    pub diff: Option<f64>,
    pub rate: Option<f64>,
    pub estimator: Option<f64>,
    /// Energy error against the exact solution, where one is known.
    pub error: Option<f64>,
    pub solver_iterations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn row(&self, level: usize) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.level == level)
    }

    pub fn rate_at(&self, level: usize) -> Option<f64> {
        self.row(level).and_then(|r| r.rate)
    }
}

/// Predicted peak memory of a rate study whose finest level has `dofs` DOFs.
pub fn predicted_bytes(dofs: usize) -> usize {
    dofs.saturating_mul(BYTES_PER_DOF)
}

/// Solve on `levels` red-refined meshes with a multigrid-preconditioned CG
/// and tabulate the successive-difference rates.
pub fn run_uniform_study(scenario: &Scenario, opts: &UniformOptions) -> Result<ConvergenceTable> {
    if opts.levels < 3 {
        return Err(Error::invalid_argument(format!(
            "a rate study needs at least 3 levels, got {}",
            opts.levels
        )));
    }
    let problem = &scenario.problem;
    let mut mesh = Arc::new(scenario.initial_mesh_with(opts.seed, opts.n)?);
    let coarse_dofs = build_space(mesh.clone(), opts.degree)?.dof_count();
    let finest = coarse_dofs.saturating_mul(1 << (2 * (opts.levels - 1)));
    if predicted_bytes(finest) > opts.memory_limit {
        return Err(Error::invalid_argument(format!(
            "level {} has about {finest} DOFs and needs about {:.1} GB, over the {:.1} GB limit",
            opts.levels,
            predicted_bytes(finest) as f64 / 1e9,
            opts.memory_limit as f64 / 1e9
        )));
    }
    let exact = scenario.name == "manufactured_sin";
    let mut mg = Multigrid::new();
    let mut table = ConvergenceTable::default();
    let mut prev: Option<Solution> = None;
    for level in 1..=opts.levels {
        let start = Instant::now();
        let space = build_space(mesh.clone(), opts.degree)?;
        mg.push_level(&space)?;
        let b = space.restrict(&load_vector(&space, problem, None)?);
        let (x, stats) = mg.solve(&b, opts.rtol)?;
        let u = Solution::new(space.clone(), space.extend(&x))?;
        if let Some(coarse) = prev.take() {
            let d = h1_seminorm_diff(&u, &prolongate(&coarse, &space)?)?;
            let n = table.rows.len();
            table.rows[n - 1].diff = Some(d);
            if n >= 2 {
                if let Some(d_prev) = table.rows[n - 2].diff {
                    table.rows[n - 1].rate = Some(convergence_rate(d_prev, d)?);
                }
            }
        }
        let estimator = if opts.estimate && resolves_fractures(&space, &problem.fractures) {
            Some(eta_indicators(&u, problem)?.total())
        } else {
            None
        };
        let error = exact.then(|| h1_error(&u, |p| manufactured_exact(p).1, 2 * opts.degree + 4));
        log::info!(
            "{} level {level}: N={} iterations={} residual={:.1e}",
            scenario.name,
            space.dof_count(),
            stats.iterations,
            stats.relative_residual
        );
        table.rows.push(ConvergenceRow {
            level,
            dofs: space.dof_count(),
            h: mesh.max_diameter(),
            diff: None,
            rate: None,
            estimator,
            error,
            solver_iterations: stats.iterations,
            seconds: start.elapsed().as_secs_f64(),
        });
        prev = Some(u);
        if level < opts.levels {
            mesh = Arc::new(red_refine(&mesh));
        }
    }
    Ok(table)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid_argument("a slope needs at least two matching points"));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid_argument("log-log slope needs positive finite data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid_argument("log-log slope needs distinct abscissae"));
    }
    Ok(sxy / sxx)
}

/// Number of trailing records used for the slope of an `n`-iteration run.
pub fn slope_window(n: usize) -> usize {
    5.max(n / 3)
}

/// Slope of the estimator against DOFs over the final `slope_window` records.
pub fn records_slope(records: &[AfemRecord]) -> Option<f64> {
    if records.len() < 2 {
        return None;
    }
    let tail = &records[records.len() - slope_window(records.len() - 1).min(records.len())..];
    let x: Vec<f64> = tail.iter().map(|r| r.dofs as f64).collect();
    let y: Vec<f64> = tail.iter().map(|r| r.estimator).collect();
    loglog_slope(&x, &y).ok()
}

#[derive(Debug, Clone)]
pub struct AfemStudy {
    pub run: AfemRun,
    pub slope: Option<f64>,
}

impl AfemStudy {
    pub fn records(&self) -> &[AfemRecord] {
        &self.run.records
    }
}

pub fn run_afem_study(scenario: &Scenario, initial: Arc<Mesh>, cfg: &AfemConfig) -> Result<AfemStudy> {
    let run = afem_run(&scenario.problem, initial, cfg)?;
    let slope = records_slope(&run.records);
    Ok(AfemStudy { run, slope })
}

#[derive(Debug, Clone)]
pub struct EstimatorComparison {
    pub eta: AfemStudy,
    pub xi: AfemStudy,
}

/// Two adaptive runs from the same initial mesh, driven by `η` and by
/// `ξ` with box half-width `r`.
pub fn run_estimator_comparison(
    scenario: &Scenario,
    initial: Arc<Mesh>,
    cfg: &AfemConfig,
    r: f64,
) -> Result<EstimatorComparison> {
    let eta_cfg = AfemConfig {
        estimator: EstimatorKind::Eta,
        ..cfg.clone()
    };
    let xi_cfg = AfemConfig {
        estimator: EstimatorKind::Xi { r },
        ..cfg.clone()
    };
    Ok(EstimatorComparison {
        eta: run_afem_study(scenario, initial.clone(), &eta_cfg)?,
        xi: run_afem_study(scenario, initial, &xi_cfg)?,
    })
}

/// The `⌈N/10⌉` smallest elements by area, ties to the lower index.
pub fn smallest_decile(mesh: &Mesh) -> Vec<usize> {
    let mut order: Vec<usize> = (0..mesh.num_triangles()).collect();
    order.sort_by(|&a, &b| mesh.area(a).total_cmp(&mesh.area(b)).then(a.cmp(&b)));
    order.truncate(mesh.num_triangles().div_ceil(10));
    order
}

/// Fraction of `elements` whose centroid lies within `dist` of a point of `points`.
pub fn fraction_near_points(mesh: &Mesh, elements: &[usize], points: &[Point2], dist: f64) -> f64 {
    fraction(elements, |t| {
        let c = mesh.triangle_geom(t).centroid();
        points.iter().any(|p| c.dist(*p) <= dist)
    })
}

/// Fraction of `elements` with a vertex on a fracture at distance more than
/// `margin` from that fracture's endpoints.
pub fn fraction_touching_fracture_interiors(
    mesh: &Mesh,
    elements: &[usize],
    fractures: &FractureSet,
    margin: f64,
) -> f64 {
    fraction(elements, |t| {
        mesh.triangle(t).iter().any(|&v| {
            let p = mesh.vertex(v);
            fractures
                .segments()
                .iter()
                .any(|s| s.contains_point(p) && p.dist(s.a) > margin && p.dist(s.b) > margin)
        })
    })
}

fn fraction(elements: &[usize], pred: impl Fn(usize) -> bool) -> f64 {
    if elements.is_empty() {
        return 0.0;
    }
    elements.iter().filter(|&&t| pred(t)).count() as f64 / elements.len() as f64
}
