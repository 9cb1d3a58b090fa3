use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fracfem::adapt::{AfemConfig, AfemRecord, DEFAULT_THETA};
use fracfem::estimator::{indicators, EstimatorKind, DEFAULT_REG_RADIUS};
use fracfem::fem::{build_space, solve_problem, SolveOptions, DEFAULT_RTOL};
use fracfem::harness::{
    export_vtk, registry, run_afem_study, run_estimator_comparison, run_uniform_study, save_records_csv,
    save_table_csv, scenario, AfemStudy, RunConfig, Scenario, SeedMesh, UniformOptions,
};
use fracfem::mesh::{io::load_text, validate, Mesh};

#[derive(Parser)]
#[command(
    name = "fracfem",
    version,
    about = "Adaptive finite elements for line-source Poisson problems"
)]
struct Cli {
    /// Run file with [scenario], [study] and [output] sections; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once on the initial mesh and export the solution.
    Solve(Opts),
    /// Uniform red-refinement rate study.
    Uniform(Opts),
    /// Adaptive loop driven by one estimator.
    Afem(Opts),
    /// Adaptive loops driven by eta and by xi from the same initial mesh.
    Compare(Opts),
    /// Print the built-in scenarios.
    ListScenarios,
    /// Check a mesh file, or a scenario's initial mesh, for conformity.
    ValidateMesh(Opts),
}

#[derive(Args, Default, Clone)]
struct Opts {
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    degree: Option<usize>,
    /// Number of meshes in a rate study; the initial mesh is level 1.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    /// Number of adaptive refinements.
    #[arg(long)]
    iters: Option<usize>,
    /// eta or xi.
    #[arg(long)]
    estimator: Option<String>,
    /// Box half-width of the xi regularization.
    #[arg(long = "reg-r")]
    reg_r: Option<f64>,
    #[arg(long)]
    rtol: Option<f64>,
    /// Stop the adaptive loop once a solve has this many DOFs.
    #[arg(long = "max-dofs")]
    max_dofs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Initial mesh in the text mesh format.
    #[arg(long = "mesh-file")]
    mesh_file: Option<PathBuf>,
    /// conforming or unionjack.
    #[arg(long)]
    seedmesh: Option<String>,
    /// Grid cells per side for the initial mesh.
    #[arg(long)]
    n: Option<usize>,
}

/// Flags merged with the run file.
struct Settings {
    scenario: Scenario,
    degree: usize,
    levels: usize,
    theta: f64,
    iters: usize,
    estimator: String,
    reg_r: f64,
    rtol: f64,
    max_dofs: Option<usize>,
    out: PathBuf,
    mesh_file: Option<PathBuf>,
    seed: SeedMesh,
    n: usize,
}

impl Settings {
    fn resolve(opts: &Opts, cfg: &RunConfig) -> Result<Self> {
        let name = match &opts.scenario {
            Some(s) => s.clone(),
            None => cfg.get::<String>("scenario", "name")?.unwrap_or_else(|| "case3".into()),
        };
        let scenario = scenario(&name)?;
        let seed = match &opts.seedmesh {
            Some(s) => s.parse()?,
            None => cfg.get::<SeedMesh>("scenario", "seedmesh")?.unwrap_or(scenario.seed),
        };
        let n = opts.n.or(cfg.get("scenario", "n")?).unwrap_or(scenario.n);
        let degree = opts.degree.or(cfg.get("study", "degree")?).unwrap_or(1);
        if !matches!(degree, 1 | 2) {
            bail!("--degree must be 1 or 2, got {degree}");
        }
        let default_levels = if degree == 1 { 6 } else { 5 };
        Ok(Settings {
            degree,
            levels: opts.levels.or(cfg.get("study", "levels")?).unwrap_or(default_levels),
            theta: opts.theta.or(cfg.get("study", "theta")?).unwrap_or(DEFAULT_THETA),
            iters: opts.iters.or(cfg.get("study", "iters")?).unwrap_or(20),
            estimator: opts
                .estimator
                .clone()
                .or(cfg.get("study", "estimator")?)
                .unwrap_or_else(|| "eta".into()),
            reg_r: opts.reg_r.or(cfg.get("study", "reg_r")?).unwrap_or(DEFAULT_REG_RADIUS),
            rtol: opts.rtol.or(cfg.get("study", "rtol")?).unwrap_or(DEFAULT_RTOL),
            max_dofs: opts.max_dofs.or(cfg.get("study", "max_dofs")?),
            out: opts
                .out
                .clone()
                .or(cfg.get("output", "out")?)
                .unwrap_or_else(|| PathBuf::from("out")),
            mesh_file: opts.mesh_file.clone().or(cfg.get("scenario", "mesh_file")?),
            scenario,
            seed,
            n,
        })
    }

    fn estimator_kind(&self) -> Result<EstimatorKind> {
        match self.estimator.as_str() {
            "eta" => Ok(EstimatorKind::Eta),
            "xi" => Ok(EstimatorKind::Xi { r: self.reg_r }),
            other => bail!("--estimator must be eta or xi, got '{other}'"),
        }
    }

    fn initial_mesh(&self) -> Result<Arc<Mesh>> {
        let mesh = match &self.mesh_file {
            Some(path) => load_text(path)?,
            None => self.scenario.initial_mesh_with(self.seed, self.n)?,
        };
        Ok(Arc::new(mesh))
    }

    fn afem_config(&self) -> Result<AfemConfig> {
        let mut cfg = AfemConfig::new(self.degree, self.iters);
        cfg.theta = self.theta;
        cfg.estimator = self.estimator_kind()?;
        cfg.rtol = self.rtol;
        cfg.max_dofs = self.max_dofs;
        Ok(cfg)
    }

    fn out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(&self.out)
    }
}

fn print_records(label: &str, records: &[AfemRecord]) {
    println!("{label}");
    println!(
        "{:>5} {:>10} {:>10} {:>14} {:>8}",
        "j", "N", "elements", "estimator", "marked"
    );
    for r in records {
        println!(
            "{:>5} {:>10} {:>10} {:>14.6e} {:>8}",
            r.iteration, r.dofs, r.elements, r.estimator, r.marked
        );
    }
}

fn export_afem(study: &AfemStudy, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let run = &study.run;
    save_records_csv(&run.records, &dir.join("records.csv"))?;
    export_vtk(&run.mesh, None, Some(&run.indicators), &dir.join("mesh_final.vtk"))?;
    export_vtk(
        &run.mesh,
        Some(&run.solution),
        Some(&run.indicators),
        &dir.join("solution_final.vtk"),
    )?;
    Ok(())
}

fn slope_text(s: Option<f64>) -> String {
    s.map_or("n/a".into(), |s| format!("{s:.4}"))
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::ListScenarios => {
            for s in registry() {
                println!("{:<18} {:<8} n={:<3} {}", s.name, s.study, s.n, s.description);
            }
        }
        Command::ValidateMesh(opts) => {
            let st = Settings::resolve(&opts, &cfg)?;
            let mesh = st.initial_mesh()?;
            let report = validate(&mesh);
            println!(
                "{} vertices, {} triangles, {} edges ({} on fractures)",
                mesh.num_vertices(),
                mesh.num_triangles(),
                mesh.num_edges(),
                mesh.num_fracture_edges()
            );
            if report.is_ok() {
                println!("mesh is valid");
            } else {
                println!("{report}");
                return Ok(false);
            }
        }
        Command::Solve(opts) => {
            let st = Settings::resolve(&opts, &cfg)?;
            let mesh = st.initial_mesh()?;
            let space = build_space(mesh.clone(), st.degree)?;
            let solve_opts = SolveOptions {
                rtol: st.rtol,
                ..SolveOptions::default()
            };
            let (u, stats) = solve_problem(&space, &st.scenario.problem, &solve_opts)?;
            let field = indicators(&u, &st.scenario.problem, st.estimator_kind()?)?;
            let dir = st.out_dir()?;
            export_vtk(&mesh, None, Some(&field), &dir.join("mesh_final.vtk"))?;
            export_vtk(&mesh, Some(&u), Some(&field), &dir.join("solution_final.vtk"))?;
            println!(
                "{}: N={} residual={:.2e} {}={:.6e}",
                st.scenario.name,
                space.dof_count(),
                stats.relative_residual,
                field.kind.name(),
                field.total()
            );
        }
        Command::Uniform(opts) => {
            let st = Settings::resolve(&opts, &cfg)?;
            if st.mesh_file.is_some() {
                bail!("uniform studies start from a scenario seed mesh; drop --mesh-file");
            }
            let mut uopts = UniformOptions::new(st.degree, st.levels);
            uopts.seed = st.seed;
            uopts.n = st.n;
            uopts.rtol = st.rtol;
            uopts.estimate = true;
            let table = run_uniform_study(&st.scenario, &uopts)?;
            save_table_csv(&table, &st.out_dir()?.join("table.csv"))?;
            println!(
                "{:>3} {:>10} {:>12} {:>14} {:>8} {:>14} {:>14}",
                "j", "N", "h", "|u_j+1-u_j|", "R", "eta", "error"
            );
            for r in &table.rows {
                let f = |v: Option<f64>, w: usize| v.map_or(format!("{:>w$}", "-"), |v| format!("{v:>w$.6e}"));
                let rate = r.rate.map_or(format!("{:>8}", "-"), |v| format!("{v:>8.4}"));
                println!(
                    "{:>3} {:>10} {:>12.4e} {} {} {} {}",
                    r.level,
                    r.dofs,
                    r.h,
                    f(r.diff, 14),
                    rate,
                    f(r.estimator, 14),
                    f(r.error, 14)
                );
            }
        }
        Command::Afem(opts) => {
            let st = Settings::resolve(&opts, &cfg)?;
            let study = run_afem_study(&st.scenario, st.initial_mesh()?, &st.afem_config()?)?;
            export_afem(&study, st.out_dir()?)?;
            print_records(st.scenario.name, study.records());
            println!("slope of {} vs N: {}", st.estimator, slope_text(study.slope));
        }
        Command::Compare(opts) => {
            let st = Settings::resolve(&opts, &cfg)?;
            let cmp = run_estimator_comparison(&st.scenario, st.initial_mesh()?, &st.afem_config()?, st.reg_r)?;
            let dir = st.out_dir()?;
            export_afem(&cmp.eta, &dir.join("eta"))?;
            export_afem(&cmp.xi, &dir.join("xi"))?;
            let mut all = fs::File::create(dir.join("records.csv"))?;
            use std::io::Write;
            writeln!(all, "estimator,j,dofs,elements,estimator_total,marked")?;
            for (name, s) in [("eta", &cmp.eta), ("xi", &cmp.xi)] {
                for r in s.records() {
                    writeln!(
                        all,
                        "{name},{},{},{},{:.11e},{}",
                        r.iteration, r.dofs, r.elements, r.estimator, r.marked
                    )?;
                }
            }
            print_records("eta", cmp.eta.records());
            print_records("xi", cmp.xi.records());
            println!(
                "slope eta: {}  slope xi: {}",
                slope_text(cmp.eta.slope),
                slope_text(cmp.xi.slope)
            );
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
