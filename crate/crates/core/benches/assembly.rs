//! Parallel and sequential element loops on the same inputs.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracfem::estimator::eta_indicators;
use fracfem::fem::{assemble_stiffness, build_space, load_vector, solve_problem, FeSpace, SolveOptions};
use fracfem::harness::scenario;
use fracfem::mesh::{red_refine, Mesh};
use fracfem::par;

fn refined(levels: usize) -> Arc<Mesh> {
    let mut mesh = scenario("case5").unwrap().initial_mesh().unwrap();
    for _ in 0..levels {
        mesh = red_refine(&mesh);
    }
    Arc::new(mesh)
}

fn run_both<F: Fn()>(c: &mut Criterion, group: &str, id: &str, f: F) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("parallel", id), |b| b.iter(&f));
    g.bench_function(BenchmarkId::new("sequential", id), |b| b.iter(|| par::sequential(&f)));
    g.finish();
}

fn spaces() -> Vec<(String, Arc<FeSpace>)> {
    let mesh = refined(6);
    [1, 2]
        .into_iter()
        .map(|k| {
            let space = build_space(mesh.clone(), k).unwrap();
            (format!("P{k}/{}dofs", space.dof_count()), space)
        })
        .collect()
}

fn stiffness(c: &mut Criterion) {
    for (id, space) in spaces() {
        run_both(c, "stiffness", &id, || {
            std::hint::black_box(assemble_stiffness(&space));
        });
    }
}

fn line_source(c: &mut Criterion) {
    let problem = scenario("case5").unwrap().problem;
    for (id, space) in spaces() {
        run_both(c, "line_source", &id, || {
            std::hint::black_box(load_vector(&space, &problem, None).unwrap());
        });
    }
}

fn estimator(c: &mut Criterion) {
    let problem = scenario("case5").unwrap().problem;
    for (id, space) in spaces() {
        let (u, _) = solve_problem(&space, &problem, &SolveOptions::default()).unwrap();
        run_both(c, "eta", &id, || {
            std::hint::black_box(eta_indicators(&u, &problem).unwrap());
        });
    }
}

criterion_group!(benches, stiffness, line_source, estimator);
criterion_main!(benches);
