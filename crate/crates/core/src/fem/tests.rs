use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::geometry::{Point2, Segment, Triangle2};
use crate::mesh::{
    build_fracture_conforming, build_fracture_conforming_with, build_unit_square_unionjack, red_refine,
    DiagonalPattern, DomainSpec, FractureSet, Mesh,
};
use crate::quadrature::solve_dense;

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

fn gamma1(g: Coefficient) -> FractureSet {
    FractureSet::new(vec![Segment::new(p(0.25, 0.5), p(0.75, 0.5)).unwrap()], vec![g]).unwrap()
}

fn conforming_square(n: usize, g: Coefficient) -> Arc<Mesh> {
    Arc::new(build_fracture_conforming(&DomainSpec::unit_square(), &gamma1(g), n).unwrap())
}

#[test]
fn unit_right_triangle_p1_stiffness() {
    let k = local_stiffness(1, &Triangle2::new(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)), 1);
    let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((k[i][j] - expect[i][j]).abs() < 1e-15);
        }
    }
}

#[test]
fn p2_stiffness_exact_with_degree_two_rule() {
    let tri = Triangle2::new(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0));
    let (a, b) = (local_stiffness(2, &tri, 2), local_stiffness(2, &tri, 6));
    for i in 0..6 {
        for j in 0..6 {
            assert!((a[i][j] - b[i][j]).abs() < 1e-14);
        }
    }
    // Reference values: vertex 0 diagonal is 1, edge-midpoint diagonal 8/3.
    assert!((a[0][0] - 1.0).abs() < 1e-14);
    assert!((a[3][3] - 8.0 / 3.0).abs() < 1e-14);
}

#[test]
fn full_stiffness_rows_sum_to_zero_and_is_symmetric() {
    for k in [1, 2] {
        let mesh = Arc::new(crate::mesh::bisect(
            &build_unit_square_unionjack(2).unwrap(),
            &[0, 5, 9],
        ));
        let space = build_space(mesh, k).unwrap();
        let a = assemble_stiffness_full(&space);
        for i in 0..a.nrows() {
            let s: f64 = a.row(i).1.iter().sum();
            assert!(s.abs() < 1e-13, "row {i} sums to {s}");
        }
        let r = assemble_stiffness(&space);
        assert!(r.asymmetry() <= 1e-14);
        assert!(r.diagonal().iter().all(|&d| d > 0.0));
    }
}

#[test]
fn single_fracture_edge_load() {
    // n = 4 gives two fracture edges; n = 2 would put γ₁'s endpoints off grid,
    // so build a mesh where one edge is the whole fracture.
    let f = gamma1(Coefficient::Constant(1.0));
    let mesh = build_fracture_conforming(&DomainSpec::unit_square(), &f, 4).unwrap();
    let space = build_space(Arc::new(mesh), 1).unwrap();
    let b = assemble_line_source(&space, &f, LineSourceMode::Conforming).unwrap();
    let node = |x: f64, y: f64| {
        (0..space.dof_count())
            .find(|&d| space.node_point(d).dist(p(x, y)) < 1e-14)
            .unwrap()
    };
    assert!((b[node(0.25, 0.5)] - 0.125).abs() < 1e-15);
    assert!((b[node(0.5, 0.5)] - 0.25).abs() < 1e-15);
    assert!((b[node(0.75, 0.5)] - 0.125).abs() < 1e-15);
    assert!((b.iter().sum::<f64>() - 0.5).abs() < 1e-15);

    let one_edge = FractureSet::new(
        vec![Segment::new(p(0.25, 0.5), p(0.5, 0.5)).unwrap()],
        vec![Coefficient::Constant(1.0)],
    )
    .unwrap();
    let mesh = build_fracture_conforming(&DomainSpec::unit_square(), &one_edge, 4).unwrap();
    let space = build_space(Arc::new(mesh), 1).unwrap();
    let b = assemble_line_source(&space, &one_edge, LineSourceMode::Conforming).unwrap();
    let nz: Vec<f64> = b.iter().copied().filter(|v| *v != 0.0).collect();
    assert_eq!(nz.len(), 2);
    assert!(nz.iter().all(|v| (v - 0.125).abs() < 1e-15));
}

#[test]
fn zero_density_gives_zero_load() {
    let mesh = conforming_square(4, Coefficient::Constant(0.0));
    let space = build_space(mesh, 2).unwrap();
    let f = gamma1(Coefficient::Constant(0.0));
    for mode in [LineSourceMode::Conforming, LineSourceMode::Clipped] {
        assert!(assemble_line_source(&space, &f, mode)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }
}

#[test]
fn conforming_mode_rejects_unresolved_fracture() {
    let space = build_space(Arc::new(build_unit_square_unionjack(3).unwrap()), 1).unwrap();
    let f = gamma1(Coefficient::Constant(1.0));
    assert!(matches!(
        assemble_line_source(&space, &f, LineSourceMode::Conforming),
        Err(crate::Error::InvalidState(_))
    ));
    assert!(assemble_line_source(&space, &f, LineSourceMode::Clipped).is_ok());
}

#[test]
fn clipped_matches_conforming() {
    let densities = [
        Coefficient::Constant(2.0),
        Coefficient::powerlaw(Axis::X, 0.25, 0.75, -0.25 + 1e-3, 1.0).unwrap(),
        Coefficient::powerlaw(Axis::X, 0.25, 0.75, 0.5 + 1e-3, 0.0).unwrap(),
    ];
    for g in densities {
        for pattern in [DiagonalPattern::Uniform, DiagonalPattern::Alternating] {
            let f = gamma1(g.clone());
            let m = build_fracture_conforming_with(&DomainSpec::unit_square(), &f, 8, pattern).unwrap();
            let m = Arc::new(crate::mesh::bisect(&m, &[3, 17, 40]));
            for k in [1, 2] {
                let space = build_space(m.clone(), k).unwrap();
                let a = assemble_line_source(&space, &f, LineSourceMode::Conforming).unwrap();
                let b = assemble_line_source(&space, &f, LineSourceMode::Clipped).unwrap();
                for i in 0..a.len() {
                    assert!(
                        (a[i] - b[i]).abs() <= 1e-12,
                        "{g:?} k={k} dof {i}: {} vs {}",
                        a[i],
                        b[i]
                    );
                }
            }
        }
    }
}

#[test]
fn singular_density_total_matches_closed_form() {
    // ∫_{1/4}^{3/4} ((x−1/4)(3/4−x))^{r0} dx = B(r0+1, r0+1) / 2^{2 r0 + 1}.
    let r0: f64 = -0.25 + 1e-3;
    let g = Coefficient::powerlaw(Axis::X, 0.25, 0.75, r0, 0.0).unwrap();
    let f = gamma1(g);
    let space = build_space(Arc::new(build_unit_square_unionjack(3).unwrap()), 1).unwrap();
    let total: f64 = assemble_line_source(&space, &f, LineSourceMode::Clipped)
        .unwrap()
        .iter()
        .sum();
    let beta = gamma(r0 + 1.0).powi(2) / gamma(2.0 * r0 + 2.0);
    let exact = beta / 2f64.powf(2.0 * r0 + 1.0);
    assert!((total - exact).abs() < 1e-8 * exact, "{total} vs {exact}");
}

/// Lanczos approximation, accurate to ~1e-15 for positive arguments.
fn gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let t = x + 7.5;
    let s = G[1..]
        .iter()
        .enumerate()
        .fold(G[0], |s, (i, g)| s + g / (x + i as f64 + 1.0));
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * s
}

#[test]
fn area_source_examples() {
    let mesh = Arc::new(build_unit_square_unionjack(4).unwrap());
    let space = build_space(mesh.clone(), 1).unwrap();
    assert!(assemble_area_source(&space, &ScalarFn::Constant(0.0))
        .iter()
        .all(|&v| v == 0.0));
    let b = assemble_area_source(&space, &ScalarFn::Constant(1.0));
    let v = (0..mesh.num_vertices())
        .find(|&v| mesh.vertex(v).dist(p(0.5, 0.5)) < 1e-14)
        .unwrap();
    // Grid vertex (0.5, 0.5): 8 incident triangles of area 1/64.
    assert!((b[v] - 8.0 / 64.0 / 3.0).abs() < 1e-15);

    let q = ScalarFn::SinSin {
        amplitude: 2.0 * PI * PI,
    };
    let fine = build_space(Arc::new(red_refine(&red_refine(&mesh))), 2).unwrap();
    let b = assemble_area_source(&fine, &q);
    let total: f64 = b.iter().sum();
    assert!((total - 8.0).abs() < 1e-6, "{total}");
    let free: f64 = fine.restrict(&b).iter().sum();
    assert!((free - 8.0).abs() < 0.2, "{free}");
}

#[test]
fn galerkin_residual_per_row() {
    let f = gamma1(Coefficient::Constant(2.0));
    let problem = ProblemSpec::new(DomainSpec::unit_square(), f, None).unwrap();
    let mesh = Arc::new(red_refine(&conforming_square(8, Coefficient::Constant(2.0))));
    for k in [1, 2] {
        let space = build_space(mesh.clone(), k).unwrap();
        for solver in [SolverKind::Direct, SolverKind::Pcg] {
            let opts = SolveOptions {
                solver,
                ..Default::default()
            };
            let (u, stats) = solve_problem(&space, &problem, &opts).unwrap();
            let a = assemble_stiffness(&space);
            let b = space.restrict(&load_vector(&space, &problem, None).unwrap());
            let x = space.restrict(u.coeffs());
            let ax = a.matvec(&x);
            let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            for i in 0..b.len() {
                assert!((ax[i] - b[i]).abs() <= 1e-12 * bn, "{solver:?} k={k} row {i}");
            }
            assert!(stats.relative_residual <= 1e-12);
            assert!(space
                .dirichlet_mask()
                .iter()
                .zip(u.coeffs())
                .all(|(&d, &c)| !d || c == 0.0));
        }
    }
}

#[test]
fn mirror_symmetry_case3() {
    let f = gamma1(Coefficient::Constant(2.0));
    let problem = ProblemSpec::new(DomainSpec::unit_square(), f, None).unwrap();
    let mesh = Arc::new(red_refine(&build_unit_square_unionjack(4).unwrap()));
    for k in [1, 2] {
        let space = build_space(mesh.clone(), k).unwrap();
        let (u, _) = solve_problem(&space, &problem, &SolveOptions::default()).unwrap();
        let key = |q: Point2| ((q.x * 1e9).round() as i64, (q.y * 1e9).round() as i64);
        let index: HashMap<_, _> = (0..space.dof_count()).map(|d| (key(space.node_point(d)), d)).collect();
        let umax = u.coeffs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for d in 0..space.dof_count() {
            let q = space.node_point(d);
            for m in [p(1.0 - q.x, q.y), p(q.x, 1.0 - q.y)] {
                let e = index[&key(m)];
                assert!((u.coeffs()[d] - u.coeffs()[e]).abs() <= 1e-11 * umax);
            }
        }
    }
}

#[test]
fn prolongation_examples() {
    let coarse_mesh = Arc::new(build_unit_square_unionjack(2).unwrap());
    let fine_mesh = Arc::new(red_refine(&coarse_mesh));
    for k in [1, 2] {
        let cs = build_space(coarse_mesh.clone(), k).unwrap();
        let fs = build_space(fine_mesh.clone(), k).unwrap();
        let one = Solution::interpolate(cs.clone(), |_| 1.0);
        let up = prolongate(&one, &fs).unwrap();
        assert!(up.coeffs().iter().all(|&c| (c - 1.0).abs() < 1e-14));

        let mut hat = vec![0.0; cs.dof_count()];
        hat[cs.free_dofs()[0] as usize] = 1.0;
        let hat = Solution::new(cs.clone(), hat).unwrap();
        let up = prolongate(&hat, &fs).unwrap();
        assert!((h1_seminorm(&hat) - h1_seminorm(&up)).abs() < 1e-13);

        assert!(prolongate(&up, &cs).is_err());
    }
    let tri =
        Arc::new(Mesh::from_triangles(vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)], vec![[0, 1, 2]], vec![]).unwrap());
    let cs = build_space(tri.clone(), 2).unwrap();
    let fine = Arc::new(red_refine(&tri));
    let fs = build_space(fine, 2).unwrap();
    let sq = prolongate(&Solution::interpolate(cs, |q| q.x * q.x), &fs).unwrap();
    for d in 0..fs.dof_count() {
        let q = fs.node_point(d);
        assert!((sq.coeffs()[d] - q.x * q.x).abs() < 1e-15);
    }
}

#[test]
fn seminorm_examples() {
    let mesh = Arc::new(build_unit_square_unionjack(4).unwrap());
    for k in [1, 2] {
        let space = build_space(mesh.clone(), k).unwrap();
        let a = Solution::interpolate(space.clone(), |q| q.x * q.y * (1.0 - q.x));
        assert_eq!(h1_seminorm_diff(&a, &a).unwrap(), 0.0);
        let mut x = vec![0.0; space.dof_count()];
        let d = space.free_dofs()[3] as usize;
        x[d] = 1.0;
        let hat = Solution::new(space.clone(), x.clone()).unwrap();
        let zero = Solution::zero(space.clone());
        let kfull = assemble_stiffness_full(&space);
        let quad: f64 = kfull.matvec(&x).iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((h1_seminorm_diff(&hat, &zero).unwrap() - quad.sqrt()).abs() < 1e-14);
        let two = Solution::new(space.clone(), x.iter().map(|v| 2.0 * v).collect()).unwrap();
        assert!((h1_seminorm_diff(&two, &zero).unwrap() - 2.0 * quad.sqrt()).abs() < 1e-14);
    }
    let other = build_space(Arc::new(red_refine(&mesh)), 1).unwrap();
    let s1 = Solution::zero(build_space(mesh, 1).unwrap());
    assert!(h1_seminorm_diff(&s1, &Solution::zero(other)).is_err());
}

#[test]
fn rate_examples() {
    assert!((convergence_rate(0.2, 0.1).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(convergence_rate(0.2, 0.2).unwrap(), 0.0);
    assert!((convergence_rate(1.0, 0.5f64.sqrt()).unwrap() - 0.5).abs() < 1e-15);
    assert!(convergence_rate(0.0, 1.0).is_err());
    assert!(convergence_rate(1.0, -1.0).is_err());
}

#[test]
fn evaluation_and_gradients() {
    let mesh = Arc::new(crate::mesh::bisect(&build_unit_square_unionjack(2).unwrap(), &[2, 7]));
    for k in [1, 2] {
        let space = build_space(mesh.clone(), k).unwrap();
        let d = space.free_dofs()[0] as usize;
        let mut c = vec![0.0; space.dof_count()];
        c[d] = 1.0;
        let basis_fn = Solution::new(space.clone(), c).unwrap();
        assert!((basis_fn.evaluate(space.node_point(d)).unwrap() - 1.0).abs() < 1e-14);
        assert!(basis_fn.evaluate(p(1.5, 0.5)).is_err());

        let ux = Solution::interpolate(space.clone(), |q| q.x);
        for t in 0..mesh.num_triangles() {
            for g in ux.gradient_on(t).at_vertices {
                assert!((g.x - 1.0).abs() < 1e-13 && g.y.abs() < 1e-13);
            }
        }
    }
    let space = build_space(mesh.clone(), 1).unwrap();
    let u = Solution::interpolate(space.clone(), |q| (3.0 * q.x).sin() + q.y * q.y);
    let h = 1e-7;
    for t in 0..mesh.num_triangles() {
        let c = mesh.triangle_geom(t).centroid();
        let g = u.gradient_on(t).at_vertices[0];
        let fx = (u.value_at(t, mesh.triangle_geom(t).barycentric(c + p(h, 0.0)))
            - u.value_at(t, mesh.triangle_geom(t).barycentric(c - p(h, 0.0))))
            / (2.0 * h);
        assert!((g.x - fx).abs() < 1e-6);
    }
}

#[test]
fn manufactured_rates_under_red_refinement() {
    let problem = ProblemSpec::new(
        DomainSpec::unit_square(),
        FractureSet::empty(),
        Some(ScalarFn::SinSin {
            amplitude: 2.0 * PI * PI,
        }),
    )
    .unwrap();
    let grad = |q: Point2| {
        p(
            PI * (PI * q.x).cos() * (PI * q.y).sin(),
            PI * (PI * q.x).sin() * (PI * q.y).cos(),
        )
    };
    for (k, target, tol) in [(1, 1.0, 0.05), (2, 2.0, 0.1)] {
        let mut mesh =
            Arc::new(build_fracture_conforming(&DomainSpec::unit_square(), &FractureSet::empty(), 4).unwrap());
        let mut errors = Vec::new();
        for _ in 0..4 {
            let space = build_space(mesh.clone(), k).unwrap();
            let (u, _) = solve_problem(&space, &problem, &SolveOptions::default()).unwrap();
            errors.push(h1_error(&u, grad, 8));
            mesh = Arc::new(red_refine(&mesh));
        }
        let rate = convergence_rate(errors[2], errors[3]).unwrap();
        assert!((rate - target).abs() <= tol, "k={k}: rate {rate} ({errors:?})");
    }
}

#[test]
fn dense_oracle_for_small_system() {
    let mesh = conforming_square(4, Coefficient::Constant(1.0));
    let space = build_space(mesh, 2).unwrap();
    let a = assemble_stiffness(&space);
    let b = space.restrict(
        &assemble_line_source(&space, &gamma1(Coefficient::Constant(1.0)), LineSourceMode::Conforming).unwrap(),
    );
    let oracle = solve_dense(a.to_dense(), b.clone()).unwrap();
    let x = solve_spd(&a, &b, 1e-12).unwrap();
    for (x, o) in x.iter().zip(&oracle) {
        assert!((x - o).abs() < 1e-10);
    }
}

#[test]
fn powerlaw_eval_on_short_pieces_stays_finite() {
    let g = Coefficient::powerlaw(Axis::X, 0.25, 0.75, -0.249, 1.0).unwrap();
    let seg = Segment::new(p(0.3, 0.5), p(0.6, 0.5)).unwrap();
    for s in [0.0, 0.1, 0.5, 0.97] {
        let (a, b) = (g.eval_on(&seg, s), g.eval(seg.point_at(s)));
        assert!((a - b).abs() <= 1e-13 * b.abs());
    }
    for (a, b) in [
        (p(0.25, 0.5), p(0.25 + 1e-11, 0.5)),
        (p(0.75, 0.5), p(0.75 - 1e-11, 0.5)),
    ] {
        let tiny = Segment::new(a, b).unwrap();
        let s = 1e-7;
        assert!(g.eval(tiny.point_at(s)).is_infinite());
        let d = s * (tiny.b.x - tiny.a.x).abs();
        let expect = (d * (0.5 - d)).powf(-0.249) + 1.0;
        let got = g.eval_on(&tiny, s);
        assert!(
            got.is_finite() && (got - expect).abs() <= 1e-12 * expect,
            "{got} vs {expect}"
        );
    }
}
