//! Built-in problem registry.

use std::fmt;
use std::str::FromStr;

use crate::fem::{Axis, Coefficient, ProblemSpec, ScalarFn};
use crate::geometry::{Point2, Segment};
use crate::mesh::{build_fracture_conforming, build_unit_square_unionjack, DomainSpec, FractureSet, Mesh};
use crate::{Error, Result};

/// Initial mesh family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMesh {
    /// Structured grid with every fracture resolved by edges.
    Conforming,
    /// Union-Jack pattern on the unit square, blind to the fractures.
    UnionJack,
}

impl FromStr for SeedMesh {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conforming" => Ok(SeedMesh::Conforming),
            "unionjack" => Ok(SeedMesh::UnionJack),
            _ => Err(Error::invalid_argument(format!(
                "unknown seed mesh '{s}' (conforming|unionjack)"
            ))),
        }
    }
}

impl fmt::Display for SeedMesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            SeedMesh::Conforming => "conforming",
            SeedMesh::UnionJack => "unionjack",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyType {
    Uniform,
    Afem,
    Compare,
}

impl fmt::Display for StudyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            StudyType::Uniform => "uniform",
            StudyType::Afem => "afem",
            StudyType::Compare => "compare",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub problem: ProblemSpec,
    pub seed: SeedMesh,
    /// Grid cells per side of the bounding box for the initial mesh.
    pub n: usize,
    pub study: StudyType,
}

impl Scenario {
    pub fn initial_mesh(&self) -> Result<Mesh> {
        self.initial_mesh_with(self.seed, self.n)
    }

    pub fn initial_mesh_with(&self, seed: SeedMesh, n: usize) -> Result<Mesh> {
        match seed {
            SeedMesh::Conforming => build_fracture_conforming(&self.problem.domain, &self.problem.fractures, n),
            SeedMesh::UnionJack => {
                if self.problem.domain != DomainSpec::unit_square() {
                    return Err(Error::invalid_argument(format!(
                        "scenario '{}' is not posed on the unit square; the Union-Jack seed needs it",
                        self.name
                    )));
                }
                build_unit_square_unionjack(n)
            }
        }
    }
}

/// Power-law parameters `(r0, r1)` of the single-fracture cases.
pub const CASES: [(f64, f64); 6] = [
    (-0.249, 1.0),
    (0.251, 1.0),
    (0.0, 1.0),
    (0.251, 0.0),
    (0.501, 0.0),
    (1.001, 0.0),
];

/// Fracture endpoints of the single-fracture cases.
pub const CASE_ENDPOINTS: [Point2; 2] = [Point2 { x: 0.25, y: 0.5 }, Point2 { x: 0.75, y: 0.5 }];

const STAR_CENTER: Point2 = Point2 { x: 0.5, y: 0.5 };
const STAR_TIPS: [Point2; 4] = [
    Point2 { x: 0.25, y: 0.5 },
    Point2 { x: 0.75, y: 0.5 },
    Point2 { x: 0.5, y: 0.25 },
    Point2 { x: 0.5, y: 0.75 },
];
const STAR_DENSITY: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];

/// Corners of the loop fracture in the L-shaped domain.
pub const LOOP_CORNERS: [Point2; 6] = [
    Point2 { x: -0.8, y: -0.8 },
    Point2 { x: -0.2, y: -0.8 },
    Point2 { x: -0.2, y: -0.5 },
    Point2 { x: -0.5, y: -0.5 },
    Point2 { x: -0.5, y: -0.2 },
    Point2 { x: -0.8, y: -0.2 },
];

fn case(i: usize) -> Result<ProblemSpec> {
    let (r0, r1) = CASES[i];
    let [a, b] = CASE_ENDPOINTS;
    let g = Coefficient::powerlaw(Axis::X, a.x, b.x, r0, r1)?;
    ProblemSpec::new(
        DomainSpec::unit_square(),
        FractureSet::new(vec![Segment::new(a, b)?], vec![g])?,
        None,
    )
}

fn star(arms: &[usize]) -> Result<ProblemSpec> {
    let segments = arms
        .iter()
        .map(|&l| Segment::new(STAR_CENTER, STAR_TIPS[l]))
        .collect::<Result<Vec<_>>>()?;
    let coefficients = arms.iter().map(|&l| Coefficient::Constant(STAR_DENSITY[l])).collect();
    ProblemSpec::new(
        DomainSpec::unit_square(),
        FractureSet::new(segments, coefficients)?,
        None,
    )
}

fn lshape_loop() -> Result<ProblemSpec> {
    let segments = (0..6)
        .map(|i| Segment::new(LOOP_CORNERS[i], LOOP_CORNERS[(i + 1) % 6]))
        .collect::<Result<Vec<_>>>()?;
    ProblemSpec::new(
        DomainSpec::lshape(),
        FractureSet::new(segments, vec![Coefficient::Constant(5.0); 6])?,
        None,
    )
}

fn manufactured() -> Result<ProblemSpec> {
    let amplitude = 2.0 * std::f64::consts::PI.powi(2);
    ProblemSpec::new(
        DomainSpec::unit_square(),
        FractureSet::empty(),
        Some(ScalarFn::SinSin { amplitude }),
    )
}

pub const SCENARIO_NAMES: [&str; 11] = [
    "case1",
    "case2",
    "case3",
    "case4",
    "case5",
    "case6",
    "lshape_loop",
    "geometry1",
    "geometry2",
    "geometry3",
    "manufactured_sin",
];

/// Look up a built-in scenario by name.
pub fn scenario(name: &str) -> Result<Scenario> {
    let (description, problem, n, study) = match name {
        "case1" => (
            "single fracture, g = ((x-1/4)(3/4-x))^(-0.249) + 1",
            case(0)?,
            4,
            StudyType::Uniform,
        ),
        "case2" => (
            "single fracture, g = ((x-1/4)(3/4-x))^0.251 + 1",
            case(1)?,
            4,
            StudyType::Uniform,
        ),
        "case3" => ("single fracture, g = 2", case(2)?, 4, StudyType::Uniform),
        "case4" => (
            "single fracture, g = ((x-1/4)(3/4-x))^0.251",
            case(3)?,
            4,
            StudyType::Uniform,
        ),
        "case5" => (
            "single fracture, g = ((x-1/4)(3/4-x))^0.501",
            case(4)?,
            4,
            StudyType::Uniform,
        ),
        "case6" => (
            "single fracture, g = ((x-1/4)(3/4-x))^1.001",
            case(5)?,
            4,
            StudyType::Uniform,
        ),
        "lshape_loop" => (
            "L-shaped domain, closed six-edge fracture loop, g = 5",
            lshape_loop()?,
            20,
            StudyType::Compare,
        ),
        "geometry1" => (
            "two collinear arms from (0.5, 0.5), g = 1, -1",
            star(&[1, 3])?,
            4,
            StudyType::Afem,
        ),
        "geometry2" => (
            "three arms from (0.5, 0.5), g = 1, 1, -1",
            star(&[1, 2, 3])?,
            4,
            StudyType::Afem,
        ),
        "geometry3" => (
            "four arms from (0.5, 0.5), g = -1, 1, 1, -1",
            star(&[0, 1, 2, 3])?,
            4,
            StudyType::Afem,
        ),
        "manufactured_sin" => (
            "no fracture, u = sin(pi x) sin(pi y)",
            manufactured()?,
            4,
            StudyType::Uniform,
        ),
        _ => {
            return Err(Error::invalid_argument(format!(
                "unknown scenario '{name}' (known: {})",
                SCENARIO_NAMES.join(", ")
            )))
        }
    };
    Ok(Scenario {
        name: SCENARIO_NAMES.iter().find(|&&s| s == name).copied().unwrap(),
        description,
        problem,
        seed: SeedMesh::Conforming,
        n,
        study,
    })
}

pub fn registry() -> Vec<Scenario> {
    SCENARIO_NAMES
        .iter()
        .map(|n| scenario(n).expect("built-in scenario"))
        .collect()
}

/// Exact solution and gradient of `manufactured_sin`.
pub fn manufactured_exact(p: Point2) -> (f64, Point2) {
    use std::f64::consts::PI;
    let (sx, cx) = (PI * p.x).sin_cos();
    let (sy, cy) = (PI * p.y).sin_cos();
    (sx * sy, Point2::new(PI * cx * sy, PI * sx * cy))
}
