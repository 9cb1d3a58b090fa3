//! Gauss rules on `[0, 1]` and on the reference triangle `(0,0),(1,0),(0,1)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::{Error, Result};

/// A rule on `[0, 1]`: points in `[0, 1]`, weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Polynomials up to this degree are integrated exactly.
    pub degree: usize,
}

/// A rule on the reference triangle: barycentric points, weights summing
/// to the reference area ½.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl IntervalRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `∫_0^1 f`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `∫_T̂ f` with `f` given in barycentric coordinates.
    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&l, &w)| w * f(l)).sum()
    }
}

pub const MAX_INTERVAL_POINTS: usize = 32;
pub const MAX_TRIANGLE_DEGREE: usize = 10;

/// Gauss–Legendre rule with `npts` nodes on `[0, 1]`, exact to degree
/// `2 npts - 1`.
pub fn gauss_interval(npts: usize) -> Result<IntervalRule> {
    if npts == 0 || npts > MAX_INTERVAL_POINTS {
        return Err(Error::invalid_argument(format!(
            "interval rule needs 1..={MAX_INTERVAL_POINTS} points, got {npts}"
        )));
    }
    Ok(interval_cache()[npts - 1].clone())
}

/// Cached reference to a Gauss–Legendre rule; panics outside `1..=32`.
pub(crate) fn interval_rule(npts: usize) -> &'static IntervalRule {
    &interval_cache()[npts - 1]
}

fn interval_cache() -> &'static [IntervalRule] {
    static CACHE: OnceLock<Vec<IntervalRule>> = OnceLock::new();
    CACHE.get_or_init(|| (1..=MAX_INTERVAL_POINTS).map(legendre_rule).collect())
}

fn legendre_rule(n: usize) -> IntervalRule {
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton on P_n from the Tricomi initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map from [-1, 1] to [0, 1]
        points[i] = 0.5 * (1.0 - x);
        points[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    IntervalRule {
        points,
        weights,
        degree: 2 * n - 1,
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Symmetric rule on the reference triangle exact to `degree`.
///
/// Degrees 3 and 7 are served by the next rule up, since the symmetric rules
/// of exactly those degrees need a negative weight.
pub fn gauss_triangle(degree: usize) -> Result<TriangleRule> {
    if degree == 0 || degree > MAX_TRIANGLE_DEGREE {
        return Err(Error::invalid_argument(format!(
            "triangle rule degree must be in 1..={MAX_TRIANGLE_DEGREE}, got {degree}"
        )));
    }
    Ok(triangle_rule(degree).clone())
}

/// Cached reference to the triangle rule for `degree`, clamped to `1..=10`.
pub(crate) fn triangle_rule(degree: usize) -> &'static TriangleRule {
    static CACHE: OnceLock<Vec<TriangleRule>> = OnceLock::new();
    let rules = CACHE.get_or_init(|| {
        let base: Vec<TriangleRule> = SYMMETRIC_RULES.iter().map(polish_rule).collect();
        (1..=MAX_TRIANGLE_DEGREE)
            .map(|d| base.iter().find(|r| r.degree >= d).cloned().unwrap())
            .collect()
    });
    &rules[degree.clamp(1, MAX_TRIANGLE_DEGREE) - 1]
}

/// Orbit of a symmetric rule, weight normalized so all weights sum to one.
#[derive(Clone, Copy)]
enum Orbit {
    Centroid(f64),
    /// `(a, b, b)` and permutations, three points.
    Two(f64, f64),
    /// `(a, b, 1 - a - b)` and permutations, six points.
    Three(f64, f64, f64),
}

struct SymmetricRule {
    degree: usize,
    orbits: &'static [Orbit],
}

// Dunavant's symmetric rules. The tabulated values are refined to machine
// precision by `polish_rule` before use.
const SYMMETRIC_RULES: &[SymmetricRule] = &[
    SymmetricRule {
        degree: 1,
        orbits: &[Orbit::Centroid(1.0)],
    },
    SymmetricRule {
        degree: 2,
        orbits: &[Orbit::Two(1.0 / 3.0, 1.0 / 6.0)],
    },
    SymmetricRule {
        degree: 4,
        orbits: &[
            Orbit::Two(0.223381589678011, 0.445948490915965),
            Orbit::Two(0.109951743655322, 0.091576213509771),
        ],
    },
    SymmetricRule {
        degree: 5,
        orbits: &[
            Orbit::Centroid(0.225),
            Orbit::Two(0.132394152788506, 0.470142064105115),
            Orbit::Two(0.125939180544827, 0.101286507323456),
        ],
    },
    SymmetricRule {
        degree: 6,
        orbits: &[
            Orbit::Two(0.116786275726379, 0.249286745170910),
            Orbit::Two(0.050844906370207, 0.063089014491502),
            Orbit::Three(0.082851075618374, 0.053145049844817, 0.310352451033784),
        ],
    },
    SymmetricRule {
        degree: 8,
        orbits: &[
            Orbit::Centroid(0.144315607677787),
            Orbit::Two(0.095091634267285, 0.459292588292723),
            Orbit::Two(0.103217370534718, 0.170569307751760),
            Orbit::Two(0.032458497623198, 0.050547228317031),
            Orbit::Three(0.027230314174435, 0.008394777409958, 0.263112829634638),
        ],
    },
    SymmetricRule {
        degree: 9,
        orbits: &[
            Orbit::Centroid(0.097135796282799),
            Orbit::Two(0.031334700227139, 0.489682519198738),
            Orbit::Two(0.077827541004774, 0.437089591492937),
            Orbit::Two(0.079647738927210, 0.188203535619033),
            Orbit::Two(0.025577675658698, 0.044729513394453),
            Orbit::Three(0.043283539377289, 0.036838412054736, 0.221962989160766),
        ],
    },
    SymmetricRule {
        degree: 10,
        orbits: &[
            Orbit::Centroid(0.090817990382754),
            Orbit::Two(0.036725957756467, 0.485577633383657),
            Orbit::Two(0.045321059435528, 0.109481575485037),
            Orbit::Three(0.072757916845420, 0.141707219414880, 0.307939838764121),
            Orbit::Three(0.028327242531057, 0.025003534762686, 0.246672560639903),
            Orbit::Three(0.009421666963733, 0.009540815400299, 0.066803251012200),
        ],
    },
];

fn orbit_params(o: &Orbit) -> Vec<f64> {
    match *o {
        Orbit::Centroid(w) => vec![w],
        Orbit::Two(w, b) => vec![w, b],
        Orbit::Three(w, a, b) => vec![w, a, b],
    }
}

/// Expand orbits with the given parameter vector into points and weights
/// (weights scaled to the reference area ½).
fn expand(orbits: &[Orbit], params: &[f64]) -> (Vec<[f64; 3]>, Vec<f64>) {
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    let mut k = 0;
    for o in orbits {
        match o {
            Orbit::Centroid(_) => {
                pts.push([1.0 / 3.0; 3]);
                wts.push(0.5 * params[k]);
                k += 1;
            }
            Orbit::Two(..) => {
                let (w, b) = (params[k], params[k + 1]);
                let a = 1.0 - 2.0 * b;
                for p in [[a, b, b], [b, a, b], [b, b, a]] {
                    pts.push(p);
                    wts.push(0.5 * w);
                }
                k += 2;
            }
            Orbit::Three(..) => {
                let (w, a, b) = (params[k], params[k + 1], params[k + 2]);
                let c = 1.0 - a - b;
                for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                    pts.push(p);
                    wts.push(0.5 * w);
                }
                k += 3;
            }
        }
    }
    (pts, wts)
}

/// Exact `∫_T̂ λ1^i λ2^j = i! j! / (i + j + 2)!`.
fn reference_moment(i: usize, j: usize) -> f64 {
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    fact(i) * fact(j) / fact(i + j + 2)
}

/// Gauss–Newton refinement of the orbit parameters on the moment equations
/// of all monomials `λ1^i λ2^j`, `i + j <= degree`.
fn polish_rule(rule: &SymmetricRule) -> TriangleRule {
    let mut params: Vec<f64> = rule.orbits.iter().flat_map(orbit_params).collect();
    let monomials: Vec<(usize, usize)> = (0..=rule.degree)
        .flat_map(|d| (0..=d).map(move |i| (i, d - i)))
        .collect();
    let residual = |p: &[f64]| -> Vec<f64> {
        let (pts, wts) = expand(rule.orbits, p);
        monomials
            .iter()
            .map(|&(i, j)| {
                let q: f64 = pts
                    .iter()
                    .zip(&wts)
                    .map(|(l, w)| w * l[1].powi(i as i32) * l[2].powi(j as i32))
                    .sum();
                q - reference_moment(i, j)
            })
            .collect()
    };
    let n = params.len();
    for _ in 0..8 {
        let r = residual(&params);
        if r.iter().all(|x| x.abs() < 1e-17) {
            break;
        }
        // forward-difference Jacobian, normal equations
        let mut jac = vec![vec![0.0; n]; r.len()];
        for c in 0..n {
            let h = 1e-7 * params[c].abs().max(1e-3);
            let mut p = params.clone();
            p[c] += h;
            let rp = residual(&p);
            for (row, (a, b)) in jac.iter_mut().zip(rp.iter().zip(&r)) {
                row[c] = (a - b) / h;
            }
        }
        let mut ata = vec![vec![0.0; n]; n];
        let mut atr = vec![0.0; n];
        for (row, ri) in jac.iter().zip(&r) {
            for a in 0..n {
                atr[a] += row[a] * ri;
                for b in 0..n {
                    ata[a][b] += row[a] * row[b];
                }
            }
        }
        let Some(step) = solve_dense(ata, atr) else { break };
        for (p, s) in params.iter_mut().zip(step) {
            *p -= s;
        }
    }
    let (points, weights) = expand(rule.orbits, &params);
    TriangleRule {
        points,
        weights,
        degree: rule.degree,
    }
}

/// Gaussian elimination with partial pivoting for small dense systems.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let (top, bottom) = a.split_at_mut(row);
                for (x, y) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= f * y;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Number of halvings used toward a singular endpoint. With 16-point Gauss
/// pieces this integrates `s^{-1/4}` to ~1e-9 relative accuracy.
pub const SINGULAR_GRADING_LEVELS: usize = 30;

/// Composite rule on `[0, 1]` graded geometrically toward the end(s) where the
/// integrand may be singular: `levels` sub-intervals with ratio ½ per flagged
/// end (each half when both ends are flagged), each carrying an `npts`-point
/// Gauss rule.
pub fn graded_interval(npts: usize, levels: usize, at_start: bool, at_end: bool) -> IntervalRule {
    let base = interval_rule(npts.clamp(1, MAX_INTERVAL_POINTS));
    if !at_start && !at_end {
        return base.clone();
    }
    let mut breaks = Vec::new();
    match (at_start, at_end) {
        (true, false) => {
            breaks.push(0.0);
            breaks.extend((0..levels).rev().map(|k| 0.5f64.powi(k as i32)));
            // yields 0, 2^-(levels-1), ..., 1/2, 1
        }
        (false, true) => {
            breaks.push(0.0);
            breaks.extend((1..levels).map(|k| 1.0 - 0.5f64.powi(k as i32)));
            breaks.push(1.0);
        }
        _ => {
            breaks.push(0.0);
            breaks.extend((0..levels).rev().map(|k| 0.5 * 0.5f64.powi(k as i32)));
            breaks.extend((1..levels).map(|k| 1.0 - 0.5 * 0.5f64.powi(k as i32)));
            breaks.push(1.0);
        }
    }
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-300);
    let mut points = Vec::with_capacity(base.len() * (breaks.len() - 1));
    let mut weights = Vec::with_capacity(points.capacity());
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (&t, &wt) in base.points.iter().zip(&base.weights) {
            points.push(a + (b - a) * t);
            weights.push((b - a) * wt);
        }
    }
    IntervalRule {
        points,
        weights,
        degree: base.degree,
    }
}
