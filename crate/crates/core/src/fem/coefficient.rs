use std::fmt;
use std::sync::Arc;

use crate::geometry::{Point2, Segment};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn coord(self, p: Point2) -> f64 {
        match self {
            Axis::X => p.x,
            Axis::Y => p.y,
        }
    }
}

/// Fracture source density `g_l`, evaluated at points of the fracture.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    /// `((s − a)(b − s))^r0 + r1` with `s` the chosen coordinate.
    PowerLaw {
        axis: Axis,
        a: f64,
        b: f64,
        r0: f64,
        r1: f64,
    },
    /// Piecewise-linear interpolation of `(s, value)` samples, constant
    /// beyond the first and last sample.
    Tabulated {
        axis: Axis,
        samples: Vec<(f64, f64)>,
    },
}

impl Coefficient {
    pub fn powerlaw(axis: Axis, a: f64, b: f64, r0: f64, r1: f64) -> Result<Self> {
        if ![a, b, r0, r1].iter().all(|v| v.is_finite()) || a >= b {
            return Err(Error::invalid_argument("powerlaw needs finite parameters with a < b"));
        }
        if r0 <= -0.5 {
            return Err(Error::invalid_argument(format!(
                "powerlaw exponent {r0} is not square-integrable (needs r0 > -1/2)"
            )));
        }
        Ok(Coefficient::PowerLaw { axis, a, b, r0, r1 })
    }

    pub fn tabulated(axis: Axis, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid_argument(
                "tabulated coefficient needs at least 2 samples",
            ));
        }
        if samples.iter().any(|(s, v)| !s.is_finite() || !v.is_finite()) || samples.windows(2).any(|w| w[1].0 <= w[0].0)
        {
            return Err(Error::invalid_argument(
                "tabulated samples must be finite with strictly increasing abscissae",
            ));
        }
        Ok(Coefficient::Tabulated { axis, samples })
    }

    pub fn eval(&self, p: Point2) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::PowerLaw { axis, a, b, r0, r1 } => {
                let s = axis.coord(p);
                let w = ((s - a) * (b - s)).max(0.0);
                w.powf(*r0) + r1
            }
            Coefficient::Tabulated { axis, samples } => {
                let s = axis.coord(p);
                let k = samples.partition_point(|(x, _)| *x <= s);
                if k == 0 {
                    samples[0].1
                } else if k == samples.len() {
                    samples[k - 1].1
                } else {
                    let ((x0, y0), (x1, y1)) = (samples[k - 1], samples[k]);
                    y0 + (y1 - y0) * (s - x0) / (x1 - x0)
                }
            }
        }
    }

    /// Value at `seg.point_at(s)`. Distances to a power-law root at an end of
    /// `seg` are taken from the parameter, so nodes of a graded rule on a
    /// very short piece never round onto the root.
    pub fn eval_on(&self, seg: &Segment, s: f64) -> f64 {
        match self {
            Coefficient::PowerLaw { axis, a, b, r0, r1 } => {
                let (xa, xb) = (axis.coord(seg.a), axis.coord(seg.b));
                let d = xb - xa;
                let offset = |c: f64| {
                    if (xa - c).abs() <= 1e-12 {
                        s * d
                    } else if (xb - c).abs() <= 1e-12 {
                        (s - 1.0) * d
                    } else {
                        xa + s * d - c
                    }
                };
                let w = (-offset(*a) * offset(*b)).max(0.0);
                w.powf(*r0) + r1
            }
            _ => self.eval(seg.point_at(s)),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Constant(c) => *c == 0.0,
            Coefficient::Tabulated { samples, .. } => samples.iter().all(|(_, v)| *v == 0.0),
            Coefficient::PowerLaw { .. } => false,
        }
    }

    /// Coordinates where the density is not smooth (power-law roots with a
    /// non-integer or negative exponent); quadrature is graded toward them.
    pub fn singular_coords(&self) -> Option<(Axis, [f64; 2])> {
        match self {
            Coefficient::PowerLaw { axis, a, b, r0, .. } if !(*r0 >= 0.0 && r0.fract() == 0.0) => {
                Some((*axis, [*a, *b]))
            }
            _ => None,
        }
    }

    /// Whether `p` sits on one of [`Self::singular_coords`].
    pub fn is_singular_at(&self, p: Point2) -> bool {
        self.singular_coords()
            .map(|(axis, c)| c.iter().any(|&c| (axis.coord(p) - c).abs() <= 1e-12))
            .unwrap_or(false)
    }
}

/// Scalar field on the domain, e.g. the area source `q`.
#[derive(Clone)]
pub enum ScalarFn {
    Constant(f64),
    /// `amplitude · sin(πx) sin(πy)`.
    SinSin {
        amplitude: f64,
    },
    Custom(Arc<dyn Fn(Point2) -> f64 + Send + Sync>),
}

impl ScalarFn {
    pub fn eval(&self, p: Point2) -> f64 {
        match self {
            ScalarFn::Constant(c) => *c,
            ScalarFn::SinSin { amplitude } => {
                amplitude * (std::f64::consts::PI * p.x).sin() * (std::f64::consts::PI * p.y).sin()
            }
            ScalarFn::Custom(f) => f(p),
        }
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Constant(c) => write!(f, "Constant({c})"),
            ScalarFn::SinSin { amplitude } => write!(f, "SinSin {{ amplitude: {amplitude} }}"),
            ScalarFn::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powerlaw_values() {
        let g = Coefficient::powerlaw(Axis::X, 0.25, 0.75, 0.0, 1.0).unwrap();
        assert_eq!(g.eval(Point2::new(0.4, 0.5)), 2.0);
        assert!(g.singular_coords().is_none());
        let g = Coefficient::powerlaw(Axis::X, 0.25, 0.75, 0.5, 0.0).unwrap();
        assert!((g.eval(Point2::new(0.5, 0.5)) - 0.25).abs() < 1e-15);
        assert!(g.is_singular_at(Point2::new(0.75, 0.5)));
        assert!(Coefficient::powerlaw(Axis::X, 0.25, 0.75, -0.5, 0.0).is_err());
    }

    #[test]
    fn tabulated_interpolates() {
        let g = Coefficient::tabulated(Axis::Y, vec![(0.0, 1.0), (1.0, 3.0)]).unwrap();
        assert_eq!(g.eval(Point2::new(9.0, 0.5)), 2.0);
        assert_eq!(g.eval(Point2::new(0.0, 2.0)), 3.0);
        assert!(Coefficient::tabulated(Axis::Y, vec![(1.0, 1.0), (0.0, 3.0)]).is_err());
    }
}
