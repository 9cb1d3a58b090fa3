//! Adaptive finite elements for the Poisson problem with line-Dirac sources.
//!
//! The model is `-Δu = Σ g_l δ_{γ_l} (+ q)` on a polygon with homogeneous
//! Dirichlet data, where each `γ_l` is a straight fracture segment strictly
//! inside the domain. The crate provides:
//!
//! * [`geometry`]: points, segments, triangles and the clipping needed for
//!   non-conforming line sources and box-kernel regularization;
//! * [`mesh`]: conforming triangulations with fracture-tagged edges, red
//!   refinement and longest-edge bisection;
//! * [`quadrature`]: Gauss rules on intervals and triangles;
//! * [`fem`]: P1/P2 Lagrange spaces, assembly, solvers, prolongation, norms;
//! * [`estimator`]: the transmission-based residual estimator η, the
//!   regularized estimator ξ and edge oscillation;
//! * [`adapt`]: Dörfler marking and the adaptive loop;
//! * [`harness`]: scenarios, convergence studies and CSV/VTK export.

pub mod adapt;
pub mod error;
pub mod estimator;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod mesh;
pub mod par;
pub mod quadrature;

pub use error::{Error, Result};
