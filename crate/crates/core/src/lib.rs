//! Numerical laboratory for O(n)×O(n)-invariant mean curvature flow near the
//! Simons cone.
//!
//! A hypersurface `Σ^{2n-1} ⊂ ℝ^{2n}` invariant under `O(n)×O(n)` is described
//! by its profile function `Q(r)`, the graph `|y| = Q(|x|)`. The modules here
//! cover the curvature calculus for such profiles, the smooth minimal surface
//! asymptotic to the cone `Q = r`, the Jacobi operator on that surface, the
//! Bessel heat kernel of the linearised flow on the cone, the profile flow
//! itself, and the explicit barrier functions used near the singularity.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barriers;
pub mod bessel;
pub mod cone_heat;
pub mod error;
pub mod exec;
pub mod fit;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod interp;
pub mod jacobi;
pub mod linalg;
pub mod minimal_surface;
pub mod ode;
pub mod params;
pub mod quadrature;
pub mod rescale;
pub mod stencil;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use params::Params;
