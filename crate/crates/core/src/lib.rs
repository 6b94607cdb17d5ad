//! Numerical and exact checks of curvature identities on Kähler surfaces
//! and their Einstein–Maxwell deformations.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod chart_geometry;
pub mod cohomology;
pub mod conventions;
pub mod error;
pub mod expr;
pub mod form_algebra;
pub mod functionals;
pub mod geometry;
pub mod jet;
pub mod kahler_maxwell;
pub mod quadrature;
pub mod tolerances;

pub use error::{CohomologyError, ExprError, GeometryError};
