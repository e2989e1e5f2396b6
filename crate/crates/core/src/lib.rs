//! Riemannian min-max optimization.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod manifold;
pub mod par;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use manifold::{Manifold, ManifoldKind, Point, PointRecord, Tangent};
