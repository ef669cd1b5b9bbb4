//! Poincaré indices of planar singularities and the index theorem on closed
//! surfaces.
//!
//! - [`field`], [`poly`], [`catalog`]: polynomial vector fields, line-field
//!   models and a catalog of standard singularities.
//! - [`winding`]: the index as total turning along a circle.
//! - [`tangency`]: internal/external tangency census, the tangency and
//!   corner-count index formulas, surgery replay, the loop-free bound.
//! - [`surface`]: closed triangulated surfaces and two checks that indices
//!   sum to the Euler characteristic.
//! - [`lift`]: the orientation double cover of a line field.
//! - [`obstruction`]: Euler-characteristic obstruction for bagpipe surfaces.
//!
//! Heavy sampling loops go through [`exec::Exec`], parallel with the
//! `parallel` feature and sequential otherwise, with identical results.

// `!(x > tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod exec;
pub mod field;
pub mod half;
pub mod lift;
pub mod obstruction;
pub mod poly;
pub mod surface;
pub mod tangency;
pub mod winding;

pub use catalog::{catalog_all, catalog_get, CatalogEntry, CatalogError};
pub use exec::Exec;
pub use field::{Circle, DirectionField, FieldError, FieldFile, FieldKind, PlaneField, PolyField};
pub use half::HalfIndex;
pub use poly::{parse_polynomial, PolyError, PolyExpr};
pub use winding::{winding_index, WindingError, WindingOptions, WindingResult};
