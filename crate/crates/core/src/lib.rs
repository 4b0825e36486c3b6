//! Non-commutative Carathéodory and Carathéodory–Fejér interpolation.
//!
//! Words over the free semigroup index matrix coefficients of non-commutative
//! polynomials. Feasibility of an interpolation problem is tested by
//! evaluating on contractive matrix tuples that are jointly nilpotent with
//! respect to the admissible index set: a violation on any such tuple is an
//! exact infeasibility certificate, while the absence of violations over a
//! sample budget is only evidence of feasibility.

pub mod cli;
pub mod criteria;
pub mod error;
pub mod instance;
pub mod json;
pub mod linalg;
pub mod ncpoly;
pub mod realization;
pub mod repro;
pub mod tuples;
pub mod words;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
pub use ncpoly::{HermitianData, NcPoly};
pub use tuples::MatrixTuple;
pub use words::{AdmissibleSet, Word};
