//! Toric dimensional analysis and Newton-Puiseux expansions.
//!
//! The pipeline runs from an equation with dimensioned variables and
//! constants to dimensionless groups, then to Newton polytopes, facet
//! equations and fractional power series solutions.

pub mod diffnp;
pub mod dimanal;
pub mod error;
pub mod exactmath;
pub mod frontend;
pub mod groebner;
pub mod npexpand;
pub mod poly;
pub mod polytope;

pub use error::{Error, Result};
pub use frontend::run_command;
