//! Barycenters of weighted point sets in CAT(k) spaces, with numerical
//! checks of their stability and approximation properties.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod gh;
pub mod isometry;
pub mod model;
pub mod par;
pub mod problem;
pub mod report;
pub mod retraction;
pub mod solver;
pub mod space;
pub mod stability;
pub mod suites;

pub use error::{Error, Result};
