//! Incompatibility witnesses for steering assemblages, measurements and
//! instruments, built from pairs of a convex functional and its concave roof.

pub mod error;
pub mod functionals;
pub mod linalg;
pub mod par;
pub mod quantum;
pub mod scenarios;
pub mod witness;

pub use error::{Error, Result};
