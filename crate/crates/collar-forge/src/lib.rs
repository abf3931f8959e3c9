//! collar-forge: numerical construction and certification of (bi)collars
//! of closed subsets of R^n from finite families of local collars.

pub mod bicollar;
pub mod charts;
pub mod collar;
pub mod cover;
pub mod curve;
pub mod error;
pub mod estimator;
pub mod fixtures;
pub mod metric;
pub mod net;
pub mod pou;
pub mod restrict;
pub mod sampling;

pub use error::{CollarError, Result};
