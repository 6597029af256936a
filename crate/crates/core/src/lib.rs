//! Cramér-Rao bounds for locating a Hertzian dipole from the electric field
//! observed on a square surface, and maximum-likelihood estimators to
//! compare against them.

pub mod cpl;
pub mod em_field;
pub mod error;
pub mod fim;
pub mod mle;
pub mod optim;
pub mod quadrature;
pub mod units;

pub use error::{Error, Result};
