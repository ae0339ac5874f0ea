//! Exact symbolic engine for semisimple Poisson pencils of hydrodynamic type.

pub mod coeff;
pub mod cohomology;
pub mod error;
pub mod formal;
pub mod functionals;
pub mod jet;
pub mod linalg;
pub mod operators;
pub mod pencil;
pub mod poly;
pub mod rat;

pub use coeff::{Coeff, CoeffFn};
pub use error::{Error, Result};
pub use formal::FormalScalar;
pub use rat::Rat;
