pub mod algebra;
pub mod cli;
pub mod coeff;
pub mod error;
pub mod functional;
pub mod operators;
pub mod pencil;
pub mod sample;
pub mod spectral;

pub use algebra::{Monomial, ThetaPoly};
pub use coeff::{CoeffExpr, Rational};
pub use error::{Error, Result};
