//! Real-coefficient polynomials and rational functions in `s`, evaluated on
//! the extended imaginary axis.

mod extended;
mod polynomial;
mod rational;

pub use extended::ExtendedComplex;
pub use polynomial::Polynomial;
pub use rational::{h_from_controller, RationalFunction, REDUCE_TOL};
