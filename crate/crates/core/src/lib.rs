//! Scale-free disturbance-suppression analysis for mass chains.
//!
//! A chain of `N` identical masses coupled by identical impedances, driven at
//! one end, has a first-intermass-displacement transfer function `F_N(s)`
//! generated by the Möbius recursion `F_{N+1} = (F_N + h) / (F_N + h + 1)`.
//! This crate evaluates that family pointwise, bounds it uniformly in `N`
//! through the canonical-form bound `f(z)`, measures how tight the bound is
//! with the lower bound `g_n(z)`, and simulates the matching bidirectional
//! vehicle platoon.

pub mod atlas;
pub mod bound;
pub mod chain;
pub mod design;
pub mod error;
pub mod platoon;
pub mod ratfun;
pub mod serde_ext;

pub use error::{Error, ErrorKind, Result};
pub use ratfun::{ExtendedComplex, Polynomial, RationalFunction};

/// Toolkit version reported by the CLI and the service.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
