//! Exact Poincaré–Lyapunov constants and center certificates for planar
//! polynomial systems with a linear center, with a floating-point orbit layer
//! for numeric confirmation.

pub mod cli;
pub mod lyapunov;
pub mod orbits;
pub mod qpoly;
pub mod quintic;
pub mod structure;

pub use lyapunov::{PlanarSystem, Sign};
pub use qpoly::{Poly, Rational, RationalFunction, Var};
