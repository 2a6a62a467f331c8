//! Exact sparse polynomial arithmetic over the rationals.
//!
//! Variables are named; `x` and `y` are the phase-space coordinates and every
//! other name is a parameter symbol. Monomials are ordered graded
//! lexicographically with `x < y < a < … < h < (others, alphabetical)`.

mod linsolve;
mod monomial;
mod parse;
mod poly;
mod ratfun;
mod var;

pub use linsolve::{determinant, mat_vec, null_vector, solve_linear_exact, LinearSolveError};
pub use monomial::Monomial;
pub use parse::{parse_expr, parse_rational};
pub use poly::{rational_from_f64, rational_to_f64, Poly};
pub use ratfun::{substitute_rational, RationalFunction};
pub use var::Var;

/// Arbitrary-precision rational, always in lowest terms.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable '{0}'")]
    Unbound(String),
    #[error("evaluation hit a pole")]
    Pole,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError {
            position,
            message: message.into(),
        }
    }
}
