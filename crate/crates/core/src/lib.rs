//! Arithmetic entropy inequalities and discretised sum–product experiments.
//!
//! - [`expr`]: statement DSL (field expressions, entropy inequalities).
//! - [`dist`]: exact joint distributions over prime fields, entropies, falsification.
//! - [`prover`]: Shannon-cone prover with exact rational certificates.
//! - [`lab`]: grid sets, covering numbers, dyadic measures and experiments.

pub mod dist;
pub mod prover;
pub mod expr;
pub mod lab;

pub type Rational = num_rational::BigRational;
