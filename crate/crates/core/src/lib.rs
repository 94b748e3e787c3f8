// SPDX-License-Identifier: Apache-2.0

//! Verified repair of small imperative programs.
//!
//! A student program is aligned with a reference program through their
//! control-flow automata, every aligned edge is checked with an SMT solver, and
//! failing edges are repaired by counter-example guided synthesis over a finite
//! space of candidate expressions.

pub mod align;
pub mod cfa;
pub mod eval;
pub mod lang;
pub mod num;
pub mod repair;
pub mod solver;
pub mod vcgen;

pub use num::Real;

/// Rationals used for exact evaluation.
pub type Rational = ::num::rational::BigRational;

/// Interpreter value with binary floating point reals.
pub type Value = lang::Value<f64>;
/// Interpreter value with exact rational reals.
pub type ExactValue = lang::Value<Rational>;
/// Interpreter outcome with binary floating point reals.
pub type Outcome = lang::Outcome<f64>;
/// Interpreter outcome with exact rational reals.
pub type ExactOutcome = lang::Outcome<Rational>;
