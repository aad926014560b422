//! Numerical workbench for the subtraction treatment of field-theory divergences.
//!
//! * [`laurent`] — truncated Laurent series in `ε = n − 4` and the minimal-subtraction split.
//! * [`graphs`] — tadpole, fish, double scoop and setting-sun graphs of λφ⁴.
//! * [`renorm`] — physical quantities, pole-cancellation reports and renormalization-group flow.
//! * [`curved`] — DeWitt–Schwinger coefficients and renormalized gravitational constants.
//! * [`hadamard`] — σ-expansion of the DeWitt–Schwinger–Feynman function and its split.
//! * [`functional`] — diagonal-plus-regular kernel pairings and graded pairings.
//! * [`cli`] — the `subtraction` command-line front end.

// guards are written `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curved;
pub mod error;
pub mod functional;
pub mod graphs;
pub mod hadamard;
pub mod laurent;
pub mod quad;
pub mod renorm;

pub use error::{Error, ErrorClass, Result};
pub use laurent::{EpsilonSeries, SplitValue};
