//! Local Cut Lemma toolkit: cut-condition checking on multidigraphs, exact and
//! Monte Carlo probabilities on finite product spaces, the family and
//! lopsided-LLL specialisations, threshold solvers for the classical
//! applications, choice-function certificates and randomized samplers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod choice;
pub mod digraph;
pub mod engine;
pub mod error;
pub mod exec;
pub mod family;
pub mod lll;
pub mod probability;
pub mod samplers;
pub mod structures;
pub mod thresholds;

pub use error::{Error, Result};
pub use exec::Execution;
