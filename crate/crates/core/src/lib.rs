//! Causal neighbor-dataset search for testing whether fairness practices are
//! locally robust.
//!
//! The pipeline: discover a CPDAG from tabular data ([`discovery`]), enumerate
//! its Markov equivalence class, fit a generalized-linear structural causal
//! model per member DAG ([`scm`]), generate neighbor datasets that pass an
//! in-distribution check ([`validator`]), and look for a pair of neighbors on
//! which a fairness property ([`search`]) evaluates differently.

#![allow(clippy::needless_range_loop)]

pub mod data;
pub mod discovery;
pub mod error;
pub mod fairness;
pub mod hp;
pub mod interventions;
pub mod learners;
pub mod report;
pub mod rng;
pub mod scm;
pub mod search;
pub mod validator;

pub use error::{Error, Result};
