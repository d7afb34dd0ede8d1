//! Tube MPC with an online-adapted deep feature network for matched
//! uncertainty, together with numerical stability diagnostics.

// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mpc;
pub mod network;
pub mod ocp;
pub mod plant;
pub mod rng;
pub mod trainer;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
