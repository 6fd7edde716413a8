//! A two-body invariance laboratory.
//!
//! Point bodies interact through pairwise laws written in the canonical
//! `x_AB φ_e + v_AB φ_s + (x_AB × v_AB) φ_⊥` form. The crate integrates the
//! motion, changes observers through the Galilean group, implements the
//! bounded velocity-addition group with its proper time, and audits the
//! conservation and invariance statements that follow from these
//! structures.

// Negated float comparisons are used on purpose so that NaN fails a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod dynamics;
pub mod error;
pub mod forces;
pub mod frames;
pub mod nonlinear;
pub mod numeric;
pub mod output;
pub mod roots;
pub mod scenario;
pub mod types;

pub use error::Error;
pub use types::{cross, pair_state, Body, PairState, Vec3};
