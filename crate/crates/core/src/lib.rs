//! Fully discrete parametric finite element solver for a closed planar curve
//! moving by forced curve shortening flow, coupled to a reaction-diffusion
//! equation for a concentration living on the curve.
//!
//! The curve equation carries a tangential-motion parameter `alpha` in
//! `(0, 1]`; small values redistribute nodes towards equal spacing.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod linsolve;
pub mod manufactured;
pub mod output;
pub mod scenario;
pub mod stepper;

pub use error::{Error, Result};
