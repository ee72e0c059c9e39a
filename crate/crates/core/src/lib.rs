//! Topological optimal transport between measure topological networks.
//!
//! A network couples a metric measure space (points, affinity, mass) with a
//! persistence diagram whose features are tied back to the points through an
//! incidence matrix. This crate builds such networks from point clouds, solves
//! the coupled point/feature transport problem and interpolates along the
//! resulting geodesic. It needs only `alloc`.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
mod error;
pub mod geodesic;
pub mod geometry;
pub mod network;
pub mod ot;
pub mod persistence;
pub mod tpot;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
