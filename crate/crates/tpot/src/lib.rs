//! File formats, configuration, example generators and the command pipeline
//! around [`tpot_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod datasets;
mod error;
pub mod formats;
pub mod generators;
pub mod io;
pub mod pipeline;

pub use error::{AppError, Result};
