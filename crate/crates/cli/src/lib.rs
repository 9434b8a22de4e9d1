//! Command-line driver: JSON configuration and curve files, geodesic
//! solves, distance matrices, energy diagnostics and SVG renders.

// Parameter checks read `!(x > 0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod files;
pub mod render;

pub use config::RunConfig;
pub use error::CliError;
