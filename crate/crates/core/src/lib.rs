//! Exact frequency-domain construction and verification of wavelet sets for
//! integer expansive dilations.

pub mod catalog;
pub mod classify;
pub mod cli;
pub mod construct;
pub mod error;
pub mod freqset;
pub mod lattice;
pub mod lp;
pub mod matrix;
pub mod rational;
pub mod render;
pub mod sampling;
pub mod tiling;
pub mod wavelet;

pub use error::{Error, Result};
