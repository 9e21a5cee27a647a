//! Certified construction of badly approximable points on nondegenerate curves.

pub mod arith;
pub mod curves;
pub mod engine;
pub mod error;
pub mod exterior;
pub mod flows;
pub mod fractal;
pub mod qnd;

pub use error::{Error, Result};
