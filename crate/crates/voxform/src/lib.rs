//! Exact-arithmetic engine for correlator forms of the rank-one free boson
//! vertex algebra, their sewing products and the associated cochain complex.

pub mod cli;
pub mod complex;
pub mod coords;
pub mod error;
pub mod forms;
pub mod pairing;
pub mod product;
pub mod report;
pub mod scalars;
pub mod sewing;
pub mod voa;

pub use error::{Result, VoxError};
