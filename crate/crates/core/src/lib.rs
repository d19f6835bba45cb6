#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod besicovitch;
pub mod covering;
pub mod error;
pub mod measure;
pub mod metric;
pub mod packing;
pub mod premeasure;
pub mod quadrature;
pub mod region;
pub mod report;
pub mod scenario;
pub mod scene;
pub mod solver;

pub use error::{Error, Result};
