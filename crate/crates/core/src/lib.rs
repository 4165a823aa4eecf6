#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod mild;
pub mod particle;
pub mod qz;

pub use error::{Error, Result};
