// `!(x > y)` is used deliberately throughout so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod error;
pub mod finite_p;
pub mod lab;
pub mod limit;
pub mod numeric;
pub mod ode;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
