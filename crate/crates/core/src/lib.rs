//! Exact state-vector tools for checking quantum communication/query tradeoffs.

pub mod comm;
pub mod commands;
pub mod entropy;
pub mod error;
pub mod ftab;
pub mod oip;
pub mod osearch;
pub mod qsim;
pub mod report;
pub mod transmit;

pub use error::{Error, Result};
