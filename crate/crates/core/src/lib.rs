pub mod bosonic;
pub mod channel;
pub mod cli;
pub mod decoder;
pub mod error;
pub mod fuchs_caves;
pub mod linalg;
pub mod polar;
pub mod random;
pub mod rng;
pub mod small_codes;

pub use error::{Error, ErrorCategory, Result};
