pub mod cli;
pub mod error;
pub mod field;
pub mod fks;
pub mod hashing;
pub mod protocol;
pub mod rs;

pub use error::{Error, Result};
