//! Driver library behind the `dfx` binary: configuration, dense eigensolves, the
//! self-binding experiment and the acceptance property suites.

pub mod checks;
pub mod config;
pub mod eigen;
pub mod error;
pub mod experiment;

pub use error::{Error, Result};
