//! Command line, report formats, matrix cache and theorem checks on top of
//! `koszul-core`.

pub mod cache;
pub mod checks;
pub mod cli;
pub mod compute;
pub mod config;
pub mod error;
pub mod presets;
pub mod ranker;
pub mod report;

pub use error::{HarnessError, Result};
