//! Exact Koszul cohomology of curves over prime fields.
//!
//! The crate is `no_std` (with `alloc`). File formats, the command line and
//! wall-clock timing live in the companion harness crate.

#![no_std]

extern crate alloc;

pub mod ample;
pub mod curve;
pub mod error;
pub mod field;
pub mod koszul;
pub mod linalg;
pub mod poly;
pub mod sections;
pub mod series;
pub mod sparse;

pub use error::{Error, Result};
pub use field::{FieldConfig, Fp, PrimeField};
