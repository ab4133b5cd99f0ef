//! Exact and certified computations around rigidity sequences and
//! sequences of non-recurrence for measure-preserving systems.
//!
//! The library is organised by subject:
//!
//! - [`sequences`]: increasing big-integer sequences, densities, finite sums, growth reports.
//! - [`obstruct`]: finite obstructions (linear forms, Weyl sums, gap divergence, sumsets).
//! - [`measures`]: circle measures with certified Fourier coefficients.
//! - [`rankone`]: cutting-and-stacking towers, Chacon words, non-recurrent sets.
//! - [`rotation`]: continued fractions and constructive sequences for rotations.
//! - [`odometer`]: mixed-radix odometers, characters and cocycles.
//! - [`analysis`]: JSON configs, reports and file emission.
//!
//! Runnable walkthroughs live in `crates/core/examples/`.

pub mod analysis;
pub mod arith;
pub mod error;
pub mod measures;
pub mod obstruct;
pub mod odometer;
pub mod rankone;
pub mod rotation;
pub mod sequences;

pub use error::{Error, Result};
