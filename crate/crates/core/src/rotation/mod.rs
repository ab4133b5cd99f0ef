//! Irrational rotations: continued fractions, syndetic returns, and constructive
//! rigidity sequences with prescribed density or growth.

pub mod cf;
pub mod growth;
pub mod slow;
pub mod syndetic;

pub use cf::{check_lac2, determinant_holds, ContinuedFraction, Convergent, Expansion};
pub use growth::{bounded_growth_rigidity_sequence, BoundedGrowthSequence, GrowthParams, GrowthRule};
pub use slow::{slow_rigidity_sequence, DensityRule, SlowCheckpoint, SlowRigiditySequence};
pub use syndetic::{syndeticity_constant, SyndeticCertificate};
