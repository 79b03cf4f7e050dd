//! Lattice walks with semipermeable axis barriers.
//!
//! Exact series arithmetic, a brute-force walk enumerator, kernel-method
//! closed forms, recurrence guessing and numeric asymptotics.

pub mod asymptotics;
pub mod cache;
pub mod checks;
pub mod dense;
pub mod enumerate;
pub mod error;
pub mod group;
pub mod guess;
pub mod kernel;
pub mod laurent;
pub mod model;
pub mod ring;
pub mod series;

pub use error::{Error, Result};
pub use group::{orbit_sum, GroupElement};
pub use laurent::{Axis, LaurentPoly2, SectionSpec, SignClass};
pub use ring::{CoefficientRing, Integers, PrimeField, Rationals, Ring};
pub use series::TSeries;
