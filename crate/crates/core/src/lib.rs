//! Certified numerics for two-dimensional lattice energies: Epstein zeta sums
//! with proven error radii, Lennard-Jones type energies, and a computer-assisted
//! check that the triangular lattice minimises the dilated energy among
//! unit-density lattices for a given exponent pair.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certifier;
pub mod energy;
pub mod error;
pub mod interval;
pub mod lattice;
pub mod report;
pub mod zeta;

pub use energy::{ExponentPair, LJParams};
pub use error::{Error, Result};
pub use lattice::DomainPoint;
pub use zeta::{CertifiedValue, TruncationSpec};
