//! Construction-and-verification lab for a Read-type operator without
//! nontrivial invariant subspaces on Fréchet spaces without continuous norm.

pub mod analysis;
pub mod certificates;
pub mod construction;
pub mod error;
pub mod literal;
pub mod operator;
pub mod persist;
pub mod polynomial;
pub mod scalar;
pub mod schedule;
pub mod space;
pub mod suites;
pub mod vector;

pub use certificates::{CertificateReport, CheckEntry, Condition};
pub use construction::ConstructionState;
pub use error::{Error, Result};
pub use polynomial::Polynomial;
pub use scalar::{Rational, Real, Scalar, ScalarMode};
pub use space::{SpaceDescriptor, SpaceKind};
pub use vector::{FinVector, Frame};

#[cfg(test)]
mod proptests;
