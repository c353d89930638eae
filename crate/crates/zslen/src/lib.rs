//! Exact arithmetic of zero-sum sequences over finite abelian groups:
//! atoms (minimal zero-sum sequences), Davenport constants, sets of
//! factorization lengths, and structural classification of those sets as
//! (almost) arithmetical progressions and multiprogressions.
//!
//! Everything here is exact: lengths and distances are integers, elasticities
//! are rationals, and search spaces are enumerated completely under explicit
//! bounds rather than sampled.

pub mod atoms;
pub mod catalog;
pub mod error;
pub mod group;
pub mod lengths;
pub mod seq;
pub mod structure;

pub use atoms::{enumerate_atoms, AtomSet};
pub use catalog::{
    compare_systems, family_generator, system_enumerate, system_membership_oracle, verify_suite,
    SuiteConfig, SuiteReport,
};
pub use error::{Error, Result};
pub use group::{GroupElement, GroupInvariants, GroupSpec};
pub use lengths::{set_of_lengths, Factorization, LengthSet};
pub use seq::Sequence;
pub use structure::{classify, Period, ProgressionForm};
