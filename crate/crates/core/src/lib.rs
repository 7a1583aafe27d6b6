//! Exact sumset computation over finite abelian groups and grid-discretized
//! tori, together with executable checks of the classical sumset inequalities
//! (Plünnecke–Ruzsa, Ruzsa triangle, Cauchy–Davenport) and Petridis subset
//! selection.
//!
//! Every verification path works with exact rationals. Floating point only
//! shows up in the `*_approx` fields of reports.

pub mod bitset;
pub mod config;
pub mod error;
pub mod grid;
pub mod groups;
pub mod rational;
pub mod search;
pub mod sets;
pub mod sumsets;
pub mod theorems;

mod ntt;

pub use config::Config;
pub use error::{Error, Result};
pub use groups::{FiniteAbelianGroup, GroupElement};
pub use rational::Rational;
pub use sets::{GroupSubset, SetSpec};
pub use sumsets::{iterated, ruzsa_distance, sumset, sumset_convolution, sumset_direct, Engine};
pub use theorems::{InequalityId, PetridisCertificate, PetridisMode, VerificationReport};

