//! Learning categorical outcome distributions of symbolic stochastic actions
//! from two environments: a cheap *test* environment (a fast, imprecise
//! simulator) and a costly *target* environment.
//!
//! Actions are described by multi-environment rules ([`rules::MenidRule`]),
//! each carrying one count vector per environment. The [`learner`] decides at
//! every step whether an action's test-environment estimate is trustworthy
//! enough (via the Dirichlet-sampled error bound in [`estimation`]) or whether
//! it should first be exercised in the test environment, and fuses both count
//! sources with a decreasing-m-estimate when planning.

pub mod cli;
pub mod env;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod learner;
pub mod output;
pub mod par;
pub mod planning;
pub mod rng;
pub mod rules;

pub use error::{Error, Result};
