//! Detection of epistatic (interacting) SNP sets in case/control genotype
//! data.
//!
//! The crate scores candidate SNP sets with an MDR-style reward (correct
//! classification rate plus rule utility) and searches for high-reward sets
//! two ways: an exhaustive top-K scan over every k-combination, and a
//! one-step-MDP policy-gradient agent that learns which SNPs to select.
//! A penetrance-table simulator plants ground-truth interactions so
//! recovery is verifiable end to end.
//!
//! Numeric code is generic over the [`Real`] scalar ([`f32`] or [`f64`]);
//! the aliases below fix the default `f64` used by the CLI and reports.

pub mod action;
pub mod agent;
pub mod combin;
pub mod config;
pub mod data;
pub mod error;
pub mod exhaustive;
pub mod harness;
pub mod num;
pub mod reward;

pub use action::ActionSet;
pub use error::{Error, Result};
pub use num::Real;

/// Default scalar type.
pub type Scalar = f64;

pub type Reward = reward::RewardValue<Scalar>;
pub type TrainConfig = agent::TrainConfig<Scalar>;
pub type TrialReport = agent::TrialReport<Scalar>;
pub type SearchResult = exhaustive::SearchResult<Scalar>;
pub type TrialsReport = harness::TrialsReport<Scalar>;
pub type RecallReport = harness::RecallReport<Scalar>;
pub type ComparisonReport = harness::ComparisonReport<Scalar>;
