//! Runtime laboratory for the (1+1) evolutionary algorithm optimizing
//! LeadingOnes under prior noise.
//!
//! The crate covers the full loop from single runs to analysis:
//!
//! - packed bitstrings, seeded RNG streams, mutation operators, and noise
//!   models ([`bitcore`]),
//! - the algorithm itself under both parent-evaluation policies ([`ea`]),
//! - per-iteration traces, state classification, and phase segmentation
//!   ([`trace`]),
//! - exact expected runtimes for small sizes via Markov-chain hitting times
//!   ([`oracle`]),
//! - closed-form runtime guarantees and their feasibility frontier
//!   ([`bounds`]),
//! - sample summaries and Welch's t-test ([`stats`]),
//! - seeded experiment sweeps with CSV and JSON persistence ([`exp`]).
//!
//! Everything downstream of the random number generator is deterministic:
//! a trial is a pure function of its seed, and batches derive per-trial
//! seeds from the master seed and the trial coordinates, so sweeps are
//! reproducible at any parallelism level.
//!
//! The analysis layers (bounds, statistics, the dense solver) are generic
//! over the scalar type through [`num::Real`]. The aliases at the crate
//! root fix them to `f64`, which is what the simulator and CLI use.

pub mod bitcore;
pub mod bounds;
pub mod ea;
pub mod error;
pub mod exp;
pub mod linalg;
pub mod num;
pub mod oracle;
pub mod stats;
pub mod trace;

pub use bitcore::{derive_seed, BitString, MutationOp, NoiseModel, RngStream};
pub use ea::{run_trial, run_trial_with_sink, EvaluationPolicy, TrialResult};
pub use error::{Error, Result};

/// Double-precision [`bounds::BoundReport`].
pub type BoundReport = bounds::BoundReport<f64>;
/// Double-precision [`bounds::FrontierReport`].
pub type FrontierReport = bounds::FrontierReport<f64>;
/// Double-precision [`stats::SampleSummary`].
pub type SampleSummary = stats::SampleSummary<f64>;
/// Double-precision [`stats::WelchReport`].
pub type WelchReport = stats::WelchReport<f64>;
