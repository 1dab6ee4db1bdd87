//! Cache-aided private information retrieval with partially known uncoded
//! prefetching.
//!
//! A user holds a fraction `r` of every one of `K` messages, fetched in an
//! uncoded prefetching phase from `N` replicated, non-colluding databases;
//! database `n` knows exactly which bits it handed out and nothing else. The
//! crate provides:
//!
//! * [`bounds`]: exact achievable and converse download-cost curves, corner
//!   points, optimality regimes and gap analysis.
//! * [`plan`]: construction of prefetch assignments and GF(2) query plans
//!   for every corner, the `r = 0` / `r = 1` endpoints and memory-shared
//!   ratios in between, plus seeded relabeling and shuffling.
//! * [`sim`]: a two-phase session simulator with metered downloads and
//!   bit-exact decoding.
//! * [`verify`]: reliability, leak, side-information accounting, structural
//!   and statistical privacy checks.

pub mod bounds;
pub mod error;
pub mod params;
pub mod plan;
pub mod rational;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub use params::{PirParams, Scheme};
pub use rational::Rational;

/// Seed used by randomized entry points when the caller gives none.
pub const DEFAULT_SEED: u64 = 0x5eed_2018;
