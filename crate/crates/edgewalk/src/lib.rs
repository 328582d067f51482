//! Simulation and verification toolkit for the one-dimensional self-repelling
//! random walk with directed edges.
//!
//! The crate is split by concern:
//!
//! * [`walk_core`]: the walk itself, its edge local-time ledger, stopping
//!   times, mesoscopic schedules and environment snapshots.
//! * [`chains`]: the auxiliary jump chains of the local-time imbalance, their
//!   invariant laws, total-variation utilities and coupling constructions.
//! * [`reflect`]: discrete and continuous Skorohod reflection, reflected and
//!   absorbed Brownian paths, and the limiting environment process.
//! * [`meso`]: the edge-state coarse-graining state machine and its
//!   exhaustive combinatorial checks.
//! * [`harness`]: Monte Carlo experiments and the statistical acceptance suite.
//!
//! Every random quantity is driven by [`rng::SimRng`] streams derived from a
//! master seed, so results are reproducible bit for bit.

pub mod chains;
pub mod error;
pub mod grid;
pub mod harness;
pub mod meso;
pub mod reflect;
pub mod rng;
pub mod walk_core;

pub use error::{Error, Result};
