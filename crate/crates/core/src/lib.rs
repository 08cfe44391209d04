//! Monte Carlo simulator for the degree-dependent threshold model of binary
//! opinion dynamics on directed configuration-model multigraphs.
//!
//! The pipeline for a single realisation is
//!
//! 1. [`netgen`]: draw power-law degree targets for one side of the network
//!    and wire it against a fixed degree on the other side,
//! 2. [`thresholds`]: rank nodes by their degree on the power-law side
//!    (highest degree first by default) and give each rank group one of
//!    `n_th` evenly spaced thresholds in `[0.5, 1]`,
//! 3. [`dynamics`]: start from Bernoulli(`p`) opinions and apply random
//!    asynchronous threshold updates until no node can flip.
//!
//! [`experiments`] repeats that pipeline over parameter grids with
//! deterministic per-run random streams, and [`empirics`] holds the
//! follower/following cluster analysis with one-sided chi-square tests.

pub mod dynamics;
pub mod empirics;
mod error;
pub mod experiments;
pub mod netgen;
pub mod rng;
pub mod thresholds;

pub use dynamics::{
    flip_eligible, init_opinions, run_to_fixation, weighted_in_average, Dynamics, OpinionState,
    RunResult, StepOutcome,
};
pub use error::{Error, Result};
pub use experiments::{
    average_opinion, emit_results, read_results, run_sweep, write_results, ExperimentPlan, Regime,
    SweepConfig, SweepPoint, SweepResult,
};
pub use netgen::{build_network, network_stats, sample_degree_targets, DegreeTargets, Network, Side};
pub use thresholds::{assign_thresholds, rank_by_degree, RankOrder, Threshold, ThresholdAssignment};
