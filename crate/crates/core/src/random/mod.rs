//! The Bernoulli-`p` ensemble over `S_{n+1}` and statistics of the
//! uncovered count `X`.
//!
//! # Concurrency
//!
//! Trials run in parallel on the current rayon pool over a shared read-only
//! [`CoverageGraph`](crate::CoverageGraph). Trial `t` of a run seeded with
//! `master_seed` draws only from [`trial_rng`]`(master_seed, t)`, and
//! per-trial results are collected in trial order before any aggregation, so
//! every report is bit-identical for any worker count.

mod experiment;
mod moments;
mod sample;
mod stats;
mod stream;

pub use experiment::{
    gap_experiment, mc_cover_probability, simulate_uncovered, threshold_sweep, CoverEstimate,
    GapOptions, GapReport, SweepReport, SweepRow,
};
pub use moments::{
    exact_mean, exact_variance, gap_p_paper, p_for_mean, stein_chen_bound, threshold_boundaries,
    SteinChen, ThresholdBoundaries,
};
pub use sample::{count_uncovered, sample_selection, sample_selection_with, SamplingMethod};
pub use stats::{poisson_pmf, poisson_support, tv_distance, wilson_interval, PoissonPmf, WILSON_Z95};
pub use stream::trial_rng;
