//! Coverings of the symmetric group `S_n` by `(n+1)`-permutations.
//!
//! A set `A ⊆ S_{n+1}` covers `S_n` when every `π ∈ S_n` appears as an
//! order-isomorphic subsequence of some member of `A`. This crate provides:
//!
//! * [`perm`]: ranking, standardization, deletions and the one-letter
//!   containment test;
//! * [`graph`] and [`audit`]: the materialized incidence between `S_n` and
//!   `S_{n+1}`, joint-coverage queries and the pairwise overlap audit;
//! * [`construct`]: greedy, alteration and λ-cover constructions, an exact
//!   branch-and-bound solver and the analytic bounds;
//! * [`random`]: the Bernoulli-`p` ensemble, Monte Carlo coverage
//!   estimates, exact moments of the uncovered count and Poisson diagnostics;
//! * [`cache`]: an on-disk certificate cache that revalidates on load.

pub mod audit;
pub mod bitmap;
pub mod cache;
pub mod construct;
mod error;
pub mod graph;
pub mod perm;
pub mod random;

pub use audit::{lemma5_audit, lemma5_audit_sampled, JointReport, SwapInterpretation};
pub use bitmap::PermSetBitmap;
pub use construct::{
    alteration_cover, exact_min_cover, greedy_cover, lambda_cover, verify_cover, BoundTable,
    CoverCertificate, Method, Status, Verification,
};
pub use error::{Error, Result};
pub use graph::CoverageGraph;
pub use perm::{factorial, PermRank, Permutation, Symmetry};

/// Size limits for the enumeration-heavy features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest pattern length `n` for which a [`CoverageGraph`] is built.
    /// The graph enumerates all of `S_{n+1}`.
    pub max_n: usize,
    /// Largest `n` for exhaustive pair computations (overlap audit, exact
    /// variance of the uncovered count).
    pub pair_max_n: usize,
}

impl Limits {
    pub const DEFAULT_MAX_N: usize = 8;
    pub const DEFAULT_PAIR_MAX_N: usize = 7;
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_n: Self::DEFAULT_MAX_N,
            pair_max_n: Self::DEFAULT_PAIR_MAX_N,
        }
    }
}
