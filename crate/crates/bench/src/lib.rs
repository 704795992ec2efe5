//! Fixtures shared by the benchmarks.

use permcover_core::random::{sample_selection, trial_rng};
use permcover_core::{CoverageGraph, PermSetBitmap};

/// A reproducible Bernoulli-`p` selection for benchmarking `count_uncovered`.
pub fn fixed_selection(g: &CoverageGraph, p: f64, seed: u64) -> PermSetBitmap {
    let mut rng = trial_rng(seed, 0);
    sample_selection(g.n(), p, &mut rng).expect("p in [0, 1]")
}
