//! Randomized constructions: pick an initial random selection, then patch
//! whatever it leaves under-covered, lowest rank first.

use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bounds::{pigeonhole_lower, thm2_default_initial_size, thm3_default_draws};
use super::{check_lambda, coverage_counts, CoverCertificate, Method, Status};
use crate::bitmap::PermSetBitmap;
use crate::error::{Error, Result};
use crate::graph::CoverageGraph;

/// Alteration construction for a plain cover.
///
/// Draws `y` distinct members of `S_{n+1}` uniformly (default: the size that
/// minimizes the expected final count), then walks the patterns in rank
/// order and, for each one still uncovered, adds its lowest-rank cover.
pub fn alteration_cover(g: &CoverageGraph, seed: u64, y_override: Option<u64>) -> Result<CoverCertificate> {
    let start = Instant::now();
    let y = y_override.unwrap_or_else(|| thm2_default_initial_size(g.n()));
    if y > g.cover_count() as u64 {
        return Err(Error::range(format!(
            "initial size {y} exceeds |S_{}| = {}",
            g.n() + 1,
            g.cover_count()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected = PermSetBitmap::empty(g.n() + 1);
    for rho in index::sample(&mut rng, g.cover_count(), y as usize) {
        selected.insert(rho);
    }

    let mut covered: Vec<bool> = coverage_counts(g, &selected).iter().map(|&c| c > 0).collect();
    for pi in 0..g.pattern_count() {
        if covered[pi] {
            continue;
        }
        // Nothing covering pi is selected yet, so its first cover is free.
        let rho = g.covers(pi)[0] as usize;
        selected.insert(rho);
        for &other in g.patterns(rho) {
            covered[other as usize] = true;
        }
    }

    Ok(CoverCertificate {
        n: g.n(),
        lambda: 1,
        selected,
        status: Status::Feasible,
        lower_bound: pigeonhole_lower(g.n(), 1),
        method: Method::Alteration,
        seed: Some(seed),
        wall_time: start.elapsed(),
        draws: None,
        initial_size: Some(y),
    })
}

/// λ-cover construction, `λ ≥ 2`.
///
/// Draws `Y` members with replacement (duplicates collapse), then tops up
/// every pattern covered `j < λ` times with `λ − j` further distinct covers,
/// lowest rank first. Both `Y` and the distinct size are recorded.
pub fn lambda_cover(g: &CoverageGraph, lambda: u32, seed: u64) -> Result<CoverCertificate> {
    if lambda < 2 {
        return Err(Error::invalid(
            "λ-cover construction needs λ ≥ 2; use the alteration or greedy cover for λ = 1",
        ));
    }
    check_lambda(g, lambda)?;
    let draws = thm3_default_draws(g.n(), lambda)?;
    let start = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected = PermSetBitmap::empty(g.n() + 1);
    for _ in 0..draws {
        selected.insert(rng.random_range(0..g.cover_count()));
    }
    let initial = selected.count() as u64;

    let mut counts = coverage_counts(g, &selected);
    for pi in 0..g.pattern_count() {
        for &rho in g.covers(pi) {
            if counts[pi] >= lambda {
                break;
            }
            if selected.insert(rho as usize) {
                for &other in g.patterns(rho as usize) {
                    counts[other as usize] += 1;
                }
            }
        }
    }

    Ok(CoverCertificate {
        n: g.n(),
        lambda,
        selected,
        status: Status::Feasible,
        lower_bound: pigeonhole_lower(g.n(), lambda),
        method: Method::LambdaSample,
        seed: Some(seed),
        wall_time: start.elapsed(),
        draws: Some(draws),
        initial_size: Some(initial),
    })
}
