use rand::seq::index;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::bitmap::PermSetBitmap;
use crate::error::{Error, Result};
use crate::graph::CoverageGraph;
use crate::perm::factorial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMethod {
    /// Draw `K ~ Binomial((n+1)!, p)`, then a uniform `K`-subset. Same law as
    /// independent coin flips, at a cost proportional to `K`.
    #[default]
    BinomialSubset,
    /// One independent coin flip per member of `S_{n+1}`.
    Bernoulli,
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} not in [0, 1]")));
    }
    Ok(())
}

/// Random subset of `S_{n+1}` containing each member independently with
/// probability `p`.
pub fn sample_selection<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<PermSetBitmap> {
    sample_selection_with(n, p, rng, SamplingMethod::BinomialSubset)
}

pub fn sample_selection_with<R: Rng + ?Sized>(
    n: usize,
    p: f64,
    rng: &mut R,
    method: SamplingMethod,
) -> Result<PermSetBitmap> {
    check_probability(p)?;
    let level = n + 1;
    let universe = factorial(level) as usize;
    if p == 0.0 {
        return Ok(PermSetBitmap::empty(level));
    }
    if p == 1.0 {
        return Ok(PermSetBitmap::full(level));
    }
    let mut sel = PermSetBitmap::empty(level);
    match method {
        SamplingMethod::BinomialSubset => {
            let k = Binomial::new(universe as u64, p)
                .map_err(|e| Error::invalid(e.to_string()))?
                .sample(rng) as usize;
            for r in index::sample(rng, universe, k) {
                sel.insert(r);
            }
        }
        SamplingMethod::Bernoulli => {
            for r in 0..universe {
                if rng.random_bool(p) {
                    sel.insert(r);
                }
            }
        }
    }
    Ok(sel)
}

/// Number of patterns in `S_n` contained in no selected permutation.
pub fn count_uncovered(g: &CoverageGraph, sel: &PermSetBitmap) -> Result<u64> {
    sel.check_level(g.n() + 1)?;
    let mut covered = PermSetBitmap::empty(g.n());
    for rho in sel.iter() {
        for &pi in g.patterns(rho) {
            covered.insert(pi as usize);
        }
    }
    Ok((g.pattern_count() - covered.count()) as u64)
}
