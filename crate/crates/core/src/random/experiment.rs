//! Monte Carlo experiments over the Bernoulli-`p` ensemble.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::moments::{exact_mean, stein_chen_bound, threshold_boundaries, ThresholdBoundaries};
use super::sample::{check_probability, count_uncovered, sample_selection};
use super::stats::{poisson_pmf, poisson_support, wilson_interval, WILSON_Z95};
use super::stream::trial_rng;
use crate::error::{Error, Result};
use crate::graph::CoverageGraph;
use crate::Limits;

/// Below this many trials a gap report is still produced but flagged.
pub const MIN_TV_TRIALS: u64 = 1000;

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    Ok(())
}

/// Uncovered counts for trials `offset..offset+trials`, in trial order.
pub fn simulate_uncovered(
    g: &CoverageGraph,
    p: f64,
    trials: u64,
    master_seed: u64,
    offset: u64,
) -> Result<Vec<u64>> {
    check_probability(p)?;
    check_trials(trials)?;
    (offset..offset + trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t);
            let sel = sample_selection(g.n(), p, &mut rng)?;
            count_uncovered(g, &sel)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverEstimate {
    pub covers: u64,
    pub trials: u64,
    pub phat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl CoverEstimate {
    fn from_counts(xs: &[u64]) -> Result<Self> {
        let covers = xs.iter().filter(|&&x| x == 0).count() as u64;
        let trials = xs.len() as u64;
        let (ci_lo, ci_hi) = wilson_interval(covers, trials, WILSON_Z95)?;
        Ok(CoverEstimate {
            covers,
            trials,
            phat: covers as f64 / trials as f64,
            ci_lo,
            ci_hi,
        })
    }
}

/// Fraction of trials whose selection covers all of `S_n`, with a Wilson
/// 95% interval.
pub fn mc_cover_probability(g: &CoverageGraph, p: f64, trials: u64, master_seed: u64) -> Result<CoverEstimate> {
    CoverEstimate::from_counts(&simulate_uncovered(g, p, trials, master_seed, 0)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub covers: u64,
    pub trials: u64,
    pub phat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub lambda_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub n: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub rows: Vec<SweepRow>,
    /// Analytic boundaries at `ω = 1`, for reference (`None` for `n < 2`).
    pub boundaries: Option<ThresholdBoundaries>,
}

/// One coverage estimate per grid point. Point `i` uses trial indices
/// `i·trials .. (i+1)·trials`, so no two points share a stream.
pub fn threshold_sweep(g: &CoverageGraph, grid: &[f64], trials: u64, master_seed: u64) -> Result<SweepReport> {
    check_trials(trials)?;
    if grid.iter().any(|p| p.is_nan()) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("probability grid must be sorted ascending"));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &p) in grid.iter().enumerate() {
        let xs = simulate_uncovered(g, p, trials, master_seed, i as u64 * trials)?;
        let est = CoverEstimate::from_counts(&xs)?;
        rows.push(SweepRow {
            p,
            covers: est.covers,
            trials,
            phat: est.phat,
            ci_lo: est.ci_lo,
            ci_hi: est.ci_hi,
            lambda_exact: exact_mean(g.n(), p)?,
        });
    }
    Ok(SweepReport {
        n: g.n(),
        trials,
        master_seed,
        rows,
        boundaries: threshold_boundaries(g.n(), 1.0).ok(),
    })
}

#[derive(Debug, Clone, Default)]
pub struct GapOptions {
    /// The `K` that produced `p`, when it came from `gap_p_paper`.
    pub k_nominal: Option<f64>,
    /// The target mean that produced `p`, when it came from a root-solve.
    pub lambda_target: Option<f64>,
    pub limits: Limits,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub n: usize,
    pub p: f64,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(rename = "K_nominal")]
    pub k_nominal: Option<f64>,
    pub lambda_target: Option<f64>,
    pub lambda_exact: f64,
    /// Relative frequency of each observed `X = k`.
    pub empirical_pmf: BTreeMap<u64, f64>,
    pub counts: BTreeMap<u64, u64>,
    pub empirical_mean: f64,
    /// Unbiased sample variance (0 for a single trial).
    pub empirical_variance: f64,
    /// TV to `Poisson(lambda_exact)`, with the truncated Poisson tail added.
    pub tv_to_poisson: f64,
    /// `½·Σ_k √(p̂_k(1−p̂_k)/trials)`, a conservative scale for the
    /// Monte Carlo error in `tv_to_poisson`.
    pub tv_standard_error: f64,
    pub poisson_tail_mass: f64,
    pub cover_probability: CoverEstimate,
    /// `None` when the pair budget rules out the exact variance.
    pub stein_chen_bound: Option<f64>,
    pub stein_chen_raw: Option<f64>,
    pub exact_variance: Option<f64>,
    /// `lambda_exact / (√(2π)·e^{−K})`.
    pub ratio_to_sqrt2pi_exp_minus_k: Option<f64>,
    /// `lambda_exact / (√(2π)·e^{+K})`.
    pub ratio_to_sqrt2pi_exp_plus_k: Option<f64>,
    pub low_trials: bool,
    pub warnings: Vec<String>,
}

pub fn gap_experiment(
    g: &CoverageGraph,
    p: f64,
    trials: u64,
    master_seed: u64,
    opts: &GapOptions,
) -> Result<GapReport> {
    let xs = simulate_uncovered(g, p, trials, master_seed, 0)?;
    let lambda = exact_mean(g.n(), p)?;
    let mut warnings = Vec::new();

    let mut counts = BTreeMap::new();
    for &x in &xs {
        *counts.entry(x).or_insert(0u64) += 1;
    }
    let nt = trials as f64;
    let empirical_pmf: BTreeMap<u64, f64> = counts.iter().map(|(&k, &c)| (k, c as f64 / nt)).collect();
    let mean = xs.iter().map(|&x| x as f64).sum::<f64>() / nt;
    let variance = if trials > 1 {
        xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (nt - 1.0)
    } else {
        0.0
    };

    let max_k = *counts.keys().next_back().expect("at least one trial") as usize;
    let support = poisson_support(lambda).max(max_k + 1);
    let pois = poisson_pmf(lambda, support)?;
    let abs_diff: f64 = (0..support)
        .map(|k| (empirical_pmf.get(&(k as u64)).copied().unwrap_or(0.0) - pois.pmf[k]).abs())
        .sum();
    let tv = (0.5 * abs_diff + pois.tail).min(1.0);
    let tv_se = 0.5 * empirical_pmf.values().map(|&f| (f * (1.0 - f) / nt).sqrt()).sum::<f64>();

    let (stein_chen_bound, stein_chen_raw, exact_variance) = match stein_chen_bound(g, p, &opts.limits) {
        Ok(sc) => (Some(sc.bound), Some(sc.raw), Some(sc.variance)),
        Err(Error::ResourceLimit { .. }) => {
            warnings.push(format!(
                "exact variance skipped: n = {} exceeds the pair budget {}",
                g.n(),
                opts.limits.pair_max_n
            ));
            (None, None, None)
        }
        Err(e) => return Err(e),
    };

    let low_trials = trials < MIN_TV_TRIALS;
    if low_trials {
        warnings.push(format!("only {trials} trials; TV estimates below {MIN_TV_TRIALS} trials are noisy"));
    }

    let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
    Ok(GapReport {
        n: g.n(),
        p,
        trials,
        master_seed,
        k_nominal: opts.k_nominal,
        lambda_target: opts.lambda_target,
        lambda_exact: lambda,
        empirical_pmf,
        counts,
        empirical_mean: mean,
        empirical_variance: variance,
        tv_to_poisson: tv,
        tv_standard_error: tv_se,
        poisson_tail_mass: pois.tail,
        cover_probability: CoverEstimate::from_counts(&xs)?,
        stein_chen_bound,
        stein_chen_raw,
        exact_variance,
        ratio_to_sqrt2pi_exp_minus_k: opts.k_nominal.map(|k| lambda / (root_2pi * (-k).exp())),
        ratio_to_sqrt2pi_exp_plus_k: opts.k_nominal.map(|k| lambda / (root_2pi * k.exp())),
        low_trials,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes() {
        let g = CoverageGraph::build(3).unwrap();
        let one = mc_cover_probability(&g, 1.0, 50, 0).unwrap();
        assert_eq!(one.phat, 1.0);
        assert_eq!(one.covers, 50);
        let zero = mc_cover_probability(&g, 0.0, 50, 0).unwrap();
        assert_eq!(zero.phat, 0.0);
        let sweep = threshold_sweep(&g, &[0.0, 1.0], 20, 1).unwrap();
        assert_eq!(sweep.rows[0].phat, 0.0);
        assert_eq!(sweep.rows[1].phat, 1.0);
        assert!(threshold_sweep(&g, &[0.5, 0.1], 20, 1).is_err());
        assert!(mc_cover_probability(&g, 0.5, 0, 0).is_err());
    }

    #[test]
    fn gap_at_p_one_is_a_point_mass() {
        let g = CoverageGraph::build(3).unwrap();
        let r = gap_experiment(&g, 1.0, 100, 3, &GapOptions::default()).unwrap();
        assert_eq!(r.empirical_pmf.len(), 1);
        assert_eq!(r.empirical_pmf[&0], 1.0);
        assert_eq!(r.tv_to_poisson, 0.0);
        assert!(r.low_trials);
    }

    #[test]
    fn gap_report_invariants() {
        let g = CoverageGraph::build(4).unwrap();
        let opts = GapOptions { k_nominal: Some(0.0), ..GapOptions::default() };
        let r = gap_experiment(&g, 0.2, 2000, 9, &opts).unwrap();
        let total: f64 = r.empirical_pmf.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&r.tv_to_poisson));
        assert_eq!(r.counts.values().sum::<u64>(), 2000);
        assert!(r.stein_chen_bound.is_some());
        assert!(!r.low_trials);
        let ratio = r.ratio_to_sqrt2pi_exp_minus_k.unwrap();
        assert!((ratio * (2.0 * std::f64::consts::PI).sqrt() - r.lambda_exact).abs() < 1e-12);
    }

    #[test]
    fn gap_without_pair_budget_warns() {
        let g = CoverageGraph::build(4).unwrap();
        let opts = GapOptions {
            limits: Limits { pair_max_n: 3, ..Limits::default() },
            ..GapOptions::default()
        };
        let r = gap_experiment(&g, 0.2, 100, 9, &opts).unwrap();
        assert!(r.stein_chen_bound.is_none());
        assert_eq!(r.warnings.len(), 2);
    }

    #[test]
    fn trial_offsets_reuse_streams() {
        let g = CoverageGraph::build(3).unwrap();
        let all = simulate_uncovered(&g, 0.1, 10, 5, 0).unwrap();
        let tail = simulate_uncovered(&g, 0.1, 4, 5, 6).unwrap();
        assert_eq!(&all[6..], &tail[..]);
    }
}
