//! Exact moments of the uncovered count under the Bernoulli-`p` ensemble,
//! the Stein–Chen diagnostic built from them, and the closed-form `p`
//! scales around the coverage threshold.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::sample::check_probability;
use crate::error::{Error, Result};
use crate::graph::CoverageGraph;
use crate::perm::{factorial, MAX_RANK_N};
use crate::Limits;

fn ln_factorial(n: usize) -> f64 {
    if n <= MAX_RANK_N {
        (factorial(n) as f64).ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `λ = E X = n!·(1−p)^{n²+1}`, evaluated in log space.
pub fn exact_mean(n: usize, p: f64) -> Result<f64> {
    check_probability(p)?;
    if p == 1.0 {
        return Ok(0.0);
    }
    let m = (n * n + 1) as f64;
    Ok((ln_factorial(n) + m * (-p).ln_1p()).exp())
}

/// Exact `Var X`.
///
/// Uncovered indicators of patterns with disjoint cover sets are
/// independent, so only co-coverable ordered pairs contribute covariance:
/// a pair sharing `c` covers is jointly uncovered with probability
/// `(1−p)^{2(n²+1)−c} = q²·(1−p)^{−c}`.
pub fn exact_variance(g: &CoverageGraph, p: f64, limits: &Limits) -> Result<f64> {
    check_probability(p)?;
    let hist = g.overlap_histogram(limits)?;
    Ok(variance_from_histogram(g.n(), p, &hist))
}

pub(crate) fn variance_from_histogram(n: usize, p: f64, hist: &[u64]) -> f64 {
    if p == 0.0 || p == 1.0 {
        return 0.0;
    }
    let m = (n * n + 1) as f64;
    let ln_keep = (-p).ln_1p();
    let q = (m * ln_keep).exp();
    let n_fact = if n <= MAX_RANK_N { factorial(n) as f64 } else { ln_factorial(n).exp() };
    let diagonal = n_fact * q * (1.0 - q);
    let off_diagonal: f64 = hist
        .iter()
        .enumerate()
        .skip(1)
        .map(|(c, &count)| count as f64 * q * q * (-(c as f64) * ln_keep).exp_m1())
        .sum();
    diagonal + off_diagonal
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinChen {
    pub lambda: f64,
    pub variance: f64,
    /// `Var X/λ − 1 + 2(1−p)^{n²+1}`, unclamped.
    pub raw: f64,
    /// `raw` clamped at zero.
    pub bound: f64,
    /// The sharper form `(1 − e^{−λ})·raw`, before bounding the factor by one.
    pub with_lambda_factor: f64,
}

/// Stein–Chen upper bound on the total variation distance between the law
/// of `X` and `Poisson(E X)`.
pub fn stein_chen_bound(g: &CoverageGraph, p: f64, limits: &Limits) -> Result<SteinChen> {
    let lambda = exact_mean(g.n(), p)?;
    let variance = exact_variance(g, p, limits)?;
    if lambda == 0.0 {
        // X ≡ 0 and Poisson(0) is the same point mass.
        return Ok(SteinChen {
            lambda,
            variance,
            raw: 0.0,
            bound: 0.0,
            with_lambda_factor: 0.0,
        });
    }
    let m = (g.n() * g.n() + 1) as f64;
    let q = (m * (-p).ln_1p()).exp();
    let raw = variance / lambda - 1.0 + 2.0 * q;
    Ok(SteinChen {
        lambda,
        variance,
        raw,
        bound: raw.max(0.0),
        with_lambda_factor: -(-lambda).exp_m1() * raw,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdBoundaries {
    pub n: usize,
    pub omega: f64,
    /// Below this scale the ensemble fails to cover with high probability.
    pub p_zero: f64,
    /// Above this scale it covers with high probability.
    pub p_one: f64,
    pub ordered: bool,
}

/// `p_zero = (ln n − 1 + ln n/(2n) − ω/n)/n` and
/// `p_one = ln n/n − 1/n + ln n/(2n²) + ω/n²`.
pub fn threshold_boundaries(n: usize, omega: f64) -> Result<ThresholdBoundaries> {
    if n < 2 {
        return Err(Error::invalid(format!("threshold boundaries need n ≥ 2, got {n}")));
    }
    if omega.is_nan() || omega <= 0.0 {
        return Err(Error::invalid(format!("ω must be positive, got {omega}")));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let p_zero = (ln_n - 1.0 + 0.5 * ln_n / nf - omega / nf) / nf;
    let p_one = ln_n / nf - 1.0 / nf + ln_n / (2.0 * nf * nf) + omega / (nf * nf);
    Ok(ThresholdBoundaries {
        n,
        omega,
        p_zero,
        p_one,
        ordered: p_zero < p_one,
    })
}

/// `p = (ln n − 1 + ½·ln n/n − K/n)/n`, the parametrisation of the window
/// where `E X` stays bounded.
pub fn gap_p_paper(n: usize, k: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let p = (ln_n - 1.0 + 0.5 * ln_n / nf - k / nf) / nf;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::range(format!("p({n}, K={k}) = {p} is not in (0, 1)")));
    }
    Ok(p)
}

/// The `p ∈ [0, 1)` with `exact_mean(n, p) = target`, by bisection.
pub fn p_for_mean(n: usize, target: f64) -> Result<f64> {
    let top = if n <= MAX_RANK_N { factorial(n) as f64 } else { ln_factorial(n).exp() };
    if !(target > 0.0 && target <= top) {
        return Err(Error::range(format!("mean {target} not in (0, {n}!]")));
    }
    if target == top {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if exact_mean(n, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_examples() {
        assert!((exact_mean(3, 0.0).unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(exact_mean(5, 1.0).unwrap(), 0.0);
        let direct = 720.0 * 0.9f64.powi(37);
        assert!((exact_mean(6, 0.1).unwrap() - direct).abs() < 1e-10);
        assert!((direct - 14.598_403).abs() < 1e-6);
    }

    #[test]
    fn variance_extremes() {
        let g = CoverageGraph::build(3).unwrap();
        let limits = Limits::default();
        assert_eq!(exact_variance(&g, 0.0, &limits).unwrap(), 0.0);
        assert_eq!(exact_variance(&g, 1.0, &limits).unwrap(), 0.0);
        assert!(exact_variance(&g, 0.3, &limits).unwrap() > 0.0);
    }

    #[test]
    fn variance_respects_pair_budget() {
        let g = CoverageGraph::build(5).unwrap();
        let tight = Limits { pair_max_n: 4, ..Limits::default() };
        assert!(matches!(exact_variance(&g, 0.2, &tight), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn stein_chen_limits() {
        let g = CoverageGraph::build(3).unwrap();
        let limits = Limits::default();
        let near_one = stein_chen_bound(&g, 1.0 - 1e-6, &limits).unwrap();
        assert!(near_one.bound < 1e-6, "{near_one:?}");
        assert_eq!(stein_chen_bound(&g, 1.0, &limits).unwrap().bound, 0.0);
        let g6 = CoverageGraph::build(6).unwrap();
        let sc = stein_chen_bound(&g6, 0.15, &limits).unwrap();
        assert!(sc.raw >= -1e-9, "{sc:?}");
        assert!(sc.with_lambda_factor <= sc.raw);
    }

    #[test]
    fn boundary_examples() {
        let b = threshold_boundaries(7, 1.0).unwrap();
        let ln7 = 7f64.ln();
        assert!((b.p_zero - (ln7 - 1.0 + ln7 / 14.0 - 1.0 / 7.0) / 7.0).abs() < 1e-15);
        assert!((b.p_zero - 0.134_578_084).abs() < 1e-9, "{}", b.p_zero);
        assert!((b.p_one - 0.175_394_411).abs() < 1e-9, "{}", b.p_one);
        assert!(b.ordered);
        // the gap between the two sides is exactly 2ω/n²
        assert!((b.p_one - b.p_zero - 2.0 / 49.0).abs() < 1e-15);
        assert!(threshold_boundaries(1, 1.0).is_err());
        assert!(threshold_boundaries(7, 0.0).is_err());
    }

    #[test]
    fn boundaries_approach_log_n_over_n() {
        let gaps: Vec<f64> = [10usize, 100, 1000]
            .iter()
            .map(|&n| {
                let b = threshold_boundaries(n, 1.0).unwrap();
                (b.p_one / ((n as f64).ln() / n as f64) - 1.0).abs()
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] < 0.15);
    }

    #[test]
    fn gap_p_examples() {
        assert!((gap_p_paper(7, 0.0).unwrap() - 0.154_986_0).abs() < 1e-6);
        assert!((gap_p_paper(8, 0.0).unwrap() - 0.151_176_0).abs() < 1e-6);
        let ks = [-1.0, 0.0, 0.5, 2.0];
        let ps: Vec<f64> = ks.iter().map(|&k| gap_p_paper(7, k).unwrap()).collect();
        assert!(ps.windows(2).all(|w| w[1] < w[0]));
        assert!(gap_p_paper(7, 100.0).is_err());
    }

    #[test]
    fn p_for_mean_examples() {
        assert_eq!(p_for_mean(5, 120.0).unwrap(), 0.0);
        let closed = 1.0 - (1.0f64 / 5040.0).powf(1.0 / 50.0);
        let p = p_for_mean(7, 1.0).unwrap();
        assert!((p - closed).abs() < 1e-12);
        assert!((p - 0.15676).abs() < 1e-5);
        for n in [5, 6, 7] {
            for t in [0.1, 1.0, 10.0] {
                let back = exact_mean(n, p_for_mean(n, t).unwrap()).unwrap();
                assert!(((back - t) / t).abs() < 1e-9, "n={n} t={t} back={back}");
            }
        }
        assert!(p_for_mean(5, 0.0).is_err());
        assert!(p_for_mean(5, 121.0).is_err());
    }
}
