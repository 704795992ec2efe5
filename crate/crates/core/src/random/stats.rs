//! Small statistics helpers: Wilson intervals, Poisson laws, TV distance.

use serde::Serialize;

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const WILSON_Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::invalid("Wilson interval needs at least one trial"));
    }
    if successes > trials {
        return Err(Error::invalid(format!("{successes} successes out of {trials} trials")));
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((centre - half).max(0.0), (centre + half).min(1.0)))
}

/// `Poisson(λ)` on `0..pmf.len()`, with the mass beyond kept separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonPmf {
    pub lambda: f64,
    pub pmf: Vec<f64>,
    /// `P(K ≥ pmf.len())`.
    pub tail: f64,
}

/// Support length used for `Poisson(λ)` comparisons: far enough out that
/// the truncated tail is negligible next to Monte Carlo noise.
pub fn poisson_support(lambda: f64) -> usize {
    (lambda + 10.0 * lambda.sqrt() + 30.0).ceil() as usize
}

pub fn poisson_pmf(lambda: f64, len: usize) -> Result<PoissonPmf> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("Poisson mean must be finite and ≥ 0, got {lambda}")));
    }
    if len == 0 {
        return Err(Error::invalid("Poisson support must be non-empty"));
    }
    if lambda == 0.0 {
        let mut pmf = vec![0.0; len];
        pmf[0] = 1.0;
        return Ok(PoissonPmf { lambda, pmf, tail: 0.0 });
    }
    // log p_k = −λ + k ln λ − ln k!, accumulated term by term
    let ln_lambda = lambda.ln();
    let mut log_p = -lambda;
    let mut pmf = Vec::with_capacity(len);
    for k in 0..len {
        if k > 0 {
            log_p += ln_lambda - (k as f64).ln();
        }
        pmf.push(log_p.exp());
    }
    // Tail from the same recurrence carried on until terms vanish, rather
    // than 1 − Σ pmf, which loses everything to cancellation.
    let mut tail = 0.0;
    let mut k = len;
    loop {
        log_p += ln_lambda - (k as f64).ln();
        let term = log_p.exp();
        tail += term;
        if (k as f64) > lambda && term < tail * 1e-17 {
            break;
        }
        if term == 0.0 && (k as f64) > lambda {
            break;
        }
        k += 1;
    }
    Ok(PoissonPmf { lambda, pmf, tail })
}

/// `½·Σ|a_k − b_k|` between two pmfs on a common support (the shorter is
/// padded with zeros). Each input must sum to one within `1e-9`.
pub fn tv_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    for (name, v) in [("first", a), ("second", b)] {
        if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::invalid(format!("{name} pmf has a negative or non-finite entry")));
        }
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("{name} pmf sums to {s}, not 1")));
        }
    }
    let len = a.len().max(b.len());
    let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    Ok(0.5 * (0..len).map(|k| (at(a, k) - at(b, k)).abs()).sum::<f64>())
}
