//! Closed-form bounds on minimum cover sizes. Logarithms are natural.

use serde::Serialize;

use crate::error::{Error, Result};

fn factorial_f64(n: usize) -> f64 {
    (2..=n).map(|k| k as f64).product()
}

/// `(n+1)! / (n²+1)`, the reciprocal of the chance that a uniform
/// `(n+1)`-permutation covers a fixed pattern.
fn cover_scale(n: usize) -> f64 {
    factorial_f64(n + 1) / (n * n + 1) as f64
}

/// `⌈λ·n!/(n+1)⌉`: each member of a cover contains at most `n+1` patterns.
pub fn pigeonhole_lower(n: usize, lambda: u32) -> u64 {
    let num = lambda as u128 * (2..=n as u128).product::<u128>();
    num.div_ceil(n as u128 + 1) as u64
}

/// Alteration upper bound `((n+1)!/(n²+1))·(1 + ln((n²+1)/(n+1)))`.
pub fn thm2_upper(n: usize) -> f64 {
    let m = (n * n + 1) as f64;
    cover_scale(n) * (1.0 + (m / (n + 1) as f64).ln())
}

/// The same bound written with `n²` in place of `n²+1`.
pub fn thm2_upper_n2(n: usize) -> f64 {
    let m = (n * n) as f64;
    factorial_f64(n + 1) / m * (1.0 + (m / (n + 1) as f64).ln())
}

/// Initial random selection size minimizing `Y + n!·exp(−Y(n²+1)/(n+1)!)`,
/// rounded and clamped to `[0, (n+1)!]`.
pub fn thm2_default_initial_size(n: usize) -> u64 {
    let m = (n * n + 1) as f64;
    let y = cover_scale(n) * (m / (n + 1) as f64).ln();
    (y.round().max(0.0) as u64).min(factorial_f64(n + 1) as u64)
}

/// With-replacement draw count `((n+1)!/(n²+1))·(ln n + (λ−1)·ln ln n)` used
/// by the λ-cover construction. Requires `n ≥ 3`.
pub fn thm3_default_draws(n: usize, lambda: u32) -> Result<u64> {
    check_thm3(n, lambda)?;
    let ln_n = (n as f64).ln();
    let y = cover_scale(n) * (ln_n + (lambda - 1) as f64 * ln_n.ln());
    Ok(y.round() as u64)
}

/// `((n+1)!/(n²+1))·(ln n + (λ−1)·ln ln n + λ/(λ−1)!)`.
///
/// This is the explicit expression behind the `O(1)` of the λ-cover bound;
/// the asymptotic statement folds the `λ/(λ−1)!` term into the constant.
pub fn thm3_upper(n: usize, lambda: u32) -> Result<f64> {
    check_thm3(n, lambda)?;
    let ln_n = (n as f64).ln();
    let tail = lambda as f64 / factorial_f64(lambda as usize - 1);
    Ok(cover_scale(n) * (ln_n + (lambda - 1) as f64 * ln_n.ln() + tail))
}

fn check_thm3(n: usize, lambda: u32) -> Result<()> {
    if n < 3 {
        return Err(Error::invalid(format!("λ-cover bound needs n ≥ 3 (ln ln n > 0), got {n}")));
    }
    if lambda < 2 {
        return Err(Error::invalid(format!("λ-cover bound needs λ ≥ 2, got {lambda}")));
    }
    Ok(())
}

/// Expected number of uncovered patterns after `y` distinct uniform picks
/// from `S_{n+1}`: `n!·C((n+1)!−n²−1, y)/C((n+1)!, y)`.
pub fn expected_uncovered_wor(n: usize, y: u64) -> Result<f64> {
    let total = factorial_f64(n + 1);
    if y as f64 > total {
        return Err(Error::range(format!("selection size {y} exceeds (n+1)! = {total}")));
    }
    // Equivalently, all n²+1 covers of a pattern land among the (n+1)!−y
    // unpicked members: Π_{j ≤ n²} ((n+1)!−y−j)/((n+1)!−j).
    let m = n * n + 1;
    let unpicked = total - y as f64;
    let ratio: f64 = (0..m)
        .map(|j| ((unpicked - j as f64) / (total - j as f64)).max(0.0))
        .product();
    Ok(factorial_f64(n) * ratio)
}

/// The analytic quantities for one `(n, λ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTable {
    pub n: usize,
    pub lambda: u32,
    pub pigeonhole_lower: u64,
    pub thm2_upper: f64,
    pub thm2_upper_n2: f64,
    /// `None` when `n < 3` or `λ < 2`.
    pub thm3_upper: Option<f64>,
    /// Chance a uniform `(n+1)`-permutation covers a fixed pattern.
    pub p: f64,
    pub q: f64,
}

impl BoundTable {
    pub fn new(n: usize, lambda: u32) -> Self {
        let p = 1.0 / cover_scale(n);
        BoundTable {
            n,
            lambda,
            pigeonhole_lower: pigeonhole_lower(n, lambda),
            thm2_upper: thm2_upper(n),
            thm2_upper_n2: thm2_upper_n2(n),
            thm3_upper: thm3_upper(n, lambda).ok(),
            p,
            q: 1.0 - p,
        }
    }

    pub fn expected_uncovered_wor(&self, y: u64) -> Result<f64> {
        expected_uncovered_wor(self.n, y)
    }
}
