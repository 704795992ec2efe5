//! Permutations in one-line notation and the arithmetic the rest of the crate
//! is built on.
//!
//! Values are 1-based at every public boundary (`1342` means
//! `π(1)=1, π(2)=3, π(3)=4, π(4)=2`). Ranks are lexicographic positions
//! computed through the Lehmer code, so rank 0 is the identity and rank
//! `n!-1` is the reversal.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest length whose factorial fits in a `u64`.
pub const MAX_RANK_N: usize = 20;

const FACTORIALS: [u64; MAX_RANK_N + 1] = {
    let mut table = [1u64; MAX_RANK_N + 1];
    let mut i = 1;
    while i <= MAX_RANK_N {
        table[i] = table[i - 1] * i as u64;
        i += 1;
    }
    table
};

/// `n!` for `n ≤ 20`.
///
/// # Panics
/// If `n > 20`.
pub fn factorial(n: usize) -> u64 {
    FACTORIALS[n]
}

/// A permutation of `{1, …, n}`, `n ≥ 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    values: Vec<u32>,
}

/// Lexicographic index of a permutation within `S_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PermRank {
    pub n: usize,
    pub r: u64,
}

impl PermRank {
    pub fn new(n: usize, r: u64) -> Result<Self> {
        if n == 0 || n > MAX_RANK_N {
            return Err(Error::range(format!("length {n} not in 1..={MAX_RANK_N}")));
        }
        if r >= factorial(n) {
            return Err(Error::range(format!("rank {r} not below {n}! = {}", factorial(n))));
        }
        Ok(PermRank { n, r })
    }

    pub fn unrank(self) -> Permutation {
        unrank(self.n, self.r).expect("PermRank is validated on construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symmetry {
    Reverse,
    Complement,
    Inverse,
}

impl Symmetry {
    pub const ALL: [Symmetry; 3] = [Symmetry::Reverse, Symmetry::Complement, Symmetry::Inverse];
}

impl Permutation {
    /// Builds a permutation from 1-based one-line notation.
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::invalid("permutation must have length at least 1"));
        }
        let mut seen = vec![false; n];
        for &v in &values {
            let idx = (v as usize).wrapping_sub(1);
            if idx >= n {
                return Err(Error::invalid(format!("value {v} outside 1..={n}")));
            }
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::invalid(format!("value {v} repeated")));
            }
        }
        Ok(Permutation { values })
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1);
        Permutation {
            values: (1..=n as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a permutation has length at least one.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Lexicographic rank within `S_n`. Fails only for `n > 20`.
    pub fn rank(&self) -> Result<PermRank> {
        let n = self.len();
        if n > MAX_RANK_N {
            return Err(Error::range(format!("cannot rank length {n} > {MAX_RANK_N}")));
        }
        let zero_based: Vec<u8> = self.values.iter().map(|&v| (v - 1) as u8).collect();
        Ok(PermRank {
            n,
            r: rank_slice(&zero_based),
        })
    }

    /// `standardize` of this permutation with position `i` (1-based) removed.
    pub fn delete_at(&self, i: usize) -> Result<Permutation> {
        let n = self.len();
        if n < 2 {
            return Err(Error::range("cannot delete from a permutation of length 1"));
        }
        if i == 0 || i > n {
            return Err(Error::range(format!("position {i} not in 1..={n}")));
        }
        let removed = self.values[i - 1];
        let values = self
            .values
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i - 1)
            .map(|(_, &v)| if v > removed { v - 1 } else { v })
            .collect();
        Ok(Permutation { values })
    }

    /// Number of positions `i` with `|π(i+1) − π(i)| = 1`.
    pub fn successions(&self) -> usize {
        self.values
            .windows(2)
            .filter(|w| w[0].abs_diff(w[1]) == 1)
            .count()
    }

    pub fn symmetry(&self, op: Symmetry) -> Permutation {
        let n = self.len() as u32;
        let values = match op {
            Symmetry::Reverse => self.values.iter().rev().copied().collect(),
            Symmetry::Complement => self.values.iter().map(|&v| n + 1 - v).collect(),
            Symmetry::Inverse => {
                let mut inv = vec![0; self.len()];
                for (pos, &v) in self.values.iter().enumerate() {
                    inv[(v - 1) as usize] = pos as u32 + 1;
                }
                inv
            }
        };
        Permutation { values }
    }

    /// Whether deleting one entry of `self` leaves a copy of `pattern`.
    ///
    /// Only the one-letter gap is supported: `self` must be exactly one
    /// longer than `pattern`.
    pub fn covers(&self, pattern: &Permutation) -> Result<bool> {
        if self.len() != pattern.len() + 1 {
            return Err(Error::invalid(format!(
                "cover test needs lengths m+1 and m, got {} and {}",
                self.len(),
                pattern.len()
            )));
        }
        Ok((1..=self.len()).any(|i| {
            self.delete_at(i)
                .map(|d| d == *pattern)
                .unwrap_or(false)
        }))
    }
}

/// Replaces each entry by its 1-based order statistic.
pub fn standardize<T: Ord>(seq: &[T]) -> Result<Permutation> {
    if seq.is_empty() {
        return Err(Error::invalid("cannot standardize an empty sequence"));
    }
    let mut order: Vec<usize> = (0..seq.len()).collect();
    order.sort_by(|&a, &b| seq[a].cmp(&seq[b]));
    if order.windows(2).any(|w| seq[w[0]] == seq[w[1]]) {
        return Err(Error::invalid("sequence has repeated entries"));
    }
    let mut values = vec![0u32; seq.len()];
    for (k, &pos) in order.iter().enumerate() {
        values[pos] = k as u32 + 1;
    }
    Ok(Permutation { values })
}

/// The permutation at lexicographic position `r` in `S_n`.
pub fn unrank(n: usize, r: u64) -> Result<Permutation> {
    PermRank::new(n, r)?;
    let mut buf = vec![0u8; n];
    unrank_into(r, &mut buf);
    Ok(Permutation {
        values: buf.iter().map(|&v| v as u32 + 1).collect(),
    })
}

/// Lehmer-code rank of a 0-based permutation of length ≤ 20.
#[inline]
pub(crate) fn rank_slice(p: &[u8]) -> u64 {
    let n = p.len();
    let mut r = 0u64;
    for i in 0..n {
        let smaller_after = p[i + 1..].iter().filter(|&&v| v < p[i]).count() as u64;
        r += smaller_after * FACTORIALS[n - 1 - i];
    }
    r
}

/// Inverse of [`rank_slice`]; writes 0-based values into `out`.
#[inline]
pub(crate) fn unrank_into(mut r: u64, out: &mut [u8]) {
    let n = out.len();
    let mut unused: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    for i in 0..n {
        let f = FACTORIALS[n - 1 - i];
        let mut k = (r / f) as u32;
        r %= f;
        // k-th lowest set bit of `unused`
        let mut bits = unused;
        while k > 0 {
            bits &= bits - 1;
            k -= 1;
        }
        let v = bits.trailing_zeros();
        unused &= !(1 << v);
        out[i] = v as u8;
    }
}

/// Ranks of the distinct one-deletion patterns of a 0-based permutation,
/// sorted ascending. `scratch` must have length `p.len() - 1`.
pub(crate) fn deletion_ranks(p: &[u8], scratch: &mut [u8], out: &mut Vec<u32>) {
    out.clear();
    for i in 0..p.len() {
        // Deleting either end of a succession gives the same pattern.
        if i > 0 && p[i].abs_diff(p[i - 1]) == 1 {
            continue;
        }
        let removed = p[i];
        let mut k = 0;
        for (j, &v) in p.iter().enumerate() {
            if j != i {
                scratch[k] = if v > removed { v - 1 } else { v };
                k += 1;
            }
        }
        out.push(rank_slice(scratch) as u32);
    }
    out.sort_unstable();
    out.dedup();
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 9 {
            for v in &self.values {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.values.iter().map(u32::to_string).collect();
            f.write_str(&parts.join(","))
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Accepts `"1342"` (one digit per entry) or `"10,3,1,2,…"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let values = if s.contains(',') {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::invalid(format!("bad entry {t:?} in {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .ok_or_else(|| Error::invalid(format!("bad digit {c:?} in {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        Permutation::new(values)
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
