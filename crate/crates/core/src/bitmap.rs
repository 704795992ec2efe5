use std::fmt;

use crate::error::{Error, Result};
use crate::perm::{factorial, unrank, Permutation};

/// A subset of `S_level`, one bit per lexicographic rank.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PermSetBitmap {
    level: usize,
    universe: usize,
    words: Vec<u64>,
}

impl PermSetBitmap {
    pub fn empty(level: usize) -> Self {
        let universe = factorial(level) as usize;
        PermSetBitmap {
            level,
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(level: usize) -> Self {
        let mut set = Self::empty(level);
        set.words.iter_mut().for_each(|w| *w = u64::MAX);
        set.clear_tail();
        set
    }

    pub fn from_ranks<I>(level: usize, ranks: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<u64>,
    {
        let mut set = Self::empty(level);
        for r in ranks {
            set.try_insert(r.into())?;
        }
        Ok(set)
    }

    pub fn from_perms<'a, I>(level: usize, perms: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Permutation>,
    {
        let mut set = Self::empty(level);
        for p in perms {
            if p.len() != level {
                return Err(Error::UniverseMismatch {
                    expected: level,
                    found: p.len(),
                });
            }
            set.insert(p.rank()?.r as usize);
        }
        Ok(set)
    }

    /// Length of the permutations this set ranges over.
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn universe_size(&self) -> usize {
        self.universe
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// # Panics
    /// If `rank` is outside the universe.
    #[inline]
    pub fn insert(&mut self, rank: usize) -> bool {
        assert!(rank < self.universe, "rank {rank} outside S_{}", self.level);
        let (w, b) = (rank / 64, rank % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    pub fn try_insert(&mut self, rank: u64) -> Result<bool> {
        if rank >= self.universe as u64 {
            return Err(Error::range(format!(
                "rank {rank} outside S_{} ({} elements)",
                self.level, self.universe
            )));
        }
        Ok(self.insert(rank as usize))
    }

    #[inline]
    pub fn remove(&mut self, rank: usize) -> bool {
        if rank >= self.universe {
            return false;
        }
        let (w, b) = (rank / 64, rank % 64);
        let present = self.words[w] & (1 << b) != 0;
        self.words[w] &= !(1 << b);
        present
    }

    #[inline]
    pub fn contains(&self, rank: usize) -> bool {
        rank < self.universe && self.words[rank / 64] & (1 << (rank % 64)) != 0
    }

    /// Set ranks in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn to_perms(&self) -> Vec<Permutation> {
        self.iter()
            .map(|r| unrank(self.level, r as u64).expect("rank inside universe"))
            .collect()
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check_same_universe(other)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & b)
            .collect();
        Ok(PermSetBitmap { words, ..*self })
    }

    pub fn intersection_count(&self, other: &Self) -> Result<usize> {
        self.check_same_universe(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum())
    }

    pub fn union_with(&mut self, other: &Self) -> Result<()> {
        self.check_same_universe(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        Ok(())
    }

    pub(crate) fn check_level(&self, level: usize) -> Result<()> {
        if self.level != level {
            return Err(Error::UniverseMismatch {
                expected: level,
                found: self.level,
            });
        }
        Ok(())
    }

    fn check_same_universe(&self, other: &Self) -> Result<()> {
        self.check_level(other.level)
    }

    fn clear_tail(&mut self) {
        let tail = self.universe % 64;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }
}

impl fmt::Debug for PermSetBitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PermSetBitmap(S_{}) ", self.level)?;
        f.debug_set().entries(self.to_perms().iter().map(|p| p.to_string())).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_set_has_no_stray_bits() {
        for level in 1..=6 {
            let full = PermSetBitmap::full(level);
            assert_eq!(full.count(), factorial(level) as usize);
            assert!(!full.contains(full.universe_size()));
        }
    }

    #[test]
    fn out_of_universe_insert_is_an_error() {
        let mut s = PermSetBitmap::empty(3);
        assert!(s.try_insert(6).is_err());
        assert!(s.try_insert(5).unwrap());
        assert!(!s.try_insert(5).unwrap());
    }

    #[test]
    fn mismatched_levels_are_rejected() {
        let a = PermSetBitmap::empty(3);
        let b = PermSetBitmap::empty(4);
        assert!(matches!(a.intersection(&b), Err(Error::UniverseMismatch { .. })));
    }

    #[test]
    fn from_perms_round_trips() {
        let perms: Vec<Permutation> = ["1342", "4213"].iter().map(|s| s.parse().unwrap()).collect();
        let set = PermSetBitmap::from_perms(4, &perms).unwrap();
        assert_eq!(set.count(), 2);
        assert_eq!(set.to_perms(), perms);
    }

    proptest! {
        #[test]
        fn count_matches_iteration(ranks in proptest::collection::vec(0usize..720, 0..200)) {
            let mut set = PermSetBitmap::empty(6);
            for &r in &ranks {
                set.insert(r);
            }
            let mut expected = ranks.clone();
            expected.sort_unstable();
            expected.dedup();
            prop_assert_eq!(set.count(), expected.len());
            prop_assert_eq!(set.iter().collect::<Vec<_>>(), expected);
        }

        #[test]
        fn intersection_count_matches_intersection(
            a in proptest::collection::vec(0usize..120, 0..60),
            b in proptest::collection::vec(0usize..120, 0..60),
        ) {
            let x = PermSetBitmap::from_ranks(5, a.iter().map(|&r| r as u64)).unwrap();
            let y = PermSetBitmap::from_ranks(5, b.iter().map(|&r| r as u64)).unwrap();
            let both = x.intersection(&y).unwrap();
            prop_assert_eq!(both.count(), x.intersection_count(&y).unwrap());
            prop_assert!(both.iter().all(|r| x.contains(r) && y.contains(r)));
        }
    }
}
