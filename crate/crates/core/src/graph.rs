//! The bipartite incidence between `S_n` (patterns) and `S_{n+1}` (covers).
//!
//! Built in one pass over `S_{n+1}`: every `ρ` is unranked, its one-letter
//! deletions are standardized and ranked, and both adjacency directions are
//! filled from that single enumeration. Adjacency is stored as sorted rank
//! lists (CSR); the set-valued queries hand back [`PermSetBitmap`]s.

use rayon::prelude::*;
use serde::Serialize;

use crate::bitmap::PermSetBitmap;
use crate::error::{Error, Result};
use crate::perm::{deletion_ranks, factorial, unrank_into, PermRank};
use crate::Limits;

const BUILD_CHUNK: usize = 4096;

#[derive(Debug, Clone)]
pub struct CoverageGraph {
    n: usize,
    pattern_count: usize,
    cover_count: usize,
    cover_offsets: Vec<u32>,
    cover_data: Vec<u32>,
    pattern_offsets: Vec<u32>,
    pattern_data: Vec<u32>,
}

/// Exhaustive check of the counting identities a correct graph satisfies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    /// Every pattern has exactly `n²+1` covers.
    pub cover_count_identity_holds: bool,
    pub min_covers_per_pattern: usize,
    pub max_covers_per_pattern: usize,
    /// Every `ρ` covers exactly `(n+1) − successions(ρ)` patterns.
    pub succession_identity_holds: bool,
    pub duality_holds: bool,
    pub total_incidences: u64,
    pub expected_total_incidences: u64,
    pub total_successions: u64,
    pub expected_total_successions: u64,
}

impl IdentityReport {
    pub fn all_hold(&self) -> bool {
        self.cover_count_identity_holds
            && self.succession_identity_holds
            && self.duality_holds
            && self.total_incidences == self.expected_total_incidences
            && self.total_successions == self.expected_total_successions
    }
}

impl CoverageGraph {
    pub fn build(n: usize) -> Result<Self> {
        Self::build_with_limits(n, &Limits::default())
    }

    pub fn build_with_limits(n: usize, limits: &Limits) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("pattern length must be at least 1"));
        }
        if n > limits.max_n {
            return Err(Error::ResourceLimit {
                what: "coverage graph pattern length n",
                requested: n,
                limit: limits.max_n,
            });
        }
        let pattern_count = factorial(n) as usize;
        let cover_count = factorial(n + 1) as usize;

        let chunks: Vec<(Vec<u8>, Vec<u32>)> = (0..cover_count.div_ceil(BUILD_CHUNK))
            .into_par_iter()
            .map(|c| {
                let lo = c * BUILD_CHUNK;
                let hi = (lo + BUILD_CHUNK).min(cover_count);
                let mut rho = vec![0u8; n + 1];
                let mut scratch = vec![0u8; n];
                let mut dels = Vec::with_capacity(n + 1);
                let mut lens = Vec::with_capacity(hi - lo);
                let mut data = Vec::with_capacity((hi - lo) * (n + 1));
                for r in lo..hi {
                    unrank_into(r as u64, &mut rho);
                    deletion_ranks(&rho, &mut scratch, &mut dels);
                    lens.push(dels.len() as u8);
                    data.extend_from_slice(&dels);
                }
                (lens, data)
            })
            .collect();

        let mut pattern_offsets = Vec::with_capacity(cover_count + 1);
        let mut pattern_data = Vec::with_capacity(chunks.iter().map(|c| c.1.len()).sum());
        pattern_offsets.push(0u32);
        for (lens, data) in chunks {
            for len in lens {
                let last = *pattern_offsets.last().unwrap();
                pattern_offsets.push(last + len as u32);
            }
            pattern_data.extend(data);
        }

        let mut cover_offsets = vec![0u32; pattern_count + 1];
        for &pi in &pattern_data {
            cover_offsets[pi as usize + 1] += 1;
        }
        for i in 0..pattern_count {
            cover_offsets[i + 1] += cover_offsets[i];
        }
        let mut fill = cover_offsets.clone();
        let mut cover_data = vec![0u32; pattern_data.len()];
        for rho in 0..cover_count {
            let (a, b) = (pattern_offsets[rho] as usize, pattern_offsets[rho + 1] as usize);
            for &pi in &pattern_data[a..b] {
                cover_data[fill[pi as usize] as usize] = rho as u32;
                fill[pi as usize] += 1;
            }
        }

        Ok(CoverageGraph {
            n,
            pattern_count,
            cover_count,
            cover_offsets,
            cover_data,
            pattern_offsets,
            pattern_data,
        })
    }

    /// Pattern length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `|S_n|`.
    pub fn pattern_count(&self) -> usize {
        self.pattern_count
    }

    /// `|S_{n+1}|`.
    pub fn cover_count(&self) -> usize {
        self.cover_count
    }

    /// Ranks in `S_{n+1}` covering pattern rank `pi`, ascending.
    #[inline]
    pub fn covers(&self, pi: usize) -> &[u32] {
        let (a, b) = (self.cover_offsets[pi], self.cover_offsets[pi + 1]);
        &self.cover_data[a as usize..b as usize]
    }

    /// Pattern ranks in `S_n` covered by `rho`, ascending and distinct.
    #[inline]
    pub fn patterns(&self, rho: usize) -> &[u32] {
        let (a, b) = (self.pattern_offsets[rho], self.pattern_offsets[rho + 1]);
        &self.pattern_data[a as usize..b as usize]
    }

    pub fn covers_of(&self, pi: PermRank) -> Result<PermSetBitmap> {
        let pi = self.check_pattern(pi)?;
        self.bitmap_of_covers(self.covers(pi).iter().copied())
    }

    pub fn patterns_of(&self, rho: PermRank) -> Result<PermSetBitmap> {
        let rho = self.check_cover(rho)?;
        PermSetBitmap::from_ranks(self.n, self.patterns(rho).iter().copied())
    }

    /// `C_{π,π′}`: the `(n+1)`-permutations covering both patterns.
    pub fn joint_covers(&self, pi: PermRank, pi2: PermRank) -> Result<PermSetBitmap> {
        let a = self.check_pattern(pi)?;
        let b = self.check_pattern(pi2)?;
        let (xs, ys) = (self.covers(a), self.covers(b));
        let mut out = PermSetBitmap::empty(self.n + 1);
        let (mut i, mut j) = (0, 0);
        while i < xs.len() && j < ys.len() {
            match xs[i].cmp(&ys[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.insert(xs[i] as usize);
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(out)
    }

    /// `J_π`: patterns other than `π` sharing at least one cover with it.
    pub fn co_coverable(&self, pi: PermRank) -> Result<PermSetBitmap> {
        let pi = self.check_pattern(pi)?;
        let mut out = PermSetBitmap::empty(self.n);
        for &rho in self.covers(pi) {
            for &other in self.patterns(rho as usize) {
                if other as usize != pi {
                    out.insert(other as usize);
                }
            }
        }
        Ok(out)
    }

    /// For pattern `pi`, every partner `π′ ≠ π` with `|C_{π,π′}| > 0`,
    /// paired with that overlap, in ascending partner order.
    pub fn overlaps(&self, pi: usize) -> Vec<(u32, u8)> {
        let mut partners: Vec<u32> = self
            .covers(pi)
            .iter()
            .flat_map(|&rho| self.patterns(rho as usize).iter().copied())
            .filter(|&other| other as usize != pi)
            .collect();
        partners.sort_unstable();
        let mut out: Vec<(u32, u8)> = Vec::new();
        for p in partners {
            match out.last_mut() {
                Some((q, c)) if *q == p => *c += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Number of ordered pairs `(π, π′)`, `π ≠ π′`, with `|C_{π,π′}| = c`,
    /// indexed by `c`. Index 0 is left at 0; disjoint pairs are not counted.
    pub fn overlap_histogram(&self, limits: &Limits) -> Result<Vec<u64>> {
        self.check_pair_budget(limits)?;
        let per_pattern: Vec<Vec<u64>> = (0..self.pattern_count)
            .into_par_iter()
            .map(|pi| {
                let mut h = vec![0u64; 2];
                for (_, c) in self.overlaps(pi) {
                    let c = c as usize;
                    if h.len() <= c {
                        h.resize(c + 1, 0);
                    }
                    h[c] += 1;
                }
                h
            })
            .collect();
        let mut hist = vec![0u64; 2];
        for h in per_pattern {
            if hist.len() < h.len() {
                hist.resize(h.len(), 0);
            }
            for (c, v) in h.into_iter().enumerate() {
                hist[c] += v;
            }
        }
        Ok(hist)
    }

    pub(crate) fn check_pair_budget(&self, limits: &Limits) -> Result<()> {
        if self.n > limits.pair_max_n {
            return Err(Error::ResourceLimit {
                what: "exhaustive pair computation n",
                requested: self.n,
                limit: limits.pair_max_n,
            });
        }
        Ok(())
    }

    pub fn identity_report(&self) -> IdentityReport {
        let n = self.n;
        let expected_covers = n * n + 1;
        let cover_sizes = (0..self.pattern_count).map(|pi| self.covers(pi).len());
        let min_covers = cover_sizes.clone().min().unwrap_or(0);
        let max_covers = cover_sizes.max().unwrap_or(0);

        let mut rho_buf = vec![0u8; n + 1];
        let mut succession_ok = true;
        let mut total_successions = 0u64;
        let mut total_incidences = 0u64;
        let mut duality_ok = true;
        for rho in 0..self.cover_count {
            unrank_into(rho as u64, &mut rho_buf);
            let s = rho_buf.windows(2).filter(|w| w[0].abs_diff(w[1]) == 1).count();
            total_successions += s as u64;
            let pats = self.patterns(rho);
            total_incidences += pats.len() as u64;
            succession_ok &= pats.len() == n + 1 - s;
            duality_ok &= pats
                .iter()
                .all(|&pi| self.covers(pi as usize).binary_search(&(rho as u32)).is_ok());
        }
        // Both directions carry the same number of incidences, so with the
        // membership check above the two adjacency structures are mirror images.
        duality_ok &= self.cover_data.len() == self.pattern_data.len();

        let n_fact = self.pattern_count as u64;
        IdentityReport {
            n,
            cover_count_identity_holds: min_covers == expected_covers && max_covers == expected_covers,
            min_covers_per_pattern: min_covers,
            max_covers_per_pattern: max_covers,
            succession_identity_holds: succession_ok,
            duality_holds: duality_ok,
            total_incidences,
            expected_total_incidences: n_fact * expected_covers as u64,
            total_successions,
            expected_total_successions: 2 * n as u64 * n_fact,
        }
    }

    fn bitmap_of_covers(&self, ranks: impl Iterator<Item = u32>) -> Result<PermSetBitmap> {
        PermSetBitmap::from_ranks(self.n + 1, ranks)
    }

    fn check_pattern(&self, pi: PermRank) -> Result<usize> {
        if pi.n != self.n {
            return Err(Error::UniverseMismatch {
                expected: self.n,
                found: pi.n,
            });
        }
        if pi.r >= self.pattern_count as u64 {
            return Err(Error::range(format!("pattern rank {} outside S_{}", pi.r, self.n)));
        }
        Ok(pi.r as usize)
    }

    fn check_cover(&self, rho: PermRank) -> Result<usize> {
        if rho.n != self.n + 1 {
            return Err(Error::UniverseMismatch {
                expected: self.n + 1,
                found: rho.n,
            });
        }
        if rho.r >= self.cover_count as u64 {
            return Err(Error::range(format!("cover rank {} outside S_{}", rho.r, self.n + 1)));
        }
        Ok(rho.r as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{unrank, Permutation, Symmetry};

    fn rank(s: &str) -> PermRank {
        s.parse::<Permutation>().unwrap().rank().unwrap()
    }

    fn names(set: &PermSetBitmap) -> Vec<String> {
        set.to_perms().iter().map(|p| p.to_string()).collect()
    }

    #[test]
    fn every_pattern_of_s3_has_ten_covers() {
        let g = CoverageGraph::build(3).unwrap();
        for pi in 0..6 {
            assert_eq!(g.covers(pi).len(), 10);
        }
    }

    #[test]
    fn n1_single_pattern_covered_by_both() {
        let g = CoverageGraph::build(1).unwrap();
        assert_eq!(names(&g.covers_of(rank("1")).unwrap()), ["12", "21"]);
    }

    #[test]
    fn n4_incidence_total_matches_double_count() {
        let g = CoverageGraph::build(4).unwrap();
        // Σ over S_5 of (5 − successions), computed straight from perm-core.
        let oracle: usize = (0..120)
            .map(|r| 5 - unrank(5, r).unwrap().successions())
            .sum();
        assert_eq!(oracle, 408);
        let total: usize = (0..120).map(|r| g.patterns(r).len()).sum();
        assert_eq!(total, 408);
    }

    #[test]
    fn covers_of_examples() {
        let g3 = CoverageGraph::build(3).unwrap();
        let c = g3.covers_of(rank("123")).unwrap();
        assert_eq!(c.count(), 10);
        assert!(c.contains(rank("1234").r as usize));

        let g2 = CoverageGraph::build(2).unwrap();
        assert_eq!(
            names(&g2.covers_of(rank("12")).unwrap()),
            ["123", "132", "213", "231", "312"]
        );
        assert!(g3.covers_of(rank("1234")).is_err());
        assert!(g3.covers_of(PermRank { n: 3, r: 6 }).is_err());
    }

    #[test]
    fn patterns_of_examples() {
        let g = CoverageGraph::build(3).unwrap();
        assert_eq!(names(&g.patterns_of(rank("1342")).unwrap()), ["123", "132", "231"]);
        assert_eq!(names(&g.patterns_of(rank("4213")).unwrap()), ["213", "312", "321"]);
        assert_eq!(names(&g.patterns_of(rank("1234")).unwrap()), ["123"]);
        assert!(g.patterns_of(rank("123")).is_err());
    }

    #[test]
    fn joint_covers_examples() {
        let g = CoverageGraph::build(3).unwrap();
        assert_eq!(
            names(&g.joint_covers(rank("123"), rank("132")).unwrap()),
            ["1243", "1324", "1342", "1423"]
        );
        assert!(g.joint_covers(rank("123"), rank("321")).unwrap().is_empty());
        assert_eq!(g.joint_covers(rank("123"), rank("123")).unwrap().count(), 10);
    }

    #[test]
    fn joint_covers_match_brute_force_on_s4() {
        let g = CoverageGraph::build(3).unwrap();
        let s4: Vec<Permutation> = (0..24).map(|r| unrank(4, r).unwrap()).collect();
        for a in 0..6 {
            for b in 0..6 {
                let (pa, pb) = (unrank(3, a).unwrap(), unrank(3, b).unwrap());
                let brute: Vec<String> = s4
                    .iter()
                    .filter(|rho| rho.covers(&pa).unwrap() && rho.covers(&pb).unwrap())
                    .map(|rho| rho.to_string())
                    .collect();
                let got = g
                    .joint_covers(PermRank { n: 3, r: a }, PermRank { n: 3, r: b })
                    .unwrap();
                assert_eq!(names(&got), brute);
            }
        }
    }

    #[test]
    fn co_coverable_examples() {
        let g = CoverageGraph::build(3).unwrap();
        let j = g.co_coverable(rank("123")).unwrap();
        assert!(j.contains(rank("132").r as usize));
        assert!(!j.contains(rank("321").r as usize));
        assert!(!j.contains(rank("123").r as usize));

        let g1 = CoverageGraph::build(1).unwrap();
        assert!(g1.co_coverable(rank("1")).unwrap().is_empty());

        let g4 = CoverageGraph::build(4).unwrap();
        for pi in 0..24u64 {
            let a = PermRank { n: 4, r: pi };
            let brute = (0..24u64)
                .filter(|&b| b != pi)
                .filter(|&b| !g4.joint_covers(a, PermRank { n: 4, r: b }).unwrap().is_empty())
                .count();
            let j = g4.co_coverable(a).unwrap();
            assert_eq!(j.count(), brute);
            assert!(j.count() <= 64);
        }
    }

    #[test]
    fn co_coverability_is_symmetric() {
        let g = CoverageGraph::build(5).unwrap();
        for pi in 0..120 {
            for (other, c) in g.overlaps(pi) {
                let back = g.overlaps(other as usize);
                let found = back.iter().find(|(q, _)| *q as usize == pi);
                assert_eq!(found.map(|x| x.1), Some(c));
            }
        }
    }

    #[test]
    fn identities_hold_through_six() {
        for n in 1..=6 {
            let report = CoverageGraph::build(n).unwrap().identity_report();
            assert!(report.all_hold(), "{report:?}");
        }
    }

    #[test]
    fn build_is_worker_count_independent() {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| CoverageGraph::build(6).unwrap());
        let b = four.install(|| CoverageGraph::build(6).unwrap());
        assert_eq!(a.cover_data, b.cover_data);
        assert_eq!(a.pattern_data, b.pattern_data);
    }

    #[test]
    fn covers_equivariant_under_symmetries() {
        for n in 1..=4 {
            let g = CoverageGraph::build(n).unwrap();
            for pi in 0..g.pattern_count() as u64 {
                let p = unrank(n, pi).unwrap();
                let base = g.covers_of(PermRank { n, r: pi }).unwrap();
                for op in Symmetry::ALL {
                    let image = p.symmetry(op).rank().unwrap();
                    let mapped: Vec<Permutation> = base
                        .to_perms()
                        .iter()
                        .map(|rho| rho.symmetry(op))
                        .collect();
                    let expected = PermSetBitmap::from_perms(n + 1, &mapped).unwrap();
                    assert_eq!(g.covers_of(image).unwrap(), expected);
                }
            }
        }
    }

    #[test]
    fn build_respects_limits() {
        let limits = Limits { max_n: 4, ..Limits::default() };
        match CoverageGraph::build_with_limits(5, &limits) {
            Err(Error::ResourceLimit { limit: 4, requested: 5, .. }) => {}
            other => panic!("expected resource limit, got {other:?}"),
        }
        assert!(CoverageGraph::build(0).is_err());
    }
}
