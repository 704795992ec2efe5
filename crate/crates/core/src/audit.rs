//! Pairwise joint-coverage audit.
//!
//! For every pattern `π` the audit collects `J_π` (partners sharing a cover)
//! and the overlap `|C_{π,π′}|` with each of them, then checks the two
//! bounds `|J_π| ≤ n³` and `|C_{π,π′}| ≤ 4`, and compares the pairs reaching
//! 4 against pairs related by one swap of adjacent positions. Two readings of
//! "adjacent swap" are checked side by side; mismatches are reported as
//! counterexamples rather than assumed away.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::CoverageGraph;
use crate::perm::{rank_slice, unrank, unrank_into, Permutation};
use crate::Limits;

/// Counterexamples kept per interpretation; totals are always exact.
const MAX_COUNTEREXAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapInterpretation {
    /// `π′` is `π` with two neighbouring positions exchanged.
    AdjacentPositions,
    /// As above, and the two exchanged values also differ by one.
    AdjacentPositionsAndValues,
}

impl SwapInterpretation {
    pub const ALL: [SwapInterpretation; 2] = [
        SwapInterpretation::AdjacentPositions,
        SwapInterpretation::AdjacentPositionsAndValues,
    ];
}

#[derive(Debug, Clone, Serialize)]
pub struct SwapCheck {
    pub interpretation: SwapInterpretation,
    /// Ordered pairs related by a swap under this reading.
    pub swap_pair_count: usize,
    /// Ordered pairs with four joint covers that are not such a swap.
    pub four_without_swap: usize,
    /// Swap pairs whose joint cover count is not four.
    pub swap_without_four: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub interpretation: SwapInterpretation,
    pub pi: Permutation,
    pub pi2: Permutation,
    pub joint_cover_count: usize,
    pub is_swap: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct JointReport {
    pub n: usize,
    #[serde(rename = "max_J")]
    pub max_j: usize,
    #[serde(rename = "argmax_J")]
    pub argmax_j: Option<Permutation>,
    #[serde(rename = "max_C")]
    pub max_c: usize,
    pub four_cover_pair_count: usize,
    /// Ordered `(π, π′)` rank pairs with `|C_{π,π′}| = 4`.
    #[serde(skip)]
    pub four_cover_pairs: Vec<(u32, u32)>,
    /// True when at least one interpretation matches the four-cover pairs exactly.
    pub adjacent_swap_iff_holds: bool,
    pub swap_checks: Vec<SwapCheck>,
    pub counterexamples: Vec<Counterexample>,
    /// Ordered pairs by overlap size; index `c` counts pairs with `|C| = c`.
    pub overlap_histogram: Vec<u64>,
    /// `None` for an exhaustive audit, otherwise the number of sampled patterns.
    pub sampled_patterns: Option<usize>,
    pub violations: Vec<String>,
}

impl JointReport {
    pub fn check(&self, interpretation: SwapInterpretation) -> &SwapCheck {
        self.swap_checks
            .iter()
            .find(|c| c.interpretation == interpretation)
            .expect("both interpretations are always checked")
    }
}

struct PatternAudit {
    pi: u32,
    j_size: usize,
    max_c: usize,
    hist: Vec<u64>,
    four: Vec<u32>,
    // (partner, overlap) for each swap partner, per interpretation
    swaps: [Vec<(u32, usize)>; 2],
}

/// Exhaustive audit over all ordered pairs of `S_n`.
pub fn lemma5_audit(g: &CoverageGraph, limits: &Limits) -> Result<JointReport> {
    g.check_pair_budget(limits)?;
    let all: Vec<usize> = (0..g.pattern_count()).collect();
    Ok(assemble(g, &all, None))
}

/// Audit restricted to pairs whose first member is one of `samples` distinct
/// patterns drawn uniformly with the given seed. Used beyond the exhaustive
/// budget; the report records the sample size.
pub fn lemma5_audit_sampled(g: &CoverageGraph, samples: usize, seed: u64) -> Result<JointReport> {
    if samples == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    let samples = samples.min(g.pattern_count());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, g.pattern_count(), samples).into_vec();
    picked.sort_unstable();
    Ok(assemble(g, &picked, Some(samples)))
}

fn audit_pattern(g: &CoverageGraph, pi: usize) -> PatternAudit {
    let n = g.n();
    let overlaps = g.overlaps(pi);
    let mut hist = vec![0u64; 5];
    let mut max_c = 0;
    let mut four = Vec::new();
    for &(other, c) in &overlaps {
        let c = c as usize;
        if hist.len() <= c {
            hist.resize(c + 1, 0);
        }
        hist[c] += 1;
        max_c = max_c.max(c);
        if c == 4 {
            four.push(other);
        }
    }

    let overlap_with = |other: u32| {
        overlaps
            .binary_search_by_key(&other, |&(q, _)| q)
            .map(|i| overlaps[i].1 as usize)
            .unwrap_or(0)
    };
    let mut perm = vec![0u8; n];
    unrank_into(pi as u64, &mut perm);
    let mut swaps: [Vec<(u32, usize)>; 2] = [Vec::new(), Vec::new()];
    for i in 0..n.saturating_sub(1) {
        let values_adjacent = perm[i].abs_diff(perm[i + 1]) == 1;
        perm.swap(i, i + 1);
        let other = rank_slice(&perm) as u32;
        perm.swap(i, i + 1);
        let c = overlap_with(other);
        swaps[0].push((other, c));
        if values_adjacent {
            swaps[1].push((other, c));
        }
    }

    PatternAudit {
        pi: pi as u32,
        j_size: overlaps.len(),
        max_c,
        hist,
        four,
        swaps,
    }
}

fn assemble(g: &CoverageGraph, patterns: &[usize], sampled: Option<usize>) -> JointReport {
    let n = g.n();
    let audits: Vec<PatternAudit> = patterns.par_iter().map(|&pi| audit_pattern(g, pi)).collect();
    let name = |r: u32| unrank(n, r as u64).expect("rank within S_n");

    let mut max_j = 0;
    let mut argmax = None;
    let mut max_c = 0;
    let mut hist = vec![0u64; 5];
    let mut four_pairs = Vec::new();
    for a in &audits {
        if argmax.is_none() || a.j_size > max_j {
            max_j = a.j_size;
            argmax = Some(a.pi);
        }
        max_c = max_c.max(a.max_c);
        if hist.len() < a.hist.len() {
            hist.resize(a.hist.len(), 0);
        }
        for (c, v) in a.hist.iter().enumerate() {
            hist[c] += v;
        }
        four_pairs.extend(a.four.iter().map(|&o| (a.pi, o)));
    }

    let mut swap_checks = Vec::new();
    let mut counterexamples = Vec::new();
    for (k, interpretation) in SwapInterpretation::ALL.into_iter().enumerate() {
        let mut swap_pairs = 0;
        let mut swap_without_four = 0;
        let mut four_without_swap = 0;
        let mut examples = Vec::new();
        for a in &audits {
            swap_pairs += a.swaps[k].len();
            for &(other, c) in &a.swaps[k] {
                if c != 4 {
                    swap_without_four += 1;
                    if examples.len() < MAX_COUNTEREXAMPLES {
                        examples.push(Counterexample {
                            interpretation,
                            pi: name(a.pi),
                            pi2: name(other),
                            joint_cover_count: c,
                            is_swap: true,
                        });
                    }
                }
            }
            for &other in &a.four {
                if !a.swaps[k].iter().any(|&(q, _)| q == other) {
                    four_without_swap += 1;
                    if examples.len() < MAX_COUNTEREXAMPLES {
                        examples.push(Counterexample {
                            interpretation,
                            pi: name(a.pi),
                            pi2: name(other),
                            joint_cover_count: 4,
                            is_swap: false,
                        });
                    }
                }
            }
        }
        swap_checks.push(SwapCheck {
            interpretation,
            swap_pair_count: swap_pairs,
            four_without_swap,
            swap_without_four,
            holds: four_without_swap == 0 && swap_without_four == 0,
        });
        counterexamples.extend(examples);
    }
    let iff_holds = swap_checks.iter().any(|c| c.holds);

    let mut violations = Vec::new();
    let cube = n * n * n;
    if max_j > cube {
        violations.push(format!("max |J_pi| = {max_j} exceeds n^3 = {cube}"));
    }
    if max_c > 4 {
        violations.push(format!("max |C_pi,pi'| = {max_c} exceeds 4"));
    }
    if !iff_holds {
        let detail: Vec<String> = swap_checks
            .iter()
            .map(|c| {
                format!(
                    "{:?}: {} four-cover pairs are not swaps, {} swaps lack four covers",
                    c.interpretation, c.four_without_swap, c.swap_without_four
                )
            })
            .collect();
        violations.push(format!(
            "four joint covers do not coincide with adjacent swaps under either reading ({})",
            detail.join("; ")
        ));
    }

    JointReport {
        n,
        max_j,
        argmax_j: argmax.map(name),
        max_c,
        four_cover_pair_count: four_pairs.len(),
        four_cover_pairs: four_pairs,
        adjacent_swap_iff_holds: iff_holds,
        swap_checks,
        counterexamples,
        overlap_histogram: hist,
        sampled_patterns: sampled,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::PermRank;

    fn brute_force(n: usize) -> (usize, usize, usize) {
        let g = CoverageGraph::build(n).unwrap();
        let m = g.pattern_count() as u64;
        let (mut max_j, mut max_c, mut fours) = (0, 0, 0);
        for a in 0..m {
            let mut j = 0;
            for b in 0..m {
                if a == b {
                    continue;
                }
                let c = g
                    .joint_covers(PermRank { n, r: a }, PermRank { n, r: b })
                    .unwrap()
                    .count();
                j += usize::from(c > 0);
                max_c = max_c.max(c);
                fours += usize::from(c == 4);
            }
            max_j = max_j.max(j);
        }
        (max_j, max_c, fours)
    }

    #[test]
    fn n1_is_vacuous() {
        let g = CoverageGraph::build(1).unwrap();
        let r = lemma5_audit(&g, &Limits::default()).unwrap();
        assert_eq!((r.max_j, r.max_c, r.four_cover_pair_count), (0, 0, 0));
        assert!(r.adjacent_swap_iff_holds);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn n3_and_n4_match_pairwise_brute_force() {
        for n in [3, 4] {
            let g = CoverageGraph::build(n).unwrap();
            let r = lemma5_audit(&g, &Limits::default()).unwrap();
            let (max_j, max_c, fours) = brute_force(n);
            assert_eq!(r.max_j, max_j);
            assert_eq!(r.max_c, max_c);
            assert_eq!(r.four_cover_pair_count, fours);
            assert_eq!(r.max_c, 4);
            assert!(r.max_j <= n * n * n);
        }
    }

    #[test]
    fn n3_reports_a_non_swap_pair_with_four_covers() {
        let g = CoverageGraph::build(3).unwrap();
        let r = lemma5_audit(&g, &Limits::default()).unwrap();
        // 132 and 213 differ by a 3-cycle, not a swap.
        let a: Permutation = "132".parse().unwrap();
        let b: Permutation = "213".parse().unwrap();
        let c = g.joint_covers(a.rank().unwrap(), b.rank().unwrap()).unwrap();
        assert_eq!(c.count(), 4);
        assert!(r
            .counterexamples
            .iter()
            .any(|x| !x.is_swap && x.joint_cover_count == 4));
        assert!(!r.adjacent_swap_iff_holds);
        assert!(!r.violations.is_empty());
    }

    #[test]
    fn swaps_with_adjacent_values_always_reach_four() {
        for n in 2..=5 {
            let g = CoverageGraph::build(n).unwrap();
            let r = lemma5_audit(&g, &Limits::default()).unwrap();
            assert_eq!(
                r.check(SwapInterpretation::AdjacentPositionsAndValues).swap_without_four,
                0
            );
        }
    }

    #[test]
    fn budget_is_enforced_and_sampling_is_deterministic() {
        let g = CoverageGraph::build(5).unwrap();
        let tight = Limits { pair_max_n: 4, ..Limits::default() };
        assert!(matches!(lemma5_audit(&g, &tight), Err(Error::ResourceLimit { .. })));
        let a = lemma5_audit_sampled(&g, 30, 9).unwrap();
        let b = lemma5_audit_sampled(&g, 30, 9).unwrap();
        assert_eq!(a.sampled_patterns, Some(30));
        assert_eq!(a.four_cover_pairs, b.four_cover_pairs);
        assert!(a.max_c <= 4);
    }
}
