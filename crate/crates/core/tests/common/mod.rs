//! Oracles that share nothing with the library's graph: containment is
//! decided by `Permutation::covers` on explicit permutations, enumerated in
//! lexicographic order with a plain next-permutation step.
#![allow(dead_code)]

use permcover_core::Permutation;

/// All permutations of `1..=n` in lexicographic order.
pub fn lex_perms(n: usize) -> Vec<Permutation> {
    let mut cur: Vec<u32> = (1..=n as u32).collect();
    let mut out = vec![Permutation::new(cur.clone()).unwrap()];
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(Permutation::new(cur.clone()).unwrap());
    }
}

/// `masks[ρ]` has bit `π` set when the `ρ`-th `(n+1)`-permutation covers
/// the `π`-th `n`-permutation (ranks are lexicographic positions).
pub fn cover_masks(n: usize) -> Vec<u64> {
    let patterns = lex_perms(n);
    assert!(patterns.len() <= 64);
    lex_perms(n + 1)
        .iter()
        .map(|rho| {
            patterns
                .iter()
                .enumerate()
                .filter(|(_, pi)| rho.covers(pi).unwrap())
                .fold(0u64, |m, (i, _)| m | 1 << i)
        })
        .collect()
}

/// Exact law of the uncovered count `X` when every member of `S_{n+1}` is
/// kept independently with probability `p`, by summing over all subsets.
pub fn exhaustive_pmf(n: usize, p: f64) -> Vec<f64> {
    let masks = cover_masks(n);
    let universe = masks.len();
    assert!(universe <= 24, "2^{universe} subsets is too many");
    let patterns = lex_perms(n).len();
    let full = if patterns == 64 { u64::MAX } else { (1u64 << patterns) - 1 };
    let mut pmf = vec![0.0; patterns + 1];
    for subset in 0u32..(1 << universe) {
        let mut covered = 0u64;
        for (rho, &m) in masks.iter().enumerate() {
            if subset >> rho & 1 == 1 {
                covered |= m;
            }
        }
        let k = subset.count_ones() as i32;
        let weight = p.powi(k) * (1.0 - p).powi(universe as i32 - k);
        pmf[(full & !covered).count_ones() as usize] += weight;
    }
    pmf
}

pub fn moments(pmf: &[f64]) -> (f64, f64) {
    let mean: f64 = pmf.iter().enumerate().map(|(k, w)| k as f64 * w).sum();
    let var: f64 = pmf.iter().enumerate().map(|(k, w)| (k as f64 - mean).powi(2) * w).sum();
    (mean, var)
}

/// Smallest number of `(n+1)`-permutations covering all of `S_n`, by
/// exhaustive search: the lowest uncovered pattern must be covered by one of
/// the chosen members, so branch over its covers. Returns the size and one
/// witness (lexicographic positions).
pub fn min_cover_exhaustive(n: usize) -> (usize, Vec<usize>) {
    let masks = cover_masks(n);
    let patterns = lex_perms(n).len();
    let full = if patterns == 64 { u64::MAX } else { (1u64 << patterns) - 1 };
    fn search(masks: &[u64], full: u64, covered: u64, left: usize, chosen: &mut Vec<usize>) -> bool {
        if covered == full {
            return true;
        }
        if left == 0 {
            return false;
        }
        let need = (!covered & full).trailing_zeros();
        for (rho, &m) in masks.iter().enumerate() {
            if m >> need & 1 == 1 {
                chosen.push(rho);
                if search(masks, full, covered | m, left - 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    for k in 1..=masks.len() {
        let mut chosen = Vec::new();
        if search(&masks, full, 0, k, &mut chosen) {
            return (k, chosen);
        }
    }
    unreachable!("S_{{n+1}} covers S_n")
}
