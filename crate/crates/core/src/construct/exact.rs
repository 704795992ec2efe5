//! Branch-and-bound for minimum set multicover.
//!
//! Each node branches on one deficient pattern (chosen by a [`BranchRule`])
//! and tries its still-available covers in rank order; a cover rejected in
//! one branch is excluded from the later siblings, so no subset is visited
//! twice. Nodes are pruned with
//! `size + ⌈remaining deficiency / best single-member gain⌉ ≥ incumbent`.
//! The incumbent starts from the greedy cover.
//!
//! The search is single-threaded, so the returned witness is the first
//! optimum met in this fixed branching order. The optimal size itself does
//! not depend on the branching rule.

use std::time::{Duration, Instant};

use super::bounds::pigeonhole_lower;
use super::greedy::greedy_cover;
use super::{check_lambda, CoverCertificate, Method, Status};
use crate::bitmap::PermSetBitmap;
use crate::error::{Error, Result};
use crate::graph::CoverageGraph;

/// Chooses the pattern to branch on.
pub trait BranchRule {
    /// Index of a pattern with positive deficiency, or `None` if all are met.
    fn pick(&self, deficiency: &[u32]) -> Option<usize>;
}

/// Largest remaining deficiency, lowest rank among ties.
#[derive(Debug, Default, Clone, Copy)]
pub struct MostDeficientLowestRank;

impl BranchRule for MostDeficientLowestRank {
    fn pick(&self, deficiency: &[u32]) -> Option<usize> {
        let mut best: Option<(u32, usize)> = None;
        for (pi, &d) in deficiency.iter().enumerate() {
            if d > 0 && best.is_none_or(|(bd, _)| d > bd) {
                best = Some((d, pi));
            }
        }
        best.map(|(_, pi)| pi)
    }
}

pub fn exact_min_cover(g: &CoverageGraph, lambda: u32, budget: Duration) -> Result<CoverCertificate> {
    exact_min_cover_with(g, lambda, budget, &MostDeficientLowestRank)
}

pub fn exact_min_cover_with(
    g: &CoverageGraph,
    lambda: u32,
    budget: Duration,
    rule: &dyn BranchRule,
) -> Result<CoverCertificate> {
    check_lambda(g, lambda)?;
    if budget.is_zero() {
        return Err(Error::invalid("time budget must be positive"));
    }
    let start = Instant::now();
    let greedy = greedy_cover(g, lambda)?;
    let incumbent: Vec<u32> = greedy.selected.iter().map(|r| r as u32).collect();

    let mut search = Search {
        g,
        rule,
        deficiency: vec![lambda; g.pattern_count()],
        remaining: g.pattern_count() as u64 * lambda as u64,
        available: vec![true; g.cover_count()],
        chosen: Vec::new(),
        best_size: incumbent.len(),
        best: incumbent,
        deadline: start + budget,
        nodes: 0,
        timed_out: false,
    };
    let root_bound = search
        .node_bound()
        .unwrap_or(0)
        .max(pigeonhole_lower(g.n(), lambda) as usize);
    search.dfs();

    let selected = PermSetBitmap::from_ranks(g.n() + 1, search.best.iter().copied())?;
    let (status, lower_bound) = if search.timed_out {
        (Status::Feasible, root_bound as u64)
    } else {
        (Status::Optimal, search.best_size as u64)
    };
    Ok(CoverCertificate {
        n: g.n(),
        lambda,
        selected,
        status,
        lower_bound,
        method: Method::Exact,
        seed: None,
        wall_time: start.elapsed(),
        draws: None,
        initial_size: None,
    })
}

struct Search<'a> {
    g: &'a CoverageGraph,
    rule: &'a dyn BranchRule,
    deficiency: Vec<u32>,
    remaining: u64,
    available: Vec<bool>,
    chosen: Vec<u32>,
    best: Vec<u32>,
    best_size: usize,
    deadline: Instant,
    nodes: u64,
    timed_out: bool,
}

impl Search<'_> {
    /// Lower bound on the final size below this node, `None` if no
    /// completion exists.
    fn node_bound(&self) -> Option<usize> {
        let max_gain = (0..self.g.cover_count())
            .filter(|&rho| self.available[rho])
            .map(|rho| {
                self.g
                    .patterns(rho)
                    .iter()
                    .filter(|&&pi| self.deficiency[pi as usize] > 0)
                    .count() as u64
            })
            .max()
            .unwrap_or(0);
        if max_gain == 0 {
            return (self.remaining == 0).then_some(self.chosen.len());
        }
        Some(self.chosen.len() + self.remaining.div_ceil(max_gain) as usize)
    }

    fn dfs(&mut self) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes & 1023 == 0 && Instant::now() >= self.deadline {
            self.timed_out = true;
            return;
        }
        if self.remaining == 0 {
            if self.chosen.len() < self.best_size {
                self.best_size = self.chosen.len();
                self.best = self.chosen.clone();
            }
            return;
        }
        match self.node_bound() {
            Some(lb) if lb < self.best_size => {}
            _ => return,
        }
        let Some(pi) = self.rule.pick(&self.deficiency) else {
            return;
        };
        let candidates: Vec<u32> = self
            .g
            .covers(pi)
            .iter()
            .copied()
            .filter(|&rho| self.available[rho as usize])
            .collect();

        let mut excluded = Vec::new();
        for (k, &rho) in candidates.iter().enumerate() {
            if ((candidates.len() - k) as u32) < self.deficiency[pi] {
                break;
            }
            let touched = self.select(rho);
            self.dfs();
            self.unselect(rho, &touched);
            excluded.push(rho);
            if self.timed_out {
                break;
            }
        }
        for rho in excluded {
            self.available[rho as usize] = true;
        }
    }

    fn select(&mut self, rho: u32) -> Vec<u32> {
        self.available[rho as usize] = false;
        self.chosen.push(rho);
        let mut touched = Vec::new();
        for &pi in self.g.patterns(rho as usize) {
            let d = &mut self.deficiency[pi as usize];
            if *d > 0 {
                *d -= 1;
                self.remaining -= 1;
                touched.push(pi);
            }
        }
        touched
    }

    /// Undoes `select` but leaves `rho` unavailable for the later siblings.
    fn unselect(&mut self, rho: u32, touched: &[u32]) {
        self.chosen.pop();
        debug_assert!(!self.available[rho as usize]);
        for &pi in touched {
            self.deficiency[pi as usize] += 1;
            self.remaining += 1;
        }
    }
}
