use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{check_lambda, CoverCertificate, Method, Status};
use crate::bitmap::PermSetBitmap;
use crate::construct::bounds::pigeonhole_lower;
use crate::error::Result;
use crate::graph::CoverageGraph;

/// Greedy multicover: repeatedly take the `ρ` that helps the most still
/// deficient patterns, lowest rank first on ties.
///
/// Gains only ever decrease, so stale heap entries are re-scored lazily; an
/// entry whose fresh gain equals its stored gain is a true maximum.
pub fn greedy_cover(g: &CoverageGraph, lambda: u32) -> Result<CoverCertificate> {
    check_lambda(g, lambda)?;
    let start = Instant::now();
    let mut deficiency = vec![lambda; g.pattern_count()];
    let mut remaining = g.pattern_count() as u64 * lambda as u64;
    let mut selected = PermSetBitmap::empty(g.n() + 1);

    let gain = |deficiency: &[u32], rho: usize| {
        g.patterns(rho)
            .iter()
            .filter(|&&pi| deficiency[pi as usize] > 0)
            .count()
    };

    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = (0..g.cover_count())
        .map(|rho| (g.patterns(rho).len(), Reverse(rho)))
        .collect();

    while remaining > 0 {
        let (stored, Reverse(rho)) = heap.pop().expect("λ ≤ n²+1 keeps the instance feasible");
        let fresh = gain(&deficiency, rho);
        if fresh == 0 {
            continue;
        }
        if fresh < stored {
            heap.push((fresh, Reverse(rho)));
            continue;
        }
        selected.insert(rho);
        for &pi in g.patterns(rho) {
            let d = &mut deficiency[pi as usize];
            if *d > 0 {
                *d -= 1;
                remaining -= 1;
            }
        }
    }

    Ok(CoverCertificate {
        n: g.n(),
        lambda,
        selected,
        status: Status::Feasible,
        lower_bound: pigeonhole_lower(g.n(), lambda),
        method: Method::Greedy,
        seed: None,
        wall_time: start.elapsed(),
        draws: None,
        initial_size: None,
    })
}
