//! Exact minimum-cost broadcasting on tiny trees.
//!
//! A memoised search over `(informed set, steps left)`. Each step every
//! informed vertex either stays idle or calls one uninformed vertex, subject
//! to the usual edge-disjointness and single-receive rules; idle choices are
//! enumerated too, since holding back can make later calls cheaper.

use std::collections::HashMap;

use crate::algorithms::Algorithm;
use crate::bounds::{self, ceil_log2, Rational};
use crate::error::{Error, Result};
use crate::ktree::{CompleteKTree, VertexRef};
use crate::schedule::{Call, Schedule};

pub const DEFAULT_CAP: u64 = 7;
// Vertex and edge sets are u64 bitmasks.
const HARD_CAP: u64 = 63;

#[derive(Debug, Clone)]
pub struct Optimum {
    pub cost: u64,
    pub time_budget: u32,
    pub witness: Schedule,
}

/// Minimum total cost of a valid broadcast from `u` finishing within
/// `time_budget` steps (default `⌈log₂ n⌉`), with the default size cap.
pub fn optimal_cost(tree: &CompleteKTree, u: VertexRef, time_budget: Option<u32>) -> Result<Optimum> {
    optimal_cost_capped(tree, u, time_budget, DEFAULT_CAP)
}

pub fn optimal_cost_capped(
    tree: &CompleteKTree,
    u: VertexRef,
    time_budget: Option<u32>,
    cap: u64,
) -> Result<Optimum> {
    let n = tree.n();
    if n > cap.min(HARD_CAP) {
        return Err(Error::TooLarge { n, cap: cap.min(HARD_CAP) });
    }
    let budget = time_budget.unwrap_or_else(|| ceil_log2(n as u128));
    let mut search = Search::new(tree);
    let start = 1u64 << (u.id() - 1);
    let cost = search.best(start, budget).ok_or_else(|| {
        Error::PreconditionViolated(format!("no broadcast finishes within {budget} steps"))
    })?;

    let mut witness = Schedule::new(tree.clone(), u, "oracle");
    let (mut mask, mut left) = (start, budget);
    while mask != search.full {
        let calls = search.choice[&(mask, left)].clone();
        let mut step = Vec::with_capacity(calls.len());
        for &(s, d) in &calls {
            step.push(Call::new(tree, tree.vertex_by_id(s as u64 + 1)?, tree.vertex_by_id(d as u64 + 1)?)?);
            mask |= 1 << d;
        }
        witness.push_step(step);
        left -= 1;
    }
    Ok(Optimum { cost, time_budget: budget, witness })
}

struct Search {
    n: usize,
    full: u64,
    // Edge mask and length of the path between vertex indices.
    paths: Vec<Vec<(u64, u64)>>,
    memo: HashMap<(u64, u32), Option<u64>>,
    choice: HashMap<(u64, u32), Vec<(usize, usize)>>,
}

impl Search {
    fn new(tree: &CompleteKTree) -> Self {
        let n = tree.n() as usize;
        let vertices: Vec<VertexRef> = (1..=n as u64).map(|id| tree.vertex_by_id(id).unwrap()).collect();
        let paths = vertices
            .iter()
            .map(|&a| {
                vertices
                    .iter()
                    .map(|&b| {
                        let p = tree.path(a, b).unwrap_or_default();
                        // Edge ids are child ids, 2..=n.
                        let mask = p.iter().fold(0u64, |m, e| m | 1 << (e.child() - 1));
                        (mask, p.len() as u64)
                    })
                    .collect()
            })
            .collect();
        Search {
            n,
            full: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
            paths,
            memo: HashMap::new(),
            choice: HashMap::new(),
        }
    }

    /// Cheapest completion from `mask` with `left` steps, if any.
    fn best(&mut self, mask: u64, left: u32) -> Option<u64> {
        if mask == self.full {
            return Some(0);
        }
        let informed = mask.count_ones() as u64;
        if left == 0 || informed.checked_shl(left).is_some_and(|cap| cap < self.n as u64) {
            return None;
        }
        if let Some(&v) = self.memo.get(&(mask, left)) {
            return v;
        }
        let senders: Vec<usize> = (0..self.n).filter(|&i| mask & 1 << i != 0).collect();
        let mut options = Vec::new();
        self.enumerate(&senders, 0, mask, 0, 0, &mut Vec::new(), &mut options);

        let mut best: Option<(u64, Vec<(usize, usize)>)> = None;
        for (calls, cost) in options {
            let next = calls.iter().fold(mask, |m, &(_, d)| m | 1 << d);
            // Each still-uninformed vertex needs at least one edge.
            let floor = cost + (self.n as u64 - next.count_ones() as u64);
            if best.as_ref().is_some_and(|(b, _)| floor >= *b) {
                continue;
            }
            if let Some(rest) = self.best(next, left - 1) {
                if best.as_ref().is_none_or(|(b, _)| cost + rest < *b) {
                    best = Some((cost + rest, calls));
                }
            }
        }
        let result = best.map(|(c, calls)| {
            self.choice.insert((mask, left), calls);
            c
        });
        self.memo.insert((mask, left), result);
        result
    }

    /// Every non-empty set of compatible calls from `senders[i..]`.
    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        senders: &[usize],
        i: usize,
        targeted: u64,
        edges: u64,
        cost: u64,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<(Vec<(usize, usize)>, u64)>,
    ) {
        if i == senders.len() {
            if !current.is_empty() {
                out.push((current.clone(), cost));
            }
            return;
        }
        self.enumerate(senders, i + 1, targeted, edges, cost, current, out);
        let s = senders[i];
        for d in 0..self.n {
            if targeted & 1 << d != 0 {
                continue;
            }
            let (pm, len) = self.paths[s][d];
            if pm & edges != 0 {
                continue;
            }
            current.push((s, d));
            self.enumerate(senders, i + 1, targeted | 1 << d, edges | pm, cost + len, current, out);
            current.pop();
        }
    }
}

/// One algorithm's schedule next to the optimum for the same duration.
#[derive(Debug, Clone)]
pub struct AlgorithmCost {
    pub algorithm: Algorithm,
    pub cost: u64,
    pub time: u32,
    pub optimum_at_time: u64,
}

#[derive(Debug, Clone)]
pub struct BracketReport {
    pub lower: Rational,
    /// Optimum within `⌈log₂ n⌉` steps.
    pub optimal: u64,
    pub algorithms: Vec<AlgorithmCost>,
    pub dispatched: Algorithm,
    pub dispatched_upper: Rational,
    pub time_limit: u32,
}

impl BracketReport {
    /// `lower ≤ optimal ≤ dispatched bound`, and no algorithm beats the
    /// optimum for its own number of steps. Schedules slower than the limit
    /// are measured against the correspondingly relaxed optimum.
    pub fn holds(&self) -> bool {
        let opt = Rational::from_integer(self.optimal.into());
        self.lower <= opt
            && opt <= self.dispatched_upper
            && self.algorithms.iter().all(|a| a.optimum_at_time <= a.cost)
    }
}

pub fn check_bracket(tree: &CompleteKTree, u: VertexRef) -> Result<BracketReport> {
    check_bracket_capped(tree, u, DEFAULT_CAP)
}

pub fn check_bracket_capped(tree: &CompleteKTree, u: VertexRef, cap: u64) -> Result<BracketReport> {
    let opt = optimal_cost_capped(tree, u, None, cap)?;
    let report = bounds::report(tree.k(), tree.r(), false)?;
    let mut algorithms = Vec::new();
    for a in Algorithm::ALL {
        let s = a.run(tree, u);
        let at_time = optimal_cost_capped(tree, u, Some(s.total_time()), cap)?;
        algorithms.push(AlgorithmCost {
            algorithm: a,
            cost: s.total_cost(),
            time: s.total_time(),
            optimum_at_time: at_time.cost,
        });
    }
    Ok(BracketReport {
        lower: report.lower.clone(),
        optimal: opt.cost,
        algorithms,
        dispatched: report.case.algorithm,
        dispatched_upper: report.dispatched_upper().clone(),
        time_limit: report.time_limit,
    })
}
