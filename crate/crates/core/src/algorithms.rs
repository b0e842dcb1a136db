//! End-to-end broadcasts and the dispatcher choosing between them.
//!
//! * [`alg1`] fills the tree level by level; each round runs a star from
//!   every vertex of the level above: the parent calls its children one per
//!   step and informed children call their siblings through the parent.
//! * [`alg2`] informs the level above the leaves, then runs the leaf stars
//!   while the up-call phase informs everything above that level.
//! * [`alg3`] informs the leaves and performs the up-call phase in the step
//!   that completes them.
//!
//! All three are built on [`Planner`], so every schedule they return is
//! valid by construction; when a nominal step cannot be honoured, the
//! schedule is stretched or rerouted and the change is recorded as a
//! [`Deviation`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::bounds::{ceil_log2, ceil_log2_big};
use crate::error::{Error, Result};
use crate::ktree::{CompleteKTree, VertexRef};
use crate::planner::Planner;
use crate::procedures::{place_upcalls, upcall_plan, LevelBroadcast};
use crate::schedule::{Deviation, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Alg1,
    Alg2,
    Alg3,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Alg1, Algorithm::Alg2, Algorithm::Alg3];

    /// 1, 2 or 3.
    pub fn number(self) -> u8 {
        match self {
            Algorithm::Alg1 => 1,
            Algorithm::Alg2 => 2,
            Algorithm::Alg3 => 3,
        }
    }

    pub fn run(self, tree: &CompleteKTree, u: VertexRef) -> Schedule {
        match self {
            Algorithm::Alg1 => alg1(tree, u),
            Algorithm::Alg2 => alg2(tree, u),
            Algorithm::Alg3 => alg3(tree, u),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alg{}", self.number())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alg1" => Ok(Algorithm::Alg1),
            "alg2" => Ok(Algorithm::Alg2),
            "alg3" => Ok(Algorithm::Alg3),
            _ => Err(Error::Malformed(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// The dispatcher's choice together with the quantities it compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DispatchCase {
    pub algorithm: Algorithm,
    /// `⌈log₂ n⌉`
    pub time_limit: u32,
    /// `r·⌈log₂(k+1)⌉`, the length of the level-by-level broadcast.
    pub layered_time: u32,
    /// `⌈log₂(n − k^r)⌉ + ⌈log₂(k+1)⌉`, the length of the two-round broadcast.
    pub two_phase_time: u32,
}

/// Picks the cheapest algorithm that still finishes in `⌈log₂ n⌉` steps.
pub fn lbckt_case(k: u64, r: u32) -> Result<DispatchCase> {
    if k < 2 || r < 1 {
        return Err(Error::InvalidParams { k, r });
    }
    let kr = BigUint::from(k).pow(r);
    let n = (&kr * k - 1u32) / (k - 1);
    let star = ceil_log2(u128::from(k) + 1);
    let time_limit = ceil_log2_big(&n);
    let layered_time = r * star;
    let two_phase_time = ceil_log2_big(&(n - kr)) + star;
    let algorithm = if layered_time <= time_limit {
        Algorithm::Alg1
    } else if two_phase_time <= time_limit {
        Algorithm::Alg2
    } else {
        Algorithm::Alg3
    };
    Ok(DispatchCase {
        algorithm,
        time_limit,
        layered_time,
        two_phase_time,
    })
}

pub fn lbckt(tree: &CompleteKTree, u: VertexRef) -> (Schedule, DispatchCase) {
    let case = lbckt_case(tree.k(), tree.r()).expect("tree parameters already validated");
    (case.algorithm.run(tree, u), case)
}

fn star_steps(k: u64) -> u32 {
    ceil_log2(u128::from(k) + 1)
}

/// One step of the stars centred at `centres`: every informed centre calls
/// its first uninformed child, then every informed child calls its first
/// uninformed sibling. Returns the number of calls placed.
fn star_step(planner: &mut Planner<'_>, centres: &[VertexRef], t: u32) -> u64 {
    let tree = planner.tree();
    let mut placed = 0;
    let families: Vec<Vec<VertexRef>> = centres
        .iter()
        .map(|&p| tree.children(p).expect("centres are internal"))
        .collect();
    for (&p, children) in centres.iter().zip(&families) {
        if !planner.informed_before(p, t) {
            continue;
        }
        if let Some(&c) = children.iter().find(|&&c| !planner.is_scheduled(c)) {
            placed += u64::from(planner.try_call(t, p, c));
        }
    }
    for children in &families {
        for &c in children {
            if !planner.informed_before(c, t) || planner.is_sending(c, t) {
                continue;
            }
            if let Some(&d) = children.iter().find(|&&d| !planner.is_scheduled(d)) {
                placed += u64::from(planner.try_call(t, c, d));
            }
        }
    }
    planner.reserve_step(t);
    placed
}

/// Runs stars from `centres` starting at step `start` until every child is
/// informed. Returns the last step used.
fn star_round(planner: &mut Planner<'_>, centres: &[VertexRef], start: u32) -> u32 {
    let tree = planner.tree();
    let mut remaining: u64 = centres
        .iter()
        .flat_map(|&p| tree.children(p).expect("centres are internal"))
        .filter(|&c| !planner.is_scheduled(c))
        .count() as u64;
    let mut t = start;
    while remaining > 0 {
        let placed = star_step(planner, centres, t);
        assert!(placed > 0 || t == start, "star round stalled at step {t}");
        remaining -= placed;
        t += 1;
    }
    t - 1
}

fn flag_overrun(planner: &mut Planner<'_>, phase: &str, used: u32, nominal: u32) {
    if used > nominal {
        planner.deviate(Deviation::ExtraSteps {
            phase: phase.to_string(),
            steps: used - nominal,
        });
    }
}

/// Level-by-level broadcast: `r` rounds of `⌈log₂(k+1)⌉` steps.
pub fn alg1(tree: &CompleteKTree, u: VertexRef) -> Schedule {
    let s = star_steps(tree.k());
    let root = tree.root();
    let mut planner = Planner::new(tree, u);

    let mut last = if u == root {
        let last = star_round(&mut planner, &[root], 1);
        flag_overrun(&mut planner, "alg1-round1", last, s);
        last
    } else {
        first_round_from_below(&mut planner, s)
    };
    for j in 2..=tree.r() {
        let centres = tree.level_vertices(j - 1).expect("level within tree");
        let end = star_round(&mut planner, &centres, last + 1);
        flag_overrun(&mut planner, &format!("alg1-round{j}"), end - last, s);
        last = end;
    }
    planner.finish("alg1")
}

// Informs the root and level 1 when the originator is neither the root nor
// can use the root's star. A deeper originator first calls the root, then its
// own level-1 ancestor; level-1 vertices call their siblings through the root
// and, once they have nobody left to call, the root itself.
fn first_round_from_below(planner: &mut Planner<'_>, s: u32) -> u32 {
    let tree = planner.tree();
    let u = planner.originator();
    let root = tree.root();
    let top = tree.level_vertices(1).expect("level 1 exists");
    let deep = u.level() >= 2;
    let ancestor = tree.ancestor_at_level(u, 1).expect("u below the root");

    let mut remaining = top.iter().filter(|&&v| v != u).count() as u64 + 1;
    let mut t = 1;
    if deep {
        planner.try_call(1, u, root);
        planner.reserve_step(1);
        planner.deviate(Deviation::OriginatorDetour {
            extra_cost: u64::from(u.level() - 1),
        });
        remaining -= 1;
        t = 2;
    }
    while remaining > 0 {
        let mut placed = 0;
        if deep && !planner.is_scheduled(ancestor) {
            placed += u64::from(planner.try_call(t, u, ancestor));
        }
        if planner.informed_before(root, t) {
            if let Some(&c) = top.iter().find(|&&c| !planner.is_scheduled(c)) {
                placed += u64::from(planner.try_call(t, root, c));
            }
        }
        for &v in &top {
            if !planner.informed_before(v, t) || planner.is_sending(v, t) {
                continue;
            }
            let next = top.iter().find(|&&c| !planner.is_scheduled(c)).copied();
            let target = match next {
                Some(c) => c,
                None if !planner.is_scheduled(root) => root,
                None => continue,
            };
            placed += u64::from(planner.try_call(t, v, target));
        }
        if deep && !planner.is_sending(u, t) {
            if let Some(&c) = top.iter().find(|&&c| !planner.is_scheduled(c)) {
                placed += u64::from(planner.try_call(t, u, c));
            }
        }
        planner.reserve_step(t);
        assert!(placed > 0, "first round stalled at step {t}");
        remaining -= placed;
        t += 1;
    }
    let last = t - 1;
    flag_overrun(planner, "alg1-round1", last, s);
    last
}

/// Runs the level broadcast to level `j` from step 1; returns its last step.
fn broadcast_to_level(planner: &mut Planner<'_>, j: u32) -> u32 {
    let tree = planner.tree();
    let mut level = LevelBroadcast::new(tree, j, planner.originator());
    let mut t = 0;
    while !level.done() {
        t += 1;
        level.plan_step(planner, t);
    }
    t
}

/// Places the up-call phase from level `j` into `slots`, then into as many
/// extra steps after `last` as needed. Returns the new last step.
fn upcalls_with_fallback(
    planner: &mut Planner<'_>,
    j: u32,
    slots: &[(u32, u32)],
    last: u32,
    phase: &str,
) -> u32 {
    let tree = planner.tree();
    let mut plan = upcall_plan(tree.k(), j).expect("level within tree");
    let (mut unplaced, extra) = place_upcalls(planner, &plan, slots);
    if extra > 0 {
        planner.deviate(Deviation::UpcallSlack { extra_edges: extra });
    }
    let mut end = last.max(planner.last_step());
    let source_levels: Vec<u32> = slots.iter().map(|&(_, l)| l).collect();
    while !unplaced.is_empty() {
        end += 1;
        plan.assignments = unplaced;
        let mut levels = source_levels.clone();
        levels.dedup();
        let extra_slots: Vec<(u32, u32)> = levels.iter().map(|&l| (end, l)).collect();
        let (rest, extra) = place_upcalls(planner, &plan, &extra_slots);
        assert!(rest.len() < plan.assignments.len(), "up-calls stalled at step {end}");
        if extra > 0 {
            planner.deviate(Deviation::UpcallSlack { extra_edges: extra });
        }
        unplaced = rest;
    }
    if end > last {
        planner.deviate(Deviation::ExtraSteps {
            phase: phase.to_string(),
            steps: end - last,
        });
    }
    end
}

/// Two rounds: level broadcast to the level above the leaves, then leaf stars
/// with the up-call phase spread over the same steps.
pub fn alg2(tree: &CompleteKTree, u: VertexRef) -> Schedule {
    let r = tree.r();
    let s = star_steps(tree.k());
    let root = tree.root();
    let mut planner = Planner::new(tree, u);

    let first_end = if r >= 2 {
        broadcast_to_level(&mut planner, r - 1)
    } else if u != root {
        planner.try_call(1, u, root);
        1
    } else {
        0
    };
    let centres = tree.level_vertices(r - 1).expect("level within tree");
    let end = star_round(&mut planner, &centres, first_end + 1);
    flag_overrun(&mut planner, "alg2-stars", end - first_end, s);

    if r >= 2 {
        // idle sources on the level itself first, then leaves below them
        let mut slots: Vec<(u32, u32)> = (first_end..=end).map(|t| (t, r - 1)).collect();
        slots.extend((first_end + 1..=end).map(|t| (t, r)));
        upcalls_with_fallback(&mut planner, r - 1, &slots, end, "alg2-upcalls");
    }
    planner.finish("alg2")
}

/// Level broadcast to the leaves with the up-call phase merged into its
/// final step. If the up-calls do not fit there they run in one extra step.
pub fn alg3(tree: &CompleteKTree, u: VertexRef) -> Schedule {
    let r = tree.r();
    let mut planner = Planner::new(tree, u);
    let above: Vec<VertexRef> = (0..r)
        .flat_map(|l| tree.level_vertices(l).expect("level within tree"))
        .filter(|&v| v != u)
        .collect();
    if let Some(mut level) = LevelBroadcast::merged(tree, r, u, &above) {
        let mut t = 0;
        while !level.done() {
            t += 1;
            level.plan_step(&mut planner, t);
        }
    } else {
        let last = broadcast_to_level(&mut planner, r);
        upcalls_with_fallback(&mut planner, r, &[(last + 1, r)], last, "alg3-overlap");
    }
    planner.finish("alg3")
}
