//! One step of simultaneous calls, chosen as a pairing in the tree.
//!
//! Every vertex is absent, a member (informed and free to call or to be
//! the one informed by a fellow member) or a receiver (must be informed by
//! some member). Calls of one step use edge-disjoint paths exactly when each
//! edge carries at most one endpoint up to its meeting point, so the choice
//! is a dynamic programme over "what travels up this edge": nothing, a
//! member, or a receiver still looking for a caller.
//!
//! Member-member pairs are traded against edges with a weight `λ`; the
//! smallest weight producing enough pairs is found by bisection.

use crate::ktree::{CompleteKTree, VertexRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Role {
    Absent,
    Member,
    Receiver,
}

/// Calls of one step: `(member, receiver)` for each receiver, and member
/// pairs (unordered) cheapest first.
#[derive(Debug, Default)]
pub(crate) struct StepPairing {
    pub serve: Vec<(VertexRef, VertexRef)>,
    pub pairs: Vec<(VertexRef, VertexRef)>,
}

const NEG: i64 = i64::MIN / 4;
const NONE: usize = 0;
const MEMBER: usize = 1;
const RECEIVER: usize = 2;

/// Serves every receiver and forms at least `want` member pairs (exactly
/// `want` after dropping the longest), spending few edges. `None` if that
/// is impossible in one step.
pub(crate) fn pair_step(tree: &CompleteKTree, roles: &[Role], want: usize) -> Option<StepPairing> {
    let solve = |lambda: i64| {
        let states = Dp::new(tree, roles, lambda).choose()?;
        Some(build(tree, roles, &states))
    };
    let n = tree.n() as i64;
    // with λ above the edge count every extra pair pays for itself
    let mut best = solve(n + 1)?;
    if best.pairs.len() < want {
        return None;
    }
    if best.pairs.len() == want {
        return Some(best);
    }
    let (mut lo, mut hi) = (0, n + 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        match solve(mid) {
            Some(p) if p.pairs.len() >= want => {
                best = p;
                hi = mid;
            }
            _ => lo = mid + 1,
        }
    }
    best.pairs.sort_by_key(|&(a, b)| tree.distance(a, b));
    best.pairs.truncate(want);
    Some(best)
}

struct Dp<'a> {
    tree: &'a CompleteKTree,
    roles: &'a [Role],
    lambda: i64,
    // best[id][state]: score of the subtree when `state` leaves through the
    // edge above it
    best: Vec<[i64; 3]>,
}

impl<'a> Dp<'a> {
    fn new(tree: &'a CompleteKTree, roles: &'a [Role], lambda: i64) -> Self {
        let n = tree.n() as usize;
        let mut dp = Dp {
            tree,
            roles,
            lambda,
            best: vec![[NEG; 3]; n + 1],
        };
        for id in (1..=n).rev() {
            let children = dp.child_ids(id);
            let values: Vec<[i64; 3]> = children.iter().map(|&c| dp.best[c]).collect();
            let table = dp.knapsack(&values, roles[id]);
            for out in [NONE, MEMBER, RECEIVER] {
                dp.best[id][out] = table
                    .last_row()
                    .iter()
                    .enumerate()
                    .filter(|(_, &s)| s > NEG)
                    .filter_map(|(i, &s)| dp.settle(table.diff(i), out).map(|b| s + b))
                    .max()
                    .unwrap_or(NEG);
            }
        }
        dp
    }

    fn child_ids(&self, id: usize) -> Vec<usize> {
        let v = self.tree.vertex_by_id(id as u64).expect("id in tree");
        if self.tree.is_leaf(v) {
            return Vec::new();
        }
        let k = self.tree.k() as usize;
        let first = k * (id - 1) + 2;
        (first..first + k).collect()
    }

    /// Bonus for pairing `diff` (members minus receivers) items at a vertex
    /// and sending `out` upwards.
    fn settle(&self, diff: i64, out: usize) -> Option<i64> {
        match out {
            NONE if diff >= 0 => Some(self.lambda * (diff / 2)),
            MEMBER if diff >= 1 => Some(self.lambda * ((diff - 1) / 2)),
            RECEIVER if diff == -1 => Some(0),
            _ => None,
        }
    }

    fn knapsack(&self, values: &[[i64; 3]], own: Role) -> Table {
        let k = values.len() as i64;
        let mut table = Table::new(values.len(), k + 1);
        let start = match own {
            Role::Absent => 0,
            Role::Member => 1,
            Role::Receiver => -1,
        };
        table.set(0, start, 0, NONE);
        for (i, vals) in values.iter().enumerate() {
            for d in -(k + 1)..=(k + 1) {
                let s = table.get(i, d);
                if s <= NEG {
                    continue;
                }
                for (state, step, edge) in [(NONE, 0, 0), (MEMBER, 1, 1), (RECEIVER, -1, 1)] {
                    if vals[state] <= NEG {
                        continue;
                    }
                    let cand = s + vals[state] - edge;
                    if cand > table.get(i + 1, d + step) {
                        table.set(i + 1, d + step, cand, state);
                    }
                }
            }
        }
        table
    }

    /// State leaving every vertex in an optimal choice, root sending nothing.
    fn choose(&self) -> Option<Vec<usize>> {
        if self.best[1][NONE] <= NEG {
            return None;
        }
        let n = self.tree.n() as usize;
        let mut state = vec![NONE; n + 1];
        for id in 1..=n {
            let children = self.child_ids(id);
            if children.is_empty() {
                continue;
            }
            let values: Vec<[i64; 3]> = children.iter().map(|&c| self.best[c]).collect();
            let table = self.knapsack(&values, self.roles[id]);
            let out = state[id];
            let target = self.best[id][out];
            let mut d = (0..table.width())
                .map(|i| table.diff(i))
                .find(|&d| {
                    let s = table.get(children.len(), d);
                    s > NEG && self.settle(d, out).is_some_and(|b| s + b == target)
                })
                .expect("optimum is attained");
            for i in (0..children.len()).rev() {
                let st = table.choice(i + 1, d);
                state[children[i]] = st;
                d -= [0, 1, -1][st];
            }
        }
        Some(state)
    }
}

// Knapsack rows over children, indexed by running members-minus-receivers.
struct Table {
    offset: i64,
    width: usize,
    score: Vec<i64>,
    pick: Vec<usize>,
}

impl Table {
    fn new(rows: usize, offset: i64) -> Self {
        let width = (2 * offset + 1) as usize;
        Table {
            offset,
            width,
            score: vec![NEG; (rows + 1) * width],
            pick: vec![NONE; (rows + 1) * width],
        }
    }

    fn width(&self) -> usize {
        self.width
    }

    fn diff(&self, i: usize) -> i64 {
        i as i64 - self.offset
    }

    fn idx(&self, row: usize, d: i64) -> Option<usize> {
        let c = d + self.offset;
        (0..self.width as i64).contains(&c).then(|| row * self.width + c as usize)
    }

    fn get(&self, row: usize, d: i64) -> i64 {
        self.idx(row, d).map_or(NEG, |i| self.score[i])
    }

    fn set(&mut self, row: usize, d: i64, s: i64, pick: usize) {
        if let Some(i) = self.idx(row, d) {
            self.score[i] = s;
            self.pick[i] = pick;
        }
    }

    fn choice(&self, row: usize, d: i64) -> usize {
        self.idx(row, d).map_or(NONE, |i| self.pick[i])
    }

    fn last_row(&self) -> &[i64] {
        let rows = self.score.len() / self.width;
        &self.score[(rows - 1) * self.width..]
    }
}

// Turns edge states into concrete calls, bottom-up.
fn build(tree: &CompleteKTree, roles: &[Role], state: &[usize]) -> StepPairing {
    let n = tree.n() as usize;
    let k = tree.k() as usize;
    let mut carried: Vec<Option<(VertexRef, u64)>> = vec![None; n + 1];
    let mut out = StepPairing::default();
    for id in (1..=n).rev() {
        let v = tree.vertex_by_id(id as u64).expect("id in tree");
        let mut members = Vec::new();
        let mut receivers = Vec::new();
        match roles[id] {
            Role::Member => members.push((v, 0)),
            Role::Receiver => receivers.push((v, 0)),
            Role::Absent => {}
        }
        if !tree.is_leaf(v) {
            let first = k * (id - 1) + 2;
            for c in first..first + k {
                if let Some((w, d)) = carried[c] {
                    let item = (w, d + 1);
                    match state[c] {
                        MEMBER => members.push(item),
                        _ => receivers.push(item),
                    }
                }
            }
        }
        // shortest-travelled members first
        members.sort_by_key(|&(w, d)| (d, w.id()));
        let mut members = members.into_iter();
        for (r, d) in receivers {
            match members.next() {
                Some((m, _)) => out.serve.push((m, r)),
                None => carried[id] = Some((r, d)),
            }
        }
        let mut rest: Vec<(VertexRef, u64)> = members.collect();
        if state[id] == MEMBER {
            carried[id] = Some(rest.remove(0));
        }
        for p in rest.chunks_exact(2) {
            out.pairs.push((p[0].0, p[1].0));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn check_disjoint(tree: &CompleteKTree, p: &StepPairing) {
        let mut edges = HashSet::new();
        let mut ends = HashSet::new();
        for &(a, b) in p.serve.iter().chain(&p.pairs) {
            assert!(ends.insert(a.id()) && ends.insert(b.id()));
            for e in tree.path(a, b).unwrap() {
                assert!(edges.insert(e.child()), "edge {} reused", e.child());
            }
        }
    }

    fn roles_for(tree: &CompleteKTree, members: &[u64], receivers: &[u64]) -> Vec<Role> {
        let mut roles = vec![Role::Absent; tree.n() as usize + 1];
        for &m in members {
            roles[m as usize] = Role::Member;
        }
        for &r in receivers {
            roles[r as usize] = Role::Receiver;
        }
        roles
    }

    #[test]
    fn perfect_pairing_of_a_level() {
        let tree = CompleteKTree::new(3, 2).unwrap();
        let leaves: Vec<u64> = (5..=13).chain([1]).collect();
        let p = pair_step(&tree, &roles_for(&tree, &leaves, &[]), 5).unwrap();
        assert_eq!(p.pairs.len(), 5);
        check_disjoint(&tree, &p);
    }

    #[test]
    fn receivers_are_all_served() {
        let tree = CompleteKTree::new(2, 2).unwrap();
        let p = pair_step(&tree, &roles_for(&tree, &[1, 4, 5, 6, 7], &[2, 3]), 1).unwrap();
        assert_eq!(p.serve.len(), 2);
        assert_eq!(p.pairs.len(), 1);
        check_disjoint(&tree, &p);
    }

    #[test]
    fn impossible_demands_are_refused() {
        let tree = CompleteKTree::new(2, 1).unwrap();
        assert!(pair_step(&tree, &roles_for(&tree, &[2], &[1, 3]), 0).is_none());
        assert!(pair_step(&tree, &roles_for(&tree, &[2, 3], &[]), 2).is_none());
    }

    #[test]
    fn fewer_pairs_cost_fewer_edges() {
        let tree = CompleteKTree::new(2, 3).unwrap();
        let leaves: Vec<u64> = (8..=15).collect();
        let cost = |want| {
            let p = pair_step(&tree, &roles_for(&tree, &leaves, &[]), want).unwrap();
            check_disjoint(&tree, &p);
            p.pairs.iter().map(|&(a, b)| tree.distance(a, b)).sum::<u64>()
        };
        assert_eq!(cost(4), 8);
        assert_eq!(cost(2), 4);
    }
}
