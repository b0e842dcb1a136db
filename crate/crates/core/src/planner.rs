//! Incremental schedule construction with per-step conflict tracking.
//!
//! Calls may be placed at any step, in any order; a call is accepted only if
//! it keeps the schedule valid: the source was informed before the step, the
//! destination has never been scheduled to receive, neither endpoint is
//! already busy in that role, and no edge of the path is taken.

use std::collections::HashSet;

use crate::ktree::{CompleteKTree, Edge, VertexRef};
use crate::schedule::{Call, Deviation, Schedule};

const NEVER: u32 = u32::MAX;

#[derive(Debug, Default)]
struct StepState {
    calls: Vec<Call>,
    edges: HashSet<u64>,
    senders: HashSet<u64>,
}

#[derive(Debug)]
pub(crate) struct Planner<'t> {
    tree: &'t CompleteKTree,
    originator: VertexRef,
    // Step at the end of which each vertex becomes informed; 0 for the
    // originator, NEVER while unscheduled.
    informed_at: Vec<u32>,
    steps: Vec<StepState>,
    deviations: Vec<Deviation>,
}

impl<'t> Planner<'t> {
    pub fn new(tree: &'t CompleteKTree, originator: VertexRef) -> Self {
        let mut informed_at = vec![NEVER; tree.n() as usize + 1];
        informed_at[originator.id() as usize] = 0;
        Self {
            tree,
            originator,
            informed_at,
            steps: Vec::new(),
            deviations: Vec::new(),
        }
    }

    pub fn tree(&self) -> &'t CompleteKTree {
        self.tree
    }

    pub fn originator(&self) -> VertexRef {
        self.originator
    }

    /// Number of the last step that exists (possibly empty).
    pub fn last_step(&self) -> u32 {
        self.steps.len() as u32
    }

    pub fn is_scheduled(&self, v: VertexRef) -> bool {
        self.informed_at[v.id() as usize] != NEVER
    }

    pub fn informed_before(&self, v: VertexRef, t: u32) -> bool {
        self.informed_at[v.id() as usize] < t
    }

    pub fn is_sending(&self, v: VertexRef, t: u32) -> bool {
        self.steps
            .get(t as usize - 1)
            .is_some_and(|s| s.senders.contains(&v.id()))
    }

    pub fn edge_free(&self, e: Edge, t: u32) -> bool {
        self.steps
            .get(t as usize - 1)
            .is_none_or(|s| !s.edges.contains(&e.child()))
    }

    /// Path of `src → dst` if that call can be placed at step `t`.
    pub fn check(&self, t: u32, src: VertexRef, dst: VertexRef) -> Option<Vec<Edge>> {
        if src == dst
            || !self.informed_before(src, t)
            || self.is_scheduled(dst)
            || self.is_sending(src, t)
        {
            return None;
        }
        let path = self.tree.path(src, dst).ok()?;
        path.iter().all(|&e| self.edge_free(e, t)).then_some(path)
    }

    pub fn try_call(&mut self, t: u32, src: VertexRef, dst: VertexRef) -> bool {
        match self.check(t, src, dst) {
            Some(path) => {
                self.place(t, Call::from_parts(src, dst, path));
                true
            }
            None => false,
        }
    }

    fn place(&mut self, t: u32, call: Call) {
        while self.steps.len() < t as usize {
            self.steps.push(StepState::default());
        }
        let step = &mut self.steps[t as usize - 1];
        step.senders.insert(call.source().id());
        step.edges.extend(call.path().iter().map(Edge::child));
        self.informed_at[call.dest().id() as usize] = t;
        step.calls.push(call);
    }

    /// Makes sure step `t` exists even if nothing is placed in it.
    pub fn reserve_step(&mut self, t: u32) {
        while self.steps.len() < t as usize {
            self.steps.push(StepState::default());
        }
    }

    pub fn deviate(&mut self, deviation: Deviation) {
        self.deviations.push(deviation);
    }

    pub fn finish(self, algorithm: &str) -> Schedule {
        let mut schedule = Schedule::new(self.tree.clone(), self.originator, algorithm);
        for step in self.steps {
            schedule.push_step(step.calls);
        }
        for d in self.deviations {
            schedule.add_deviation(d);
        }
        schedule
    }
}
