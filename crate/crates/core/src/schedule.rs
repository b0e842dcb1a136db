//! Line-broadcast schedules and their validator.
//!
//! A schedule is a list of time steps, numbered from 1. Each step holds the
//! calls placed in that time unit. A call carries its full tree path; its
//! cost is the number of edges on that path.
//!
//! Model constraints checked by [`Schedule::validate`]:
//! - a source must be informed when its step starts,
//! - a destination must be uninformed when its step starts,
//! - a vertex sends at most one call and receives at most one call per step,
//! - paths of calls in the same step are pairwise edge-disjoint.
//!
//! Only edges are exclusive. A vertex may relay someone else's call in the
//! same step in which it receives or sends its own.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::bounds::ceil_log2;
use crate::error::{Error, Result};
use crate::ktree::{CompleteKTree, Edge, VertexRef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    source: VertexRef,
    dest: VertexRef,
    path: Vec<Edge>,
}

impl Call {
    pub fn new(tree: &CompleteKTree, source: VertexRef, dest: VertexRef) -> Result<Self> {
        let path = tree.path(source, dest)?;
        Ok(Self { source, dest, path })
    }

    /// Caller guarantees `path == tree.path(source, dest)`.
    pub(crate) fn from_parts(source: VertexRef, dest: VertexRef, path: Vec<Edge>) -> Self {
        Self { source, dest, path }
    }

    pub fn source(&self) -> VertexRef {
        self.source
    }

    pub fn dest(&self) -> VertexRef {
        self.dest
    }

    pub fn path(&self) -> &[Edge] {
        &self.path
    }

    pub fn cost(&self) -> u64 {
        self.path.len() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub t: u32,
    pub calls: Vec<Call>,
}

/// A departure from the nominal behaviour of an algorithm that the
/// construction had to make in order to stay valid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Deviation {
    /// `steps` time units were appended beyond the nominal length of `phase`.
    ExtraSteps { phase: String, steps: u32 },
    /// Up-calls were sourced from deeper vertices, costing `extra_edges`
    /// more than the nominal up-call cost.
    UpcallSlack { extra_edges: u64 },
    /// The originator's first call to the root cost `extra_cost` more than a
    /// unit call.
    OriginatorDetour { extra_cost: u64 },
}

impl Deviation {
    /// True when the deviation lengthens the schedule.
    pub fn adds_time(&self) -> bool {
        matches!(self, Deviation::ExtraSteps { .. })
    }
}

impl fmt::Display for Deviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deviation::ExtraSteps { phase, steps } => write!(f, "extra-steps:{phase}:{steps}"),
            Deviation::UpcallSlack { extra_edges } => write!(f, "upcall-slack:{extra_edges}"),
            Deviation::OriginatorDetour { extra_cost } => {
                write!(f, "originator-detour:{extra_cost}")
            }
        }
    }
}

impl FromStr for Deviation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Malformed(format!("unrecognised deviation {s:?}"));
        let mut parts = s.splitn(3, ':');
        let kind = parts.next().ok_or_else(bad)?;
        match kind {
            "extra-steps" => {
                let phase = parts.next().ok_or_else(bad)?.to_string();
                let steps = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                Ok(Deviation::ExtraSteps { phase, steps })
            }
            "upcall-slack" => {
                let extra_edges = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                Ok(Deviation::UpcallSlack { extra_edges })
            }
            "originator-detour" => {
                let extra_cost = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                Ok(Deviation::OriginatorDetour { extra_cost })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    EdgeConflict,
    UninformedSource,
    DoubleReceive,
    MultiSend,
    IncompleteCoverage,
    TimeBudgetExceeded,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::EdgeConflict => "EdgeConflict",
            ViolationKind::UninformedSource => "UninformedSource",
            ViolationKind::DoubleReceive => "DoubleReceive",
            ViolationKind::MultiSend => "MultiSend",
            ViolationKind::IncompleteCoverage => "IncompleteCoverage",
            ViolationKind::TimeBudgetExceeded => "TimeBudgetExceeded",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Step the violation occurred in; `None` for whole-schedule checks.
    pub step: Option<u32>,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    /// `(t, number of informed vertices after step t)` for every step.
    pub informed_timeline: Vec<(u32, u64)>,
}

impl ValidationReport {
    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Which vertices must be informed once the schedule has run.
#[derive(Debug, Clone, Copy)]
pub enum Coverage<'a> {
    /// Every vertex of the tree.
    All,
    /// Exactly this set of vertex ids.
    Exactly(&'a BTreeSet<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    tree: CompleteKTree,
    originator: VertexRef,
    steps: Vec<Step>,
    algorithm: String,
    deviations: Vec<Deviation>,
}

impl Schedule {
    pub fn new(tree: CompleteKTree, originator: VertexRef, algorithm: impl Into<String>) -> Self {
        Self {
            tree,
            originator,
            steps: Vec::new(),
            algorithm: algorithm.into(),
            deviations: Vec::new(),
        }
    }

    /// Appends a step numbered one past the current last step. No checks are
    /// made here; see [`validate`](Self::validate).
    pub fn append_step(mut self, calls: Vec<Call>) -> Self {
        self.push_step(calls);
        self
    }

    pub fn push_step(&mut self, calls: Vec<Call>) {
        let t = self.steps.len() as u32 + 1;
        self.steps.push(Step { t, calls });
    }

    pub fn add_deviation(&mut self, deviation: Deviation) {
        self.deviations.push(deviation);
    }

    pub fn tree(&self) -> &CompleteKTree {
        &self.tree
    }

    pub fn originator(&self) -> VertexRef {
        self.originator
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn algorithm(&self) -> &str {
        &self.algorithm
    }

    pub fn deviations(&self) -> &[Deviation] {
        &self.deviations
    }

    pub fn calls(&self) -> impl Iterator<Item = &Call> {
        self.steps.iter().flat_map(|s| s.calls.iter())
    }

    pub fn total_cost(&self) -> u64 {
        self.calls().map(Call::cost).sum()
    }

    /// Index of the last non-empty step, or 0 for a schedule without calls.
    pub fn total_time(&self) -> u32 {
        self.steps
            .iter()
            .rev()
            .find(|s| !s.calls.is_empty())
            .map_or(0, |s| s.t)
    }

    /// `⌈log₂ n⌉`, the minimum broadcast time on the tree.
    pub fn time_limit(&self) -> u32 {
        ceil_log2(u128::from(self.tree.n()))
    }

    /// The originator together with every destination of steps `1..=t`.
    pub fn informed_after(&self, t: u32) -> Result<BTreeSet<u64>> {
        if t > self.total_time() {
            return Err(Error::OutOfRange(format!(
                "time {t} beyond total time {}",
                self.total_time()
            )));
        }
        let mut set = BTreeSet::from([self.originator.id()]);
        for step in self.steps.iter().take_while(|s| s.t <= t) {
            set.extend(step.calls.iter().map(|c| c.dest.id()));
        }
        Ok(set)
    }

    pub fn validate(&self, time_budget: Option<u32>) -> ValidationReport {
        self.validate_with(time_budget, Coverage::All)
    }

    /// Full validation pass; every violation is reported, not only the first.
    pub fn validate_with(&self, time_budget: Option<u32>, coverage: Coverage<'_>) -> ValidationReport {
        let n = self.tree.n() as usize;
        let mut informed = vec![false; n + 1];
        informed[self.originator.id() as usize] = true;
        let mut informed_count = 1u64;
        let mut violations = Vec::new();
        let mut timeline = Vec::with_capacity(self.steps.len());

        for step in &self.steps {
            let at = Some(step.t);
            let mut push = |kind, detail: String| {
                violations.push(Violation {
                    step: at,
                    kind,
                    detail,
                })
            };

            for call in &step.calls {
                if !informed[call.source.id() as usize] {
                    push(
                        ViolationKind::UninformedSource,
                        format!("vertex {} is not informed", call.source.id()),
                    );
                }
            }
            for call in &step.calls {
                if informed[call.dest.id() as usize] {
                    push(
                        ViolationKind::DoubleReceive,
                        format!("vertex {} is already informed", call.dest.id()),
                    );
                }
            }
            for (v, count) in counts(step.calls.iter().map(|c| c.source.id())) {
                push(
                    ViolationKind::MultiSend,
                    format!("vertex {v} sends {count} calls"),
                );
            }
            for (v, count) in counts(step.calls.iter().map(|c| c.dest.id())) {
                push(
                    ViolationKind::DoubleReceive,
                    format!("vertex {v} receives {count} calls"),
                );
            }
            for (e, count) in counts(step.calls.iter().flat_map(|c| c.path.iter().map(Edge::child))) {
                push(
                    ViolationKind::EdgeConflict,
                    format!("edge {e} used by {count} calls"),
                );
            }

            for call in &step.calls {
                let slot = &mut informed[call.dest.id() as usize];
                if !*slot {
                    *slot = true;
                    informed_count += 1;
                }
            }
            timeline.push((step.t, informed_count));
        }

        match coverage {
            Coverage::All => {
                if informed_count < self.tree.n() {
                    violations.push(Violation {
                        step: None,
                        kind: ViolationKind::IncompleteCoverage,
                        detail: format!("{informed_count} of {} vertices informed", self.tree.n()),
                    });
                }
            }
            Coverage::Exactly(expected) => {
                let missing = expected.iter().filter(|&&v| !informed.get(v as usize).copied().unwrap_or(false)).count();
                let extra = informed_count as usize - (expected.len() - missing);
                if missing > 0 || extra > 0 {
                    violations.push(Violation {
                        step: None,
                        kind: ViolationKind::IncompleteCoverage,
                        detail: format!("{missing} expected vertices uninformed, {extra} unexpected informed"),
                    });
                }
            }
        }

        if let Some(budget) = time_budget {
            let time = self.total_time();
            if time > budget {
                violations.push(Violation {
                    step: None,
                    kind: ViolationKind::TimeBudgetExceeded,
                    detail: format!("total time {time} exceeds budget {budget}"),
                });
            }
        }

        ValidationReport {
            ok: violations.is_empty(),
            violations,
            informed_timeline: timeline,
        }
    }
}

// Items occurring more than once, in order of first occurrence.
fn counts(items: impl Iterator<Item = u64>) -> Vec<(u64, usize)> {
    let mut seen: HashMap<u64, usize> = HashMap::new();
    let mut order = Vec::new();
    for item in items {
        let c = seen.entry(item).or_insert(0);
        *c += 1;
        if *c == 2 {
            order.push(item);
        }
    }
    let mut reported = HashSet::new();
    order
        .into_iter()
        .filter(|i| reported.insert(*i))
        .map(|i| (i, seen[&i]))
        .collect()
}
