//! Interchange format for schedules.
//!
//! Vertices and edges are plain ids (an edge is named by its child). Field
//! order is fixed, so equal schedules serialise to identical bytes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ktree::CompleteKTree;
use crate::schedule::{Call, Deviation, Schedule};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallDoc {
    pub src: u64,
    pub dst: u64,
    pub path: Vec<u64>,
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDoc {
    pub t: u32,
    pub calls: Vec<CallDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub k: u64,
    pub r: u32,
    pub n: u64,
    pub originator: u64,
    pub algorithm: String,
    pub steps: Vec<StepDoc>,
    pub total_time: u32,
    pub total_cost: u64,
    pub valid: bool,
    pub deviations: Vec<String>,
}

impl ScheduleDoc {
    /// `valid` is stored as given; it records the outcome of whatever
    /// validation the caller ran.
    pub fn new(schedule: &Schedule, valid: bool) -> Self {
        let tree = schedule.tree();
        ScheduleDoc {
            k: tree.k(),
            r: tree.r(),
            n: tree.n(),
            originator: schedule.originator().id(),
            algorithm: schedule.algorithm().to_string(),
            steps: schedule
                .steps()
                .iter()
                .map(|s| StepDoc {
                    t: s.t,
                    calls: s
                        .calls
                        .iter()
                        .map(|c| CallDoc {
                            src: c.source().id(),
                            dst: c.dest().id(),
                            path: c.path().iter().map(|e| e.child()).collect(),
                            cost: c.cost(),
                        })
                        .collect(),
                })
                .collect(),
            total_time: schedule.total_time(),
            total_cost: schedule.total_cost(),
            valid,
            deviations: schedule.deviations().iter().map(ToString::to_string).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data always serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }

    /// Rebuilds the schedule, checking that the header, paths, costs and
    /// totals agree with the tree. Validity of the broadcast itself is left
    /// to [`Schedule::validate`].
    pub fn to_schedule(&self) -> Result<Schedule> {
        let tree = CompleteKTree::new(self.k, self.r)?;
        if tree.n() != self.n {
            return Err(Error::Malformed(format!(
                "n = {} does not match k = {}, r = {}",
                self.n, self.k, self.r
            )));
        }
        let originator = tree.vertex_by_id(self.originator)?;
        let mut schedule = Schedule::new(tree.clone(), originator, self.algorithm.clone());
        for (i, step) in self.steps.iter().enumerate() {
            if step.t as usize != i + 1 {
                return Err(Error::Malformed(format!(
                    "step {} found where step {} was expected",
                    step.t,
                    i + 1
                )));
            }
            let mut calls = Vec::with_capacity(step.calls.len());
            for c in &step.calls {
                let call = Call::new(&tree, tree.vertex_by_id(c.src)?, tree.vertex_by_id(c.dst)?)?;
                let path: Vec<u64> = call.path().iter().map(|e| e.child()).collect();
                if path != c.path || call.cost() != c.cost {
                    return Err(Error::Malformed(format!(
                        "call {} -> {} at step {}: path or cost disagrees with the tree",
                        c.src, c.dst, step.t
                    )));
                }
                calls.push(call);
            }
            schedule.push_step(calls);
        }
        for d in &self.deviations {
            schedule.add_deviation(d.parse::<Deviation>()?);
        }
        if schedule.total_time() != self.total_time || schedule.total_cost() != self.total_cost {
            return Err(Error::Malformed("totals disagree with the steps".into()));
        }
        Ok(schedule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::lbckt;

    #[test]
    fn field_order_is_fixed() {
        let tree = CompleteKTree::new(2, 1).unwrap();
        let root = tree.root();
        let s = Schedule::new(tree.clone(), root, "manual")
            .append_step(vec![Call::new(&tree, root, tree.vertex_by_id(2).unwrap()).unwrap()])
            .append_step(vec![Call::new(&tree, root, tree.vertex_by_id(3).unwrap()).unwrap()]);
        let text = ScheduleDoc::new(&s, true).to_json();
        assert_eq!(
            text,
            r#"{"k":2,"r":1,"n":3,"originator":1,"algorithm":"manual","steps":[{"t":1,"calls":[{"src":1,"dst":2,"path":[2],"cost":1}]},{"t":2,"calls":[{"src":1,"dst":3,"path":[3],"cost":1}]}],"total_time":2,"total_cost":2,"valid":true,"deviations":[]}"#
        );
    }

    #[test]
    fn round_trip_preserves_validation() {
        for (k, r) in [(2, 2), (3, 2), (5, 3)] {
            let tree = CompleteKTree::new(k, r).unwrap();
            for id in [1, tree.n()] {
                let (s, case) = lbckt(&tree, tree.vertex_by_id(id).unwrap());
                let report = s.validate(Some(case.time_limit));
                let text = ScheduleDoc::new(&s, report.ok).to_json();
                let back = ScheduleDoc::from_json(&text).unwrap().to_schedule().unwrap();
                assert_eq!(back, s);
                assert_eq!(back.validate(Some(case.time_limit)), report);
                assert_eq!(ScheduleDoc::new(&back, report.ok).to_json(), text);
            }
        }
    }

    #[test]
    fn rejects_inconsistent_documents() {
        let tree = CompleteKTree::new(2, 1).unwrap();
        let root = tree.root();
        let s = Schedule::new(tree.clone(), root, "manual")
            .append_step(vec![Call::new(&tree, root, tree.vertex_by_id(2).unwrap()).unwrap()]);
        let doc = ScheduleDoc::new(&s, true);

        let mut bad = doc.clone();
        bad.steps[0].calls[0].path = vec![3];
        assert!(matches!(bad.to_schedule(), Err(Error::Malformed(_))));

        let mut bad = doc.clone();
        bad.n = 4;
        assert!(bad.to_schedule().is_err());

        let mut bad = doc.clone();
        bad.steps[0].t = 2;
        assert!(bad.to_schedule().is_err());

        let mut bad = doc.clone();
        bad.total_cost = 5;
        assert!(bad.to_schedule().is_err());

        let mut bad = doc;
        bad.deviations = vec!["nonsense".into()];
        assert!(bad.to_schedule().is_err());

        assert!(ScheduleDoc::from_json("{").is_err());
    }
}
