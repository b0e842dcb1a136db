//! Text output: schedule traces, the bounds table and sweep rows.

use std::fmt::Write as _;

use linecast::bounds::{format_decimal, format_exact};
use linecast::{BoundsReport, Rational, Schedule, ValidationReport};

pub const CSV_HEADER: &str = "k,r,n,originator,algorithm,case,total_time,time_limit,total_cost,\
lower_bound,upper_bound,farley_bound,valid,deviations";

const DECIMALS: u32 = 6;

pub fn decimal(x: &Rational) -> String {
    format_decimal(x, DECIMALS)
}

pub fn exact_and_decimal(x: &Rational) -> String {
    let exact = format_exact(x);
    let dec = decimal(x);
    if exact == dec {
        exact
    } else {
        format!("{exact} ({dec})")
    }
}

pub fn trace(schedule: &Schedule, report: &ValidationReport) -> String {
    let tree = schedule.tree();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} on k={} r={} n={} from vertex {}",
        schedule.algorithm(),
        tree.k(),
        tree.r(),
        tree.n(),
        schedule.originator().id()
    );
    let timeline = &report.informed_timeline;
    for (i, step) in schedule.steps().iter().enumerate() {
        let cost: u64 = step.calls.iter().map(|c| c.cost()).sum();
        let informed = timeline.get(i).map_or(0, |&(_, c)| c);
        let _ = writeln!(
            out,
            "step {:>3}: {} calls, cost {}, {} informed",
            step.t,
            step.calls.len(),
            cost,
            informed
        );
        for c in &step.calls {
            let path: Vec<String> = c.path().iter().map(|e| e.child().to_string()).collect();
            let _ = writeln!(
                out,
                "    {} -> {}  cost {}  edges [{}]",
                c.source().id(),
                c.dest().id(),
                c.cost(),
                path.join(" ")
            );
        }
    }
    let _ = writeln!(out, "total time {}", schedule.total_time());
    let _ = writeln!(out, "total cost {}", schedule.total_cost());
    let _ = writeln!(out, "valid {}", report.ok);
    for v in &report.violations {
        let at = v.step.map_or(String::new(), |t| format!(" at step {t}"));
        let _ = writeln!(out, "violation {}{}: {}", v.kind, at, v.detail);
    }
    for d in schedule.deviations() {
        let _ = writeln!(out, "deviation {d}");
    }
    out
}

pub fn bounds_table(rep: &BoundsReport) -> String {
    let mut rows: Vec<(&str, String)> = vec![
        ("k", rep.k.to_string()),
        ("r", rep.r.to_string()),
        ("n", rep.n.to_string()),
        ("time limit", rep.time_limit.to_string()),
        ("farley", rep.farley.to_string()),
        ("lower", exact_and_decimal(&rep.lower)),
        ("case", rep.case.algorithm.to_string()),
        ("upper alg1", exact_and_decimal(&rep.upper_alg1)),
        (
            "upper alg2",
            rep.upper_alg2.as_ref().map_or("-".into(), exact_and_decimal),
        ),
        ("upper alg3", exact_and_decimal(&rep.upper_alg3)),
        ("upper", exact_and_decimal(rep.dispatched_upper())),
    ];
    if let Some(b) = &rep.to_level_below_leaves {
        rows.push(("tolevel r-1", exact_and_decimal(b)));
    }
    rows.push(("tolevel r", exact_and_decimal(&rep.to_level_leaves)));
    if let Some(c) = rep.from_level_below_leaves {
        rows.push(("fromlevel r-1", c.to_string()));
    }
    rows.push(("fromlevel r", rep.from_level_leaves.to_string()));

    let mut out = String::new();
    for (name, value) in rows {
        let _ = writeln!(out, "{name:<14}{value}");
    }
    out
}

/// One sweep row; field order matches [`CSV_HEADER`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub k: u64,
    pub r: u32,
    pub n: u64,
    pub originator: u64,
    pub algorithm: String,
    pub case: u8,
    pub total_time: u32,
    pub time_limit: u32,
    pub total_cost: u64,
    pub lower_bound: String,
    pub upper_bound: String,
    pub farley_bound: u128,
    pub valid: bool,
    pub deviations: String,
}

impl Row {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.k,
            self.r,
            self.n,
            self.originator,
            self.algorithm,
            self.case,
            self.total_time,
            self.time_limit,
            self.total_cost,
            self.lower_bound,
            self.upper_bound,
            self.farley_bound,
            self.valid,
            self.deviations
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_exact() {
        assert_eq!(
            CSV_HEADER,
            "k,r,n,originator,algorithm,case,total_time,time_limit,total_cost,lower_bound,upper_bound,farley_bound,valid,deviations"
        );
    }

    #[test]
    fn numbers() {
        let q = |a: i64, b: i64| Rational::from_integer(a.into()) / Rational::from_integer(b.into());
        assert_eq!(exact_and_decimal(&q(14, 1)), "14");
        assert_eq!(exact_and_decimal(&q(3861, 16)), "3861/16 (241.3125)");
        assert_eq!(decimal(&q(25, 9)), "2.777778");
    }
}
