use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};

use linecast::bounds::{self, ceil_log2};
use linecast::json::ScheduleDoc;
use linecast::oracle;
use linecast::procedures::{from_level, to_level, Fragment};
use linecast::{
    lbckt, lbckt_case, Algorithm, CompleteKTree, Coverage, Error, Schedule, VertexRef, ViolationKind,
};
use rayon::prelude::*;
use thiserror::Error;

use crate::args::{AlgChoice, BoundsArgs, CheckArgs, Command, OracleArgs, Originators, RunArgs, SweepArgs};
use crate::render::{self, Row, CSV_HEADER};

/// Largest tree a sweep cell may build.
pub const MAX_CELL_VERTICES: u64 = 1 << 20;

/// How a command that ran to completion went.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Invalid,
    Deviation,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::Invalid => 2,
            Outcome::Deviation => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    TooLarge(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Io(_) => 4,
            Failure::TooLarge(_) => 5,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TooLarge { .. } => Failure::TooLarge(e.to_string()),
            Error::Malformed(_) => Failure::Invalid(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

pub fn dispatch(command: Command, out: &mut dyn Write) -> Result<Outcome, Failure> {
    match command {
        Command::Run(a) => run(&a, out),
        Command::Bounds(a) => bounds(&a, out),
        Command::Sweep(a) => sweep(&a, out),
        Command::Oracle(a) => oracle(&a, out),
        Command::Check(a) => check(&a, out),
    }
}

struct Built {
    schedule: Schedule,
    // nominal length, checked only when broadcasting from the root
    budget: u32,
    // vertices that must end up informed; everything when `None`
    target: Option<BTreeSet<u64>>,
}

fn build(tree: &CompleteKTree, u: VertexRef, alg: AlgChoice) -> Result<Built, Failure> {
    let whole = |schedule, budget| Built { schedule, budget, target: None };
    let with_levels = |upto: u32, j: u32| -> Result<BTreeSet<u64>, Failure> {
        let mut set: BTreeSet<u64> = [u.id()].into();
        for level in upto..=j {
            set.extend(tree.level_vertices(level)?.iter().map(|v| v.id()));
        }
        Ok(set)
    };
    let level_time = |j: u32| ceil_log2(u128::from(tree.level_size(j)) + 1);
    Ok(match alg {
        AlgChoice::Auto => {
            let (schedule, case) = lbckt(tree, u);
            whole(schedule, case.time_limit)
        }
        AlgChoice::Fixed(a) => {
            let case = lbckt_case(tree.k(), tree.r())?;
            let budget = match a {
                Algorithm::Alg1 => case.layered_time,
                Algorithm::Alg2 => case.two_phase_time,
                Algorithm::Alg3 => case.time_limit,
            };
            whole(a.run(tree, u), budget)
        }
        AlgChoice::ToLevel(j) => {
            let frag = to_level(tree, j, u, 1)?;
            Built {
                schedule: frag.to_schedule(tree, u, &alg.to_string()),
                budget: level_time(j),
                target: Some(with_levels(j, j)?),
            }
        }
        AlgChoice::FromLevel(j) => {
            let down = to_level(tree, j, u, 1)?;
            let informed = with_levels(j, j)?;
            let up = from_level(tree, j, down.duration() + 1, &informed)?;
            let steps = down.steps.into_iter().chain(up.steps).collect();
            Built {
                schedule: Fragment { steps }.to_schedule(tree, u, &alg.to_string()),
                budget: level_time(j) + 1,
                target: Some(with_levels(0, j)?),
            }
        }
    })
}

fn run(args: &RunArgs, out: &mut dyn Write) -> Result<Outcome, Failure> {
    let tree = CompleteKTree::new(args.tree.k, args.tree.r)?;
    let u = tree.vertex_by_id(args.originator)?;
    let built = build(&tree, u, args.alg)?;
    let budget = (u == tree.root()).then_some(built.budget);
    let coverage = built.target.as_ref().map_or(Coverage::All, Coverage::Exactly);
    let report = built.schedule.validate_with(budget, coverage);

    match args.format {
        crate::args::Format::Trace => out.write_all(render::trace(&built.schedule, &report).as_bytes())?,
        crate::args::Format::Json => {
            writeln!(out, "{}", ScheduleDoc::new(&built.schedule, report.ok).to_json())?
        }
    }

    let broken = report.violations.iter().any(|v| v.kind != ViolationKind::TimeBudgetExceeded);
    Ok(if broken {
        Outcome::Invalid
    } else if !built.schedule.deviations().is_empty() {
        Outcome::Deviation
    } else if !report.ok {
        Outcome::Invalid
    } else {
        Outcome::Ok
    })
}

fn bounds(args: &BoundsArgs, out: &mut dyn Write) -> Result<Outcome, Failure> {
    let rep = bounds::report(args.tree.k, args.tree.r, args.leaf_adjust)?;
    out.write_all(render::bounds_table(&rep).as_bytes())?;
    Ok(Outcome::Ok)
}

fn sweep_row(tree: &CompleteKTree, u: VertexRef, alg: Option<Algorithm>) -> Result<Row, Failure> {
    let rep = bounds::report(tree.k(), tree.r(), u.level() == tree.r())?;
    let algorithm = alg.unwrap_or(rep.case.algorithm);
    let built = build(tree, u, alg.map_or(AlgChoice::Auto, AlgChoice::Fixed))?;
    let report = built.schedule.validate((u == tree.root()).then_some(built.budget));
    let upper = match algorithm {
        Algorithm::Alg1 => Some(&rep.upper_alg1),
        Algorithm::Alg2 => rep.upper_alg2.as_ref(),
        Algorithm::Alg3 => Some(&rep.upper_alg3),
    };
    let deviations: Vec<String> = built.schedule.deviations().iter().map(|d| d.to_string()).collect();
    Ok(Row {
        k: tree.k(),
        r: tree.r(),
        n: tree.n(),
        originator: u.id(),
        algorithm: algorithm.to_string(),
        case: algorithm.number(),
        total_time: built.schedule.total_time(),
        time_limit: rep.time_limit,
        total_cost: built.schedule.total_cost(),
        lower_bound: render::decimal(&rep.lower),
        upper_bound: upper.map(render::decimal).unwrap_or_default(),
        farley_bound: rep.farley,
        valid: report.ok,
        deviations: deviations.join(";"),
    })
}

fn sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<Outcome, Failure> {
    let alg = match args.alg {
        AlgChoice::Auto => None,
        AlgChoice::Fixed(a) => Some(a),
        other => return Err(Failure::Usage(format!("sweep cannot run {other}"))),
    };
    let mut cells = Vec::new();
    for k in args.k.0.clone() {
        for r in args.r.0.clone() {
            let r = u32::try_from(r).map_err(|_| Failure::Usage(format!("height {r} too large")))?;
            let tree = CompleteKTree::new(k, r)?;
            if tree.n() > MAX_CELL_VERTICES {
                return Err(Failure::Usage(format!(
                    "k={k} r={r} has {} vertices, above the sweep limit of {MAX_CELL_VERTICES}",
                    tree.n()
                )));
            }
            let ids: Vec<u64> = match &args.originators {
                Originators::Root => vec![1],
                Originators::All => (1..=tree.n()).collect(),
                Originators::List(ids) => ids.clone(),
            };
            for id in ids {
                let u = tree.vertex_by_id(id)?;
                cells.push((tree.clone(), u));
            }
        }
    }

    let mut rows: Vec<Row> = if args.parallel {
        cells.par_iter().map(|(t, u)| sweep_row(t, *u, alg)).collect::<Result<_, _>>()?
    } else {
        cells.iter().map(|(t, u)| sweep_row(t, *u, alg)).collect::<Result<_, _>>()?
    };
    rows.sort_by_key(|row| (row.k, row.r, row.originator));

    let mut csv = String::with_capacity(64 * (rows.len() + 1));
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv());
        csv.push('\n');
    }
    match &args.out {
        Some(path) => fs::write(path, csv).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(if rows.iter().all(|r| r.valid) {
        Outcome::Ok
    } else {
        Outcome::Invalid
    })
}

fn oracle(args: &OracleArgs, out: &mut dyn Write) -> Result<Outcome, Failure> {
    let tree = CompleteKTree::new(args.tree.k, args.tree.r)?;
    let u = tree.vertex_by_id(args.originator)?;
    let best = oracle::optimal_cost_capped(&tree, u, args.budget, args.cap)?;
    writeln!(out, "optimal {} within {} steps", best.cost, best.time_budget)?;
    let report = best.witness.validate(Some(best.time_budget));
    out.write_all(render::trace(&best.witness, &report).as_bytes())?;

    let b = oracle::check_bracket_capped(&tree, u, args.cap)?;
    writeln!(out, "lower bound {}", render::exact_and_decimal(&b.lower))?;
    writeln!(out, "optimum in {} steps {}", b.time_limit, b.optimal)?;
    for a in &b.algorithms {
        writeln!(
            out,
            "{} cost {} in {} steps (optimum for {} steps: {})",
            a.algorithm, a.cost, a.time, a.time, a.optimum_at_time
        )?;
    }
    writeln!(out, "dispatched {} bound {}", b.dispatched, render::exact_and_decimal(&b.dispatched_upper))?;
    let holds = b.holds();
    writeln!(out, "bracket holds {holds}")?;
    Ok(if report.ok && holds {
        Outcome::Ok
    } else {
        Outcome::Invalid
    })
}

fn check(args: &CheckArgs, out: &mut dyn Write) -> Result<Outcome, Failure> {
    let text = fs::read_to_string(&args.file)
        .map_err(|e| Failure::Io(format!("{}: {e}", args.file.display())))?;
    let doc = ScheduleDoc::from_json(&text)?;
    let schedule = doc.to_schedule()?;
    let report = schedule.validate(args.budget);
    out.write_all(render::trace(&schedule, &report).as_bytes())?;
    if doc.valid != report.ok {
        writeln!(out, "note: file records valid {}", doc.valid)?;
    }
    Ok(if report.ok { Outcome::Ok } else { Outcome::Invalid })
}
