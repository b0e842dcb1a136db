use std::fmt;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linecast::Algorithm;

#[derive(Debug, Parser)]
#[command(name = "linecast", version, about = "Line-broadcasting schedules on complete k-trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build one schedule, validate it and print it.
    Run(RunArgs),
    /// Print every closed-form bound for a tree.
    Bounds(BoundsArgs),
    /// Run the dispatcher over a grid and write one CSV row per originator.
    Sweep(SweepArgs),
    /// Exhaustive minimum-cost search on a tiny tree.
    Oracle(OracleArgs),
    /// Validate a schedule stored as JSON.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct TreeArgs {
    /// Branching factor.
    #[arg(long)]
    pub k: u64,
    /// Height.
    #[arg(long)]
    pub r: u32,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub tree: TreeArgs,
    /// Vertex id of the originator (1 is the root).
    #[arg(long, default_value_t = 1)]
    pub originator: u64,
    /// auto, alg1, alg2, alg3, tolevel:J or fromlevel:J.
    #[arg(long, default_value = "auto")]
    pub alg: AlgChoice,
    #[arg(long, value_enum, default_value_t = Format::Trace)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub tree: TreeArgs,
    /// Take one off the lower bound, as for an originator on the leaf level.
    #[arg(long)]
    pub leaf_adjust: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Values of k, as `A..B` (inclusive) or a single number.
    #[arg(long)]
    pub k: IntRange,
    /// Values of r, as `A..B` (inclusive) or a single number.
    #[arg(long)]
    pub r: IntRange,
    /// root, all, or a comma-separated list of vertex ids.
    #[arg(long, default_value = "root")]
    pub originators: Originators,
    /// auto or alg1, alg2, alg3.
    #[arg(long, default_value = "auto")]
    pub alg: AlgChoice,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Build cells on all cores.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub tree: TreeArgs,
    #[arg(long, default_value_t = 1)]
    pub originator: u64,
    /// Number of steps allowed; defaults to ⌈log₂ n⌉.
    #[arg(long)]
    pub budget: Option<u32>,
    /// Largest tree searched.
    #[arg(long, default_value_t = linecast::oracle::DEFAULT_CAP)]
    pub cap: u64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// JSON schedule as written by `run --format json`.
    pub file: PathBuf,
    /// Also require the schedule to finish within this many steps.
    #[arg(long)]
    pub budget: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Trace,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgChoice {
    Auto,
    Fixed(Algorithm),
    ToLevel(u32),
    FromLevel(u32),
}

impl FromStr for AlgChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let level = |j: &str| j.parse::<u32>().map_err(|_| format!("bad level in {s:?}"));
        if s == "auto" {
            Ok(AlgChoice::Auto)
        } else if let Some(j) = s.strip_prefix("tolevel:") {
            Ok(AlgChoice::ToLevel(level(j)?))
        } else if let Some(j) = s.strip_prefix("fromlevel:") {
            Ok(AlgChoice::FromLevel(level(j)?))
        } else {
            s.parse::<Algorithm>()
                .map(AlgChoice::Fixed)
                .map_err(|_| format!("unknown algorithm {s:?}"))
        }
    }
}

impl fmt::Display for AlgChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgChoice::Auto => f.write_str("auto"),
            AlgChoice::Fixed(a) => write!(f, "{a}"),
            AlgChoice::ToLevel(j) => write!(f, "tolevel:{j}"),
            AlgChoice::FromLevel(j) => write!(f, "fromlevel:{j}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntRange(pub RangeInclusive<u64>);

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |x: &str| x.trim().parse::<u64>().map_err(|_| format!("bad range {s:?}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
            None => (num(s)?, num(s)?),
        };
        if lo > hi {
            return Err(format!("empty range {s:?}"));
        }
        Ok(IntRange(lo..=hi))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Originators {
    Root,
    All,
    List(Vec<u64>),
}

impl FromStr for Originators {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "root" => Ok(Originators::Root),
            "all" => Ok(Originators::All),
            _ => s
                .split(',')
                .map(|x| x.trim().parse::<u64>().map_err(|_| format!("bad originator {x:?}")))
                .collect::<Result<Vec<_>, _>>()
                .map(Originators::List),
        }
    }
}
