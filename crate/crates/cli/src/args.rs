use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "aitlab",
    version,
    about = "Time-bounded Kolmogorov complexity laboratory"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Worker threads for table builds (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Lift the work ceiling of 1e10 interpreter steps.
    #[arg(long, global = true)]
    pub force: bool,
    /// Table cache directory.
    #[arg(long, global = true, env = "AITLAB_CACHE_DIR", default_value = "cache")]
    pub cache_dir: PathBuf,
    /// Step budget `t`.
    #[arg(long = "t", global = true, default_value_t = 4096)]
    pub t: u64,
    /// Programs are searched up to `n + cap_slack` bits.
    #[arg(long, global = true, default_value_t = 4)]
    pub cap_slack: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Report destination (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum SetKind {
    #[value(name = "A")]
    A,
    #[value(name = "B")]
    B,
    #[value(name = "A-restricted")]
    ARestricted,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build (or load) one complexity table; `--out` names the cache directory.
    BuildTable {
        #[arg(long)]
        n: usize,
        /// `empty`, `len` (bin(n)) or a bit literal.
        #[arg(long, default_value = "empty")]
        cond: String,
    },
    /// Dependency set of one center.
    Depset {
        #[arg(long, value_enum, default_value_t = SetKind::A)]
        kind: SetKind,
        #[arg(long)]
        x: String,
        #[arg(long)]
        alpha: i64,
        #[arg(long, allow_hyphen_values = true)]
        s: Option<i64>,
        /// Include the member list in JSON output.
        #[arg(long)]
        members: bool,
    },
    /// Transpose degree d_α(u).
    Degree {
        #[arg(long)]
        u: String,
        #[arg(long)]
        alpha: i64,
        /// Sample this many centers instead of scanning all of them.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Witness family built from a prefix of the shortest description of x.
    Thm1Witness {
        #[arg(long)]
        x: String,
        #[arg(long)]
        alpha: i64,
        /// Replace the default slack 7⌈log₂ n⌉.
        #[arg(long)]
        slack: Option<i64>,
    },
    /// Mutual-dependency graph as an edge list.
    Graph {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        beta: i64,
    },
    /// Caro-Wei independent set of the dependency graph.
    IndepSet {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        beta: i64,
    },
    CheckPairwise {
        /// Comma-separated bit literals.
        #[arg(long, value_delimiter = ',')]
        set: Vec<String>,
        #[arg(long)]
        alpha: i64,
    },
    CheckMutual {
        #[arg(long, value_delimiter = ',')]
        tuple: Vec<String>,
        #[arg(long)]
        alpha: i64,
        #[arg(long, default_value_t = 40320)]
        perm_cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Intersection of dependency sets of k centers.
    Intersect {
        #[arg(long, value_delimiter = ',')]
        xs: Vec<String>,
        #[arg(long)]
        alpha: i64,
    },
    Cover {
        #[command(subcommand)]
        mode: CoverMode,
    },
    /// Most popular image, bad-for-extraction partition and certificate.
    ExtractCount {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Load an extractor table from `<stem>.json` / `<stem>.bin`.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Save the extractor table under this stem.
        #[arg(long)]
        save: Option<PathBuf>,
        #[arg(long)]
        x: String,
        #[arg(long)]
        alpha: i64,
        #[arg(long, allow_hyphen_values = true)]
        s: i64,
    },
    /// Symmetry-of-information slack distribution.
    SoiReport {
        #[arg(long)]
        n: usize,
        /// Sample this many ordered pairs instead of all of them.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run every hard invariant at length n.
    Selftest {
        #[arg(long, default_value_t = 6)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum CoverMode {
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: i64,
        #[arg(long = "samples")]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the candidate as importable JSON.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    Greedy {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: i64,
        #[arg(long)]
        save: Option<PathBuf>,
    },
    Verify {
        /// Candidate JSON written by `--save`.
        #[arg(long)]
        input: PathBuf,
    },
}
