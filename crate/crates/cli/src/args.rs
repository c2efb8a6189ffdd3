use std::ops::Range;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "adp", version, about = "Exact and approximate dynamic programming with curvature bounds")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Seed for every random choice (random base policies and tables).
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,

    /// Maximum number of strings an exhaustive oracle may evaluate.
    #[arg(long, default_value_t = adp_core::DEFAULT_ENUMERATION_BUDGET, global = true)]
    pub budget: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance exactly and cross-check against brute force.
    Solve {
        /// Instance file, or TINY for the built-in example.
        instance: String,
    },
    /// Run an ADP scheme and print its trace.
    Adp(SchemeArgs),
    /// Trajectory curvatures and beta of an ADP scheme.
    Curvature {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Also report beta against every optimal string.
        #[arg(long)]
        all_optima: bool,
    },
    /// Verify the ADP performance bound and related properties.
    Verify(SchemeArgs),
    /// Verify many random instances and print an aggregate table.
    BoundsSweep(SweepArgs),
    /// Curvatures and greedy bounds of a built-in string function.
    Submodular {
        /// additive:<c> | exp:<c> | coverage | coverage:random[:<c>[:<universe>]] | discounted:random[:<c>]
        spec: String,
        /// Greedy horizon K.
        #[arg(long, default_value_t = 3)]
        horizon: usize,
        /// Longest prefix explored by the global curvature searches.
        #[arg(long, default_value_t = 2)]
        cap: usize,
    },
}

#[derive(Debug, Args)]
pub struct SchemeArgs {
    /// Instance file, or TINY for the built-in example.
    pub instance: String,
    /// myopic | optimal | rollout:<const<k>|myopic|random|table:<file>> | table[:<file>|:random]
    #[arg(long, default_value = "myopic")]
    pub scheme: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Seed range `a..b` (end exclusive).
    #[arg(long, value_parser = parse_range)]
    pub seeds: Range<u64>,
    /// State count; give all three dimensions or none (then drawn per seed).
    #[arg(long)]
    pub states: Option<usize>,
    #[arg(long)]
    pub actions: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Comma-separated schemes to run on every instance.
    #[arg(long, value_delimiter = ',', default_value = "myopic,rollout:myopic,rollout:random,optimal,table:random")]
    pub schemes: Vec<String>,
}

fn parse_range(s: &str) -> Result<Range<u64>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if a >= b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..b)
}
