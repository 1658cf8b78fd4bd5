use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use jumpchamp_core::prime_engine::DEFAULT_SEGMENT_SIZE;
use jumpchamp_core::{AnchorConvention, GapPattern};

#[derive(Parser, Debug)]
#[command(
    name = "jumpchamp",
    version,
    about = "Jumping champions among consecutive primes"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count gap patterns of k+1 consecutive primes at each checkpoint
    Census(CensusArgs),
    /// Rank candidate patterns by corrected Hardy-Littlewood prediction
    Predict(PredictArgs),
    /// Run a verification suite
    Verify(VerifyArgs),
    /// Evaluate truncated singular series
    Series(SeriesArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Worker threads (default: hardware parallelism)
    #[arg(long, value_parser = parse_count)]
    pub threads: Option<u64>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output path (a directory for `census`, a file otherwise)
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// key = value file mirroring the long flags
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    Largest,
    Smallest,
}

impl From<Convention> for AnchorConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Largest => AnchorConvention::LargestLeX,
            Convention::Smallest => AnchorConvention::SmallestLeX,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct CensusArgs {
    /// Scan up to this bound (defaults to the last checkpoint)
    #[arg(long, value_parser = parse_count)]
    pub limit: Option<u64>,

    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=8))]
    pub k: u64,

    /// Comma-separated, increasing
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, value_parser = parse_count)]
    pub checkpoints: Vec<u64>,

    #[arg(long, value_enum, default_value_t = Convention::Largest)]
    pub convention: Convention,

    #[arg(long, value_parser = parse_count, default_value_t = DEFAULT_SEGMENT_SIZE)]
    pub segment_size: u64,

    /// State file; resumed from if present, rewritten as the scan advances
    #[arg(long)]
    pub resume: Option<PathBuf>,

    /// Integers sieved between state saves
    #[arg(long, value_parser = parse_count, default_value_t = 1 << 28)]
    pub resume_every: u64,

    /// Write every sieved prime, one per line
    #[arg(long)]
    pub dump_primes: Option<PathBuf>,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct PredictArgs {
    #[arg(long, value_parser = parse_count)]
    pub x: u64,

    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=8))]
    pub k: u64,

    /// Every k-pattern with d_k <= dmax
    #[arg(long, value_parser = parse_count, conflicts_with = "patterns")]
    pub dmax: Option<u64>,

    /// Explicit patterns, `;`-separated, each comma-separated diffs
    #[arg(long, value_delimiter = ';', action = ArgAction::Set, value_parser = parse_pattern)]
    pub patterns: Vec<GapPattern>,

    #[arg(long, value_parser = parse_count, default_value_t = 1_000_000)]
    pub truncation: u64,

    #[command(flatten)]
    pub common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Bonferroni,
    SieveBound,
    Average,
    AIdentity,
    Gallagher,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,

    /// Comma-separated bounds
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, value_parser = parse_count)]
    pub x: Vec<u64>,

    /// Comma-separated integers: a gap pattern or an offset set
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, allow_negative_numbers = true)]
    pub pattern: Vec<i64>,

    /// Bonferroni depth
    #[arg(long = "I", alias = "depth", value_parser = parse_count)]
    pub depth: Option<u64>,

    /// Bonferroni upper-bound cutoff H (default d_k)
    #[arg(long = "cutoff", value_parser = parse_count)]
    pub h_cut: Option<u64>,

    /// Ranges for the average suite
    #[arg(long = "H", value_delimiter = ',', action = ArgAction::Set, value_parser = parse_count)]
    pub h_values: Vec<u64>,

    #[arg(long, value_parser = parse_count)]
    pub truncation: Option<u64>,

    /// Largest prime in the identity grid
    #[arg(long, value_parser = parse_count, default_value_t = 1000)]
    pub pmax: u64,

    /// Random sets in the identity grid
    #[arg(long, value_parser = parse_count, default_value_t = 100)]
    pub samples: u64,

    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,

    #[arg(long, default_value_t = 2)]
    pub k: usize,

    #[arg(long, value_parser = parse_count, default_value_t = 100)]
    pub dlimit: u64,

    /// Also run the short-interval average for `k,D,H`
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, value_parser = parse_count)]
    pub orw: Vec<u64>,

    /// Treat failed trend checks as hard failures
    #[arg(long)]
    pub strict: bool,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct SeriesArgs {
    /// Offset sets, `;`-separated, each comma-separated
    #[arg(long, value_delimiter = ';', action = ArgAction::Set, value_parser = parse_set, required = true)]
    pub set: Vec<Vec<i64>>,

    #[arg(long, value_parser = parse_count, default_value_t = 1_000_000)]
    pub truncation: u64,

    #[command(flatten)]
    pub common: Common,
}

/// Nonnegative integer, optionally in scientific notation (`1e6`, `2.5e3`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !f.is_finite() || f < 0.0 {
        return Err(format!("`{s}` must be a finite nonnegative number"));
    }
    if f.fract() != 0.0 {
        return Err(format!("`{s}` is not an integer"));
    }
    if f >= 18_446_744_073_709_551_616.0 {
        return Err(format!("`{s}` exceeds the 64-bit range"));
    }
    Ok(f as u64)
}

pub fn parse_pattern(s: &str) -> Result<GapPattern, String> {
    s.trim().parse().map_err(|e| format!("{e}"))
}

pub fn parse_set(s: &str) -> Result<Vec<i64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| format!("`{t}` is not an integer"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("2.5e3"), Ok(2500));
        assert_eq!(parse_count("1_000"), Ok(1000));
        assert_eq!(parse_count("18446744073709551615"), Ok(u64::MAX));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("1e30").is_err());
        assert!(parse_count("nan").is_err());
    }

    #[test]
    fn sets() {
        assert_eq!(parse_set("0, 2,6"), Ok(vec![0, 2, 6]));
        assert!(parse_set("0,x").is_err());
        assert_eq!(parse_pattern("2,6").unwrap().diffs(), &[2, 6]);
    }

    #[test]
    fn cli_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
