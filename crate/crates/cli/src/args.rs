use std::path::PathBuf;

use clap::{ArgAction, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Maximum-entropy design search with record-based stopping diagnostics.
///
/// Every option can also be set in a flat `key = value` file passed with
/// `--config`; keys are option names without the leading dashes and flags
/// given on the command line take precedence.
#[derive(Debug, Parser)]
#[command(name = "dppdesign", version, args_override_self = true)]
pub struct Cli {
    /// Flat key=value file with option defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic exponential-covariance kernel.
    GenKernel(GenKernelArgs),
    /// Search for the k-subset with the largest log-determinant.
    Solve(SolveArgs),
    /// Extract records from a trace and compare with the i.i.d. record laws.
    AnalyzeRecords(AnalyzeArgs),
    /// Fit tail models to the (jittered) trace values.
    FitTail(FitTailArgs),
    /// Record-increment probabilities and expected waits under fitted models.
    StoppingReport(StoppingArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenKernel(_) => "gen-kernel",
            Command::Solve(_) => "solve",
            Command::AnalyzeRecords(_) => "analyze-records",
            Command::FitTail(_) => "fit-tail",
            Command::StoppingReport(_) => "stopping-report",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Lengthscale of the exponential covariance.
    #[arg(long, default_value_t = 0.5)]
    pub lengthscale: f64,

    /// Diagonal nugget.
    #[arg(long, default_value_t = 1e-6)]
    pub nugget: f64,

    /// Seed for the site locations.
    #[arg(long, default_value_t = 0)]
    pub synth_seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenKernelArgs {
    /// Number of sites.
    #[arg(long)]
    pub n: usize,

    #[command(flatten)]
    pub synth: SynthArgs,

    /// Output directory (kernel.csv plus run metadata).
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dpp,
    Greedy,
    GreedyBackward,
    Exchange,
    Ga,
    Exhaustive,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dpp => "dpp",
            Method::Greedy => "greedy",
            Method::GreedyBackward => "greedy-backward",
            Method::Exchange => "exchange",
            Method::Ga => "ga",
            Method::Exhaustive => "exhaustive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    Both,
    IncrementOnly,
    WaitOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailFamily {
    Gpd,
    CensWeibull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    Composite,
    TailOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitFamily {
    Gpd,
    CensWeibull,
    Weibull,
    Lognormal,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["kernel", "synth_n"]))]
pub struct SolveArgs {
    /// Kernel matrix file (comma or whitespace separated rows).
    #[arg(long)]
    pub kernel: Option<PathBuf>,

    /// Cell separator of the kernel file: auto, csv or whitespace.
    #[arg(long, default_value = "auto")]
    pub kernel_format: String,

    /// Use a synthetic kernel with this many sites instead of a file.
    #[arg(long)]
    pub synth_n: Option<usize>,

    #[command(flatten)]
    pub synth: SynthArgs,

    /// Subset size.
    #[arg(long)]
    pub k: usize,

    #[arg(long, value_enum, default_value_t = Method::Dpp)]
    pub method: Method,

    /// k-DPP iterations.
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: u64,

    /// Seed for the k-DPP streams and the genetic algorithm.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for the k-DPP search, 0 = all cores.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,

    /// Largest number of subsets the exhaustive method may enumerate.
    #[arg(long, default_value_t = dppdesign::search::EXHAUSTIVE_LIMIT)]
    pub exhaustive_limit: u128,

    /// GA generations.
    #[arg(long, default_value_t = 1000)]
    pub generations: usize,

    /// GA population size.
    #[arg(long, default_value_t = 100)]
    pub population: usize,

    /// GA crossover fraction.
    #[arg(long, default_value_t = 0.75)]
    pub p_cross: f64,

    /// GA fraction of individuals mutated.
    #[arg(long, default_value_t = 0.2)]
    pub p_mutprop: f64,

    /// GA per-gene mutation probability.
    #[arg(long, default_value_t = 0.05)]
    pub p_mut: f64,

    /// GA elite fraction.
    #[arg(long, default_value_t = 0.1)]
    pub elite_fraction: f64,

    /// GA tournament size.
    #[arg(long, default_value_t = 4)]
    pub tournament_size: usize,

    /// Stop the k-DPP search early with the record-based rule.
    #[arg(long, action = ArgAction::SetTrue)]
    pub stop: bool,

    /// Which stopping conditions must hold.
    #[arg(long, value_enum, default_value_t = Criterion::Both)]
    pub stop_criterion: Criterion,

    /// Tail model used by the stopping rule.
    #[arg(long, value_enum, default_value_t = TailFamily::Gpd)]
    pub stop_family: TailFamily,

    /// Relative record increment for the stopping rule.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,

    /// Increment-probability floor.
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,

    /// Expected wait (iterations) beyond which the search stops.
    #[arg(long, default_value_t = 1e6)]
    pub max_expected_wait: f64,

    /// Iterations between stopping checks.
    #[arg(long, default_value_t = 1000)]
    pub check_every: usize,

    /// Tail threshold quantile for the stopping rule.
    #[arg(long, default_value_t = 0.9)]
    pub threshold_quantile: f64,

    /// Jitter standard deviation for the stopping rule.
    #[arg(long, default_value_t = 1e-8)]
    pub jitter_sigma: f64,

    #[arg(long, default_value_t = 0)]
    pub jitter_seed: u64,

    /// Output directory (trace.csv, best.json, run metadata).
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Trace CSV written by `solve`.
    #[arg(long)]
    pub trace: PathBuf,

    /// Gaussian jitter standard deviation; no jitter when omitted.
    #[arg(long)]
    pub jitter_sigma: Option<f64>,

    #[arg(long, default_value_t = 0)]
    pub jitter_seed: u64,

    /// Output directory (records.csv, records_summary.json).
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitTailArgs {
    #[arg(long)]
    pub trace: PathBuf,

    /// Tail threshold as a quantile of the trace values.
    #[arg(long, default_value_t = 0.9)]
    pub threshold_quantile: f64,

    /// Comma-separated families to fit.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "gpd,cens-weibull,weibull,lognormal")]
    pub families: Vec<FitFamily>,

    /// Gaussian jitter standard deviation, 0 disables jittering.
    #[arg(long, default_value_t = 1e-8)]
    pub jitter_sigma: f64,

    #[arg(long, default_value_t = 0)]
    pub jitter_seed: u64,

    /// Points in the density-overlay grid.
    #[arg(long, default_value_t = dppdesign::tail::DENSITY_GRID)]
    pub density_points: usize,

    /// Output directory (fit, QQ and density files per family).
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StoppingArgs {
    #[arg(long)]
    pub trace: PathBuf,

    /// Comma-separated fit reports written by `fit-tail`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub fits: Vec<PathBuf>,

    /// Relative increments, one probability column each.
    #[arg(long, value_delimiter = ',', default_value = "0.0001,0.0005,0.001")]
    pub epsilons: Vec<f64>,

    /// Reference value to beat, such as a greedy log-determinant.
    #[arg(long, conflicts_with = "reference_best")]
    pub reference: Option<f64>,

    /// How GPD fits enter the report: the composite cdf, or the exceedance
    /// law alone (F = 0 below the threshold, waits counted in exceedances).
    #[arg(long, value_enum, default_value_t = Convention::Composite)]
    pub gpd_convention: Convention,

    /// Take the reference from a best.json written by `solve`.
    #[arg(long)]
    pub reference_best: Option<PathBuf>,

    /// Output directory (stopping_<family>.csv and .json).
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Splices `key = value` lines from the `--config` file into the argument
/// list right after the subcommand, so later command-line flags win.
pub fn expand_config(args: Vec<String>) -> CliResult<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(path.as_ref(), e))?;
    let cmd = Cli::command();
    let Some((pos, sub)) = args
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| cmd.find_subcommand(a).map(|s| (i, s.clone())))
    else {
        return Ok(args);
    };
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("{path}:{}: expected key = value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" {
            return Err(CliError::config(format!("{path}:{}: nested config files are not supported", lineno + 1)));
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| CliError::config(format!("{path}:{}: unknown key {key:?} for {}", lineno + 1, sub.get_name())))?;
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value {
                "true" => extra.push(format!("--{key}")),
                "false" => {}
                other => return Err(CliError::config(format!("{path}:{}: {key} expects true or false, got {other:?}", lineno + 1))),
            }
        } else {
            extra.push(format!("--{key}={value}"));
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn config_values_precede_command_line() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "# run\nk = 4\nmax_iters = 50\nstop = true\nmethod = greedy\n").unwrap();
        let args = v(&["dppdesign", "solve", "--config", cfg.to_str().unwrap(), "--synth-n", "8", "--out-dir", "x", "--max-iters", "7"]);
        let expanded = expand_config(args).unwrap();
        let cli = Cli::try_parse_from(expanded).unwrap();
        let Command::Solve(s) = cli.command else { panic!() };
        assert_eq!((s.k, s.max_iters, s.stop, s.method), (4, 7, true, Method::Greedy));
    }

    #[test]
    fn unknown_config_key() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "bogus = 1\n").unwrap();
        let args = v(&["dppdesign", "solve", "--config", cfg.to_str().unwrap()]);
        assert_eq!(expand_config(args).unwrap_err().code(), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
