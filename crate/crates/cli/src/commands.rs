use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dppdesign::kernel::{load_kernel, synth_kernel, write_kernel, KernelMatrix, MatrixFormat, SynthParams};
use dppdesign::records::{expected_record_count, extract_records, jitter_trace, write_records_csv, JitterConfig};
use dppdesign::rng::seeded_rng;
use dppdesign::search::{
    dpp_search, exchange_refine, exhaustive_search_with_limit, genetic_search, greedy_backward, greedy_forward,
    parse_trace_csv, write_trace_csv, DppSearchConfig, GaConfig, SampleTrace,
};
use dppdesign::stats::{iqr_sorted, sorted};
use dppdesign::stopping::{
    build_stopping_report_with, write_stopping_csv, RecordStoppingRule, StopCriterion, StoppingPolicy, StoppingReport,
    TailConvention,
};
use dppdesign::tail::{
    density_overlay, fit_family, qq_points, write_density_csv, write_qq_csv, Family, FitReport, FittedCdf,
};

use crate::args::{AnalyzeArgs, Convention, Criterion, FitFamily, FitTailArgs, GenKernelArgs, Method, SolveArgs, StoppingArgs, TailFamily};
use crate::error::{CliError, CliResult};

/// First 16 hex characters of the SHA-256 of a trace file.
pub fn run_id(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..8])
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct Metadata<'a, C: Serialize> {
    command: &'a str,
    version: &'a str,
    seed: Option<u64>,
    config: &'a C,
    config_hash: String,
    wall_time_seconds: f64,
    timestamp_unix: u64,
}

/// Run metadata, the only output that varies between identical reruns.
fn write_metadata<C: Serialize>(dir: &Path, command: &str, config: &C, seed: Option<u64>, started: Instant) -> CliResult<()> {
    let config_hash = hex::encode(Sha256::digest(serde_json::to_string(config).expect("serializable config")));
    let meta = Metadata {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        config,
        config_hash,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    write_file(dir, &format!("metadata_{}.json", command.replace('-', "_")), &to_json(&meta))?;
    Ok(())
}

pub fn gen_kernel(args: &GenKernelArgs) -> CliResult<()> {
    let started = Instant::now();
    let kernel: KernelMatrix<f64> = synth_kernel(SynthParams {
        n: args.n,
        lengthscale: args.synth.lengthscale,
        nugget: args.synth.nugget,
        seed: args.synth.synth_seed,
    })?;
    prepare_dir(&args.out_dir)?;
    let path = write_file(&args.out_dir, "kernel.csv", &write_kernel(&kernel))?;
    write_metadata(&args.out_dir, "gen-kernel", args, Some(args.synth.synth_seed), started)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BestJson {
    pub method: String,
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    pub indices: Vec<usize>,
    pub labels: Option<Vec<String>>,
    pub log_det: f64,
    pub iterations: usize,
    pub stopped_at: Option<u64>,
    pub run_id: String,
}

fn solve_kernel(args: &SolveArgs) -> CliResult<KernelMatrix<f64>> {
    match (&args.kernel, args.synth_n) {
        (Some(path), None) => {
            let format: MatrixFormat = args.kernel_format.parse()?;
            Ok(load_kernel(path, format)?)
        }
        (None, Some(n)) => Ok(synth_kernel(SynthParams {
            n,
            lengthscale: args.synth.lengthscale,
            nugget: args.synth.nugget,
            seed: args.synth.synth_seed,
        })?),
        _ => Err(CliError::config("give exactly one of --kernel and --synth-n")),
    }
}

fn policy(args: &SolveArgs) -> StoppingPolicy {
    StoppingPolicy {
        epsilon: args.epsilon,
        delta: args.delta,
        max_expected_wait: args.max_expected_wait,
        check_every: args.check_every,
        criterion: match args.stop_criterion {
            Criterion::Both => StopCriterion::Both,
            Criterion::IncrementOnly => StopCriterion::IncrementOnly,
            Criterion::WaitOnly => StopCriterion::WaitOnly,
        },
    }
}

fn single(log_det: f64, indices: &[usize]) -> SampleTrace<f64> {
    let mut t = SampleTrace::new();
    t.push_next(log_det, indices.to_vec());
    t
}

pub fn solve(args: &SolveArgs) -> CliResult<()> {
    let started = Instant::now();
    let kernel = solve_kernel(args)?;
    let k = args.k;
    let (trace, best, stopped_at) = match args.method {
        Method::Dpp => {
            let cfg = DppSearchConfig {
                max_iters: args.max_iters,
                seed: args.seed,
                workers: args.workers,
            };
            let out = if args.stop {
                let family = match args.stop_family {
                    TailFamily::Gpd => Family::Gpd,
                    TailFamily::CensWeibull => Family::CensWeibull,
                };
                let jitter = JitterConfig::new(args.jitter_sigma, args.jitter_seed)?;
                let mut rule = RecordStoppingRule::new(policy(args), family, args.threshold_quantile, jitter)?;
                dpp_search(&kernel, k, &cfg, Some(&mut rule))?
            } else {
                dpp_search(&kernel, k, &cfg, None)?
            };
            (out.trace, out.best, out.stopped_at)
        }
        Method::Greedy | Method::GreedyBackward | Method::Exchange | Method::Exhaustive => {
            let best = match args.method {
                Method::Greedy => greedy_forward(&kernel, k)?,
                Method::GreedyBackward => greedy_backward(&kernel, k)?,
                Method::Exchange => exchange_refine(&kernel, &greedy_forward(&kernel, k)?)?,
                _ => exhaustive_search_with_limit(&kernel, k, args.exhaustive_limit)?,
            };
            (single(best.log_det(), best.indices()), best, None)
        }
        Method::Ga => {
            let cfg = GaConfig {
                population: args.population,
                p_cross: args.p_cross,
                p_mutprop: args.p_mutprop,
                p_mut: args.p_mut,
                elite_fraction: args.elite_fraction,
                tournament_size: args.tournament_size,
                generations: args.generations,
            };
            let out = genetic_search(&kernel, k, &cfg, &mut seeded_rng(args.seed))?;
            (out.trace, out.best, None)
        }
    };
    prepare_dir(&args.out_dir)?;
    let csv = write_trace_csv(&trace);
    write_file(&args.out_dir, "trace.csv", &csv)?;
    let labels = kernel
        .labels()
        .map(|l| best.indices().iter().map(|&i| l[i].clone()).collect());
    let summary = BestJson {
        method: args.method.as_str().to_string(),
        k,
        n: kernel.dim(),
        seed: args.seed,
        indices: best.indices().to_vec(),
        labels,
        log_det: best.log_det(),
        iterations: trace.len(),
        stopped_at,
        run_id: run_id(csv.as_bytes()),
    };
    write_file(&args.out_dir, "best.json", &to_json(&summary))?;
    write_metadata(&args.out_dir, "solve", args, Some(args.seed), started)?;
    println!("{} best log_det {} at {:?}", summary.method, summary.log_det, summary.indices);
    if let Some(at) = stopped_at {
        println!("stopped after {at} iterations");
    }
    Ok(())
}

fn load_trace(path: &Path) -> CliResult<(SampleTrace<f64>, String)> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|e| CliError::io(path, e))?;
    let trace = parse_trace_csv(&text, path)?;
    Ok((trace, run_id(text.as_bytes())))
}

fn maybe_jitter(trace: SampleTrace<f64>, sigma: Option<f64>, seed: u64) -> CliResult<SampleTrace<f64>> {
    match sigma {
        Some(s) => Ok(jitter_trace(&trace, &JitterConfig::new(s, seed)?)?.trace),
        None => Ok(trace),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RecordsSummary {
    pub run_id: String,
    pub n_observations: u64,
    pub observed_records: usize,
    pub expected_records: f64,
    pub variance_records: f64,
    pub ln_n: f64,
    pub jitter_sigma: Option<f64>,
    pub jitter_seed: Option<u64>,
    pub record_times: Vec<u64>,
    pub record_values: Vec<f64>,
}

pub fn analyze_records(args: &AnalyzeArgs) -> CliResult<()> {
    let started = Instant::now();
    let (trace, id) = load_trace(&args.trace)?;
    let trace = maybe_jitter(trace, args.jitter_sigma, args.jitter_seed)?;
    let seq = extract_records(&trace)?;
    let n = seq.total_observations();
    let (mean, var) = expected_record_count(n)?;
    let summary = RecordsSummary {
        run_id: id,
        n_observations: n,
        observed_records: seq.len(),
        expected_records: mean,
        variance_records: var,
        ln_n: (n as f64).ln(),
        jitter_sigma: args.jitter_sigma,
        jitter_seed: args.jitter_sigma.map(|_| args.jitter_seed),
        record_times: seq.times(),
        record_values: seq.values(),
    };
    prepare_dir(&args.out_dir)?;
    write_file(&args.out_dir, "records.csv", &write_records_csv(&seq))?;
    write_file(&args.out_dir, "records_summary.json", &to_json(&summary))?;
    write_metadata(&args.out_dir, "analyze-records", args, args.jitter_sigma.map(|_| args.jitter_seed), started)?;
    println!(
        "{} records in {} observations (expected {:.4}, sd {:.4})",
        summary.observed_records,
        n,
        mean,
        var.sqrt()
    );
    Ok(())
}

fn family_of(f: FitFamily) -> Family {
    match f {
        FitFamily::Gpd => Family::Gpd,
        FitFamily::CensWeibull => Family::CensWeibull,
        FitFamily::Weibull => Family::Weibull,
        FitFamily::Lognormal => Family::LogNormal,
    }
}

pub fn fit_tail(args: &FitTailArgs) -> CliResult<()> {
    let started = Instant::now();
    let (trace, id) = load_trace(&args.trace)?;
    let sigma = (args.jitter_sigma != 0.0).then_some(args.jitter_sigma);
    let trace = maybe_jitter(trace, sigma, args.jitter_seed)?;
    let values = trace.values();
    let fits = args
        .families
        .iter()
        .map(|&f| fit_family(family_of(f), &values, args.threshold_quantile))
        .collect::<Result<Vec<_>, _>>()?;
    prepare_dir(&args.out_dir)?;
    for fit in &fits {
        let name = fit.family().as_str();
        let mut report = fit.report(Some(args.threshold_quantile));
        report.jitter_sigma = sigma;
        report.jitter_seed = sigma.map(|_| args.jitter_seed);
        report.run_id = Some(id.clone());
        write_file(&args.out_dir, &format!("fit_{name}.json"), &to_json(&report))?;
        write_file(&args.out_dir, &format!("qq_{name}.csv"), &write_qq_csv(&qq_points(fit, &values, false)))?;
        if fit.threshold().is_some() {
            let tail = qq_points(fit, &values, true);
            write_file(&args.out_dir, &format!("qq_{name}_tail.csv"), &write_qq_csv(&tail))?;
        }
        let density = density_overlay(fit, &values, args.density_points);
        write_file(&args.out_dir, &format!("density_{name}.csv"), &write_density_csv(&density))?;
        println!("{name}: {:?}", report.parameters);
    }
    write_metadata(&args.out_dir, "fit-tail", args, sigma.map(|_| args.jitter_seed), started)?;
    Ok(())
}

#[derive(Serialize)]
struct StoppingJson<'a> {
    run_id: &'a str,
    report: &'a StoppingReport,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::io(path, e))
}

pub fn stopping_report(args: &StoppingArgs) -> CliResult<()> {
    let started = Instant::now();
    let (trace, id) = load_trace(&args.trace)?;
    let reports: Vec<(PathBuf, FitReport)> = args
        .fits
        .iter()
        .map(|p| read_json(p).map(|r| (p.clone(), r)))
        .collect::<CliResult<_>>()?;
    for (path, r) in &reports {
        if r.run_id.as_deref() != Some(id.as_str()) {
            return Err(CliError::config(format!(
                "run id mismatch: {} has {:?}, trace {} has {id:?}",
                path.display(),
                r.run_id.as_deref().unwrap_or("none"),
                args.trace.display()
            )));
        }
    }
    let jitter = (reports[0].1.jitter_sigma, reports[0].1.jitter_seed);
    if reports.iter().any(|(_, r)| (r.jitter_sigma, r.jitter_seed) != jitter) {
        return Err(CliError::config("fit reports were made with different jitter settings"));
    }
    let reference = match &args.reference_best {
        Some(p) => Some(read_json::<BestJson>(p)?.log_det),
        None => args.reference,
    };
    let trace = maybe_jitter(trace, jitter.0, jitter.1.unwrap_or(0))?;
    let values = trace.values();
    let fits = reports
        .iter()
        .map(|(_, r)| FittedCdf::from_report(r, &values))
        .collect::<Result<Vec<_>, _>>()?;
    let records = extract_records(&trace)?;
    let scale = iqr_sorted(&sorted(&values));
    let convention = match args.gpd_convention {
        Convention::Composite => TailConvention::Composite,
        Convention::TailOnly => TailConvention::TailOnly,
    };
    let out = build_stopping_report_with(&records, &fits, &args.epsilons, reference, scale, convention)?;
    prepare_dir(&args.out_dir)?;
    for report in &out {
        let name = report.family.as_str();
        write_file(&args.out_dir, &format!("stopping_{name}.csv"), &write_stopping_csv(report))?;
        write_file(&args.out_dir, &format!("stopping_{name}.json"), &to_json(&StoppingJson { run_id: &id, report }))?;
        if let Some(last) = report.rows.last() {
            println!(
                "{name}: {} records, final record {} expected wait {}",
                report.rows.len(),
                last.record,
                last.expected_wait
            );
        }
        if report.used_additive() {
            println!("{name}: non-positive records use additive increments of epsilon * {scale}");
        }
    }
    write_metadata(&args.out_dir, "stopping-report", args, None, started)?;
    Ok(())
}
