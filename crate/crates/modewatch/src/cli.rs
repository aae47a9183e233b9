//! Command-line surface: `fit`, `metrics`, `detect`, `generate`, and
//! `benchmark` subcommands over the library.
//!
//! Exit codes: 0 success, 2 input parse, 3 numeric/degenerate, 4 config
//! validation, 5 internal invariant violation. When a flag conflicts with a
//! config-file key, the config file wins and a warning is printed.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::detector::{GlobalCusum, ModeAwareCusum, PostChangeModel, SequentialDetector};
use crate::dynamics::ModeSequenceSpec;
use crate::error::{Error, Result};
use crate::harness::benchmark::{
    run_benchmark, BenchmarkConfig, DetectorSettings, CONFIG_SCHEMA_VERSION,
};
use crate::harness::{simulate_stream, Scenario};
use crate::io::manifest::RunManifest;
use crate::io::{
    atomic_write, format_errors_text, format_metrics_text, format_roc_csv, format_sweep_csv,
    format_trace_text, read_errors_file, read_trajectory_csv, sha256_hex, ErrorStreamRow,
    TraceRow,
};
use crate::mixture::{fit_em, MixtureModel, Transform};
use crate::trajectory::{ade, fde, rmse, ErrorRecord};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (config-schema 1)");

#[derive(Parser)]
#[command(name = "modewatch", version = VERSION, about = "Mode-aware quickest change detection for prediction-error streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a Gaussian mixture to an error stream by seeded EM.
    Fit(FitArgs),
    /// Convert trajectory CSV into per-scene displacement error records.
    Metrics(MetricsArgs),
    /// Run a change detector over an error-stream file.
    Detect(DetectArgs),
    /// Simulate a mode sequence and error stream from a scenario document.
    Generate(GenerateArgs),
    /// Run a config-driven benchmark and persist its report artifacts.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TransformArg {
    Identity,
    Log,
}

impl From<TransformArg> for Transform {
    fn from(value: TransformArg) -> Self {
        match value {
            TransformArg::Identity => Transform::Identity,
            TransformArg::Log => Transform::Log,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Ade,
    Fde,
    Rmse,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AggregateArg {
    Mean,
    Max,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DetectorArg {
    ModeAware,
    Global,
}

#[derive(clap::Args)]
struct FitArgs {
    /// Error-stream file (`t,epsilon[,true_mode]`).
    #[arg(long)]
    input: PathBuf,
    /// Number of mixture components.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, value_enum, default_value_t = TransformArg::Log)]
    transform: TransformArg,
    /// RNG seed; falls back to MODEWATCH_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Relative log-likelihood convergence tolerance.
    #[arg(long, default_value_t = crate::mixture::EM_DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = crate::mixture::EM_DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Output model path (JSON).
    #[arg(long)]
    output: PathBuf,
}

#[derive(clap::Args)]
struct MetricsArgs {
    /// Trajectory CSV (`scene_id,agent_id,t,pred_x,pred_y,true_x,true_y`).
    #[arg(long)]
    input: PathBuf,
    /// Metric feeding the optional detector-ready error stream.
    #[arg(long, value_enum, default_value_t = MetricArg::Ade)]
    metric: MetricArg,
    /// Scene-level aggregation across agents.
    #[arg(long, value_enum, default_value_t = AggregateArg::Mean)]
    aggregate: AggregateArg,
    /// Output metric records (`t,ade,fde,rmse`).
    #[arg(long)]
    output: PathBuf,
    /// Optional detector-ready error stream (`t,epsilon`) using --metric.
    #[arg(long)]
    errors_output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct DetectArgs {
    /// Error-stream file to monitor.
    #[arg(long)]
    input: PathBuf,
    /// Detector configuration document.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    mode: DetectorArg,
    /// Optional per-step trace export path.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long)]
    b1: Option<f64>,
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    beta0: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    global_threshold: Option<f64>,
}

#[derive(clap::Args)]
struct GenerateArgs {
    /// Scenario document (mode spec, pre/post models, change point).
    #[arg(long)]
    spec: PathBuf,
    /// Stream length; a `length` key in the document wins on conflict.
    #[arg(long)]
    length: Option<usize>,
    /// RNG seed; falls back to MODEWATCH_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Output error stream (`t,epsilon,true_mode`).
    #[arg(long)]
    output: PathBuf,
}

#[derive(clap::Args)]
struct BenchmarkArgs {
    /// Benchmark configuration document.
    #[arg(long)]
    config: PathBuf,
    /// Directory for report.json, sweep.csv, roc.csv, config.json, manifest.json.
    #[arg(long)]
    output_dir: PathBuf,
    /// Worker threads for Monte Carlo trials (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Master seed; the config file's master_seed wins on conflict.
    #[arg(long)]
    seed: Option<u64>,
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Metrics(args) => cmd_metrics(&args),
        Command::Detect(args) => cmd_detect(&args),
        Command::Generate(args) => cmd_generate(&args),
        Command::Benchmark(args) => cmd_benchmark(&args),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("MODEWATCH_SEED")
            .ok()
            .and_then(|s| s.trim().parse().ok())
    })
    .unwrap_or(0)
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_json(&bytes)
}

fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => Error::invalid_config("config", e.to_string()),
        _ => Error::Parse {
            line: e.line().max(1),
            message: e.to_string(),
        },
    })
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let rows = read_errors_file(&args.input)?;
    if args.k == 0 {
        return Err(Error::invalid_config("k", "must be >= 1"));
    }
    let samples: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let seed = resolve_seed(args.seed);
    let (model, report) = fit_em(
        &samples,
        args.k,
        args.transform.into(),
        seed,
        args.tol,
        args.max_iter,
    )?;

    let mut doc = serde_json::to_value(&model).map_err(|e| Error::Internal(e.to_string()))?;
    doc.as_object_mut().unwrap().insert(
        "fit_report".to_string(),
        serde_json::to_value(&report).map_err(|e| Error::Internal(e.to_string()))?,
    );
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Internal(e.to_string()))?;
    atomic_write(&args.output, format!("{text}\n").as_bytes())?;
    println!(
        "fitted k={} mixture on {} samples: {} iterations, log-likelihood {:.6}, converged {}",
        args.k,
        samples.len(),
        report.iterations,
        report.final_log_likelihood,
        report.converged
    );
    for (weight, comp) in model.weights().iter().zip(model.components()) {
        println!(
            "  weight {:.4}  mean {:.6}  std {:.6}",
            weight,
            comp.mean(),
            comp.std()
        );
    }
    Ok(())
}

fn cmd_metrics(args: &MetricsArgs) -> Result<()> {
    let scenes = read_trajectory_csv(&args.input)?;
    let mut records = Vec::with_capacity(scenes.len());
    for scene in &scenes {
        let mut values = Vec::with_capacity(scene.agents.len());
        for agent in &scene.agents {
            values.push((
                ade(&agent.pred, &agent.truth)?,
                fde(&agent.pred, &agent.truth)?,
                rmse(&agent.pred, &agent.truth)?,
            ));
        }
        let n = values.len() as f64;
        let agg = |pick: fn(&(f64, f64, f64)) -> f64| -> f64 {
            match args.aggregate {
                AggregateArg::Mean => values.iter().map(pick).sum::<f64>() / n,
                AggregateArg::Max => values.iter().map(pick).fold(f64::NEG_INFINITY, f64::max),
            }
        };
        records.push(ErrorRecord {
            t: scene.scene_id,
            ade: agg(|v| v.0),
            fde: agg(|v| v.1),
            rmse: agg(|v| v.2),
            true_mode: None,
        });
    }
    atomic_write(&args.output, format_metrics_text(&records).as_bytes())?;
    if let Some(errors_path) = &args.errors_output {
        let metric = match args.metric {
            MetricArg::Ade => crate::trajectory::Metric::Ade,
            MetricArg::Fde => crate::trajectory::Metric::Fde,
            MetricArg::Rmse => crate::trajectory::Metric::Rmse,
        };
        let rows: Vec<ErrorStreamRow> = records
            .iter()
            .map(|r| ErrorStreamRow {
                t: r.t,
                epsilon: r.value(metric),
                true_mode: None,
            })
            .collect();
        atomic_write(errors_path, format_errors_text(&rows).as_bytes())?;
    }
    println!("wrote {} scene records", records.len());
    Ok(())
}

/// Detector document: tuning block plus the reference densities.
#[derive(Deserialize)]
struct DetectorDoc {
    #[serde(flatten)]
    settings: DetectorSettings,
    pre_change: MixtureModel,
    post_change: PostChangeModel,
}

fn warn_overridden<T: PartialEq + std::fmt::Display>(
    key: &str,
    flag: Option<T>,
    config_value: &T,
) {
    if let Some(flag_value) = flag {
        if flag_value != *config_value {
            eprintln!(
                "warning: --{key} {flag_value} conflicts with the config file \
                 ({config_value}); the config file wins"
            );
        }
    }
}

fn cmd_detect(args: &DetectArgs) -> Result<()> {
    let doc: DetectorDoc = load_json(&args.config)?;
    let s = &doc.settings;
    warn_overridden("b0", args.b0, &s.b0);
    warn_overridden("b1", args.b1, &s.b1);
    warn_overridden("r0", args.r0, &s.r0);
    warn_overridden("r1", args.r1, &s.r1);
    warn_overridden("alpha0", args.alpha0, &s.alpha0);
    warn_overridden("alpha1", args.alpha1, &s.alpha1);
    warn_overridden("beta0", args.beta0, &s.beta0);
    warn_overridden("beta1", args.beta1, &s.beta1);
    warn_overridden("window", args.window, &s.window);
    warn_overridden("lambda", args.lambda, &s.lambda);
    if let (Some(flag), Some(cfg)) = (args.global_threshold, s.global_threshold) {
        if flag != cfg {
            eprintln!(
                "warning: --global-threshold {flag} conflicts with the config file ({cfg}); \
                 the config file wins"
            );
        }
    }

    let mut detector: Box<dyn SequentialDetector> = match args.mode {
        DetectorArg::ModeAware => {
            let config = s.to_config(doc.pre_change.clone(), doc.post_change.clone())?;
            for warning in config.warnings() {
                eprintln!("warning: {warning}");
            }
            Box::new(ModeAwareCusum::new(config))
        }
        DetectorArg::Global => {
            let threshold = s.global_threshold.or(args.global_threshold).ok_or_else(|| {
                Error::invalid_config("global_threshold", "required for --mode global")
            })?;
            Box::new(GlobalCusum::new(
                doc.pre_change.clone(),
                doc.post_change.clone(),
                threshold,
            )?)
        }
    };

    let rows = read_errors_file(&args.input)?;
    let mut trace = Vec::with_capacity(rows.len());
    let mut alarm = None;
    for row in &rows {
        let outcome = detector.step(row.epsilon)?;
        let (w, theta) = detector.snapshot();
        trace.push(TraceRow::from_step(row.epsilon, &outcome, &w, &theta));
        if outcome.alarmed {
            alarm = Some(outcome.t);
            break;
        }
    }
    if let Some(path) = &args.trace {
        atomic_write(path, format_trace_text(&trace).as_bytes())?;
    }
    match alarm {
        Some(tau) => println!("alarm at t={tau}"),
        None => println!("no alarm in {} steps", rows.len()),
    }
    Ok(())
}

/// Scenario document for `generate`: models plus mode dynamics.
#[derive(Deserialize)]
struct ScenarioDoc {
    mode: ModeSequenceSpec,
    pre_change: MixtureModel,
    #[serde(default)]
    post_change: Option<PostChangeModel>,
    #[serde(default)]
    gamma: Option<u64>,
    #[serde(default)]
    length: Option<usize>,
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let doc: ScenarioDoc = load_json(&args.spec)?;
    if let (Some(flag), Some(cfg)) = (args.length, doc.length) {
        if flag != cfg {
            eprintln!(
                "warning: --length {flag} conflicts with the config file ({cfg}); \
                 the config file wins"
            );
        }
    }
    let length = doc
        .length
        .or(args.length)
        .ok_or_else(|| Error::invalid_config("length", "missing from both flag and document"))?;
    if doc.gamma.is_some() && doc.post_change.is_none() {
        return Err(Error::invalid_config(
            "post_change",
            "required when gamma is set",
        ));
    }
    // A null stream never samples the post-change density; reuse the low
    // mode as a placeholder.
    let post_change = doc.post_change.unwrap_or_else(|| {
        PostChangeModel::Component(doc.pre_change.components()[0])
    });
    let scenario = Scenario {
        mode_spec: doc.mode,
        pre_change: doc.pre_change,
        post_change,
        gamma: doc.gamma,
        length,
    };
    let seed = resolve_seed(args.seed);
    let (errors, modes) = simulate_stream(&scenario, seed)?;
    let rows: Vec<ErrorStreamRow> = errors
        .iter()
        .zip(&modes.modes)
        .enumerate()
        .map(|(i, (&epsilon, &mode))| ErrorStreamRow {
            t: (i + 1) as u64,
            epsilon,
            true_mode: Some(mode),
        })
        .collect();
    atomic_write(&args.output, format_errors_text(&rows).as_bytes())?;
    println!("wrote {} steps (seed {seed})", rows.len());
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    let bytes =
        std::fs::read(&args.config).map_err(|e| Error::io(args.config.display().to_string(), e))?;
    let digest = sha256_hex(&bytes);
    let config: BenchmarkConfig = parse_json(&bytes)?;
    if let Some(flag_seed) = args.seed {
        if flag_seed != config.evaluation.master_seed {
            eprintln!(
                "warning: --seed {flag_seed} conflicts with the config file ({}); \
                 the config file wins",
                config.evaluation.master_seed
            );
        }
    }

    let report = match args.workers {
        Some(workers) => {
            if workers == 0 {
                return Err(Error::invalid_config("workers", "must be >= 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Internal(e.to_string()))?;
            pool.install(|| run_benchmark(&config, &digest))?
        }
        None => run_benchmark(&config, &digest)?,
    };

    std::fs::create_dir_all(&args.output_dir)
        .map_err(|e| Error::io(args.output_dir.display().to_string(), e))?;
    let report_json =
        serde_json::to_string_pretty(&report).map_err(|e| Error::Internal(e.to_string()))?;
    let out = |name: &str| args.output_dir.join(name);
    atomic_write(&out("report.json"), format!("{report_json}\n").as_bytes())?;
    atomic_write(
        &out("sweep.csv"),
        format_sweep_csv(&[
            ("mode_aware", report.mode_aware.sweep.as_slice()),
            ("global", report.global.sweep.as_slice()),
        ])
        .as_bytes(),
    )?;
    atomic_write(&out("roc.csv"), format_roc_csv(&report.roc_curve).as_bytes())?;
    atomic_write(&out("config.json"), &bytes)?;
    let manifest = RunManifest::new(
        digest,
        config.evaluation.master_seed,
        CONFIG_SCHEMA_VERSION,
        vec![
            "report.json".to_string(),
            "sweep.csv".to_string(),
            "roc.csv".to_string(),
            "config.json".to_string(),
        ],
    );
    let manifest_json =
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::Internal(e.to_string()))?;
    atomic_write(&out("manifest.json"), format!("{manifest_json}\n").as_bytes())?;

    for note in &report.notes {
        eprintln!("note: {note}");
    }
    println!(
        "mode-aware: far {:.6} mean delay {}",
        report.mode_aware.far,
        report
            .mode_aware
            .mean_delay
            .map_or("n/a".to_string(), |d| format!("{d:.2}")),
    );
    println!(
        "global:     far {:.6} mean delay {}",
        report.global.far,
        report
            .global
            .mean_delay
            .map_or("n/a".to_string(), |d| format!("{d:.2}")),
    );
    if let Some(cmp) = &report.comparison {
        println!(
            "delay reduction {:.1}% (far ratio {:.3}, matched {})",
            cmp.delay_reduction_pct, cmp.far_ratio, cmp.matched_far
        );
    }
    if let (Some(ma), Some(g)) = (report.mode_aware.auroc, report.global.auroc) {
        println!("auroc: mode-aware {ma:.4} global {g:.4}");
    }
    println!("report written to {}", args.output_dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_string_matches_schema_constant() {
        assert!(VERSION.contains(&format!("config-schema {CONFIG_SCHEMA_VERSION}")));
    }

    #[test]
    fn seed_resolution_prefers_flag() {
        assert_eq!(resolve_seed(Some(9)), 9);
    }
}
