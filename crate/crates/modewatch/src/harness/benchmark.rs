//! Config-driven benchmark runs: calibrate both detectors to a common
//! false-alarm target, then estimate delay, FAR/MTFA, worst-case delay,
//! ranking quality against per-step baselines, and the trade-off sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{
    lgmm_score, DetectorConfig, GlobalCusum, ModeAwareCusum, PostChangeModel, SequentialDetector,
};
use crate::dynamics::ModeSequenceSpec;
use crate::error::{Error, Result};
use crate::harness::roc::{roc_pr, RankingEval, RocPoint};
use crate::harness::sweep::{calibrate_threshold_scale, sweep_delay_vs_far, SweepPoint};
use crate::harness::{
    default_wadd_gammas, estimate_delay, estimate_far_mtfa, estimate_wadd, simulate_stream,
    Scenario,
};
use crate::mixture::MixtureModel;

/// Version of the benchmark config schema, reported by `--version`.
pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Top-level benchmark configuration document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub scenario: ScenarioConfig,
    pub detector: DetectorSettings,
    #[serde(default)]
    pub baselines: BaselineSettings,
    pub evaluation: EvaluationSettings,
}

/// Scenario section: mode dynamics, pre/post densities, change placement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub mode: ModeSequenceSpec,
    pub pre_change: MixtureModel,
    pub post_change: PostChangeModel,
    /// Change point; `null` keeps the stream in-distribution forever.
    pub gamma: Option<u64>,
    pub length: usize,
}

impl ScenarioConfig {
    pub fn to_scenario(&self) -> Result<Scenario> {
        let scenario = Scenario {
            mode_spec: self.mode.clone(),
            pre_change: self.pre_change.clone(),
            post_change: self.post_change.clone(),
            gamma: self.gamma,
            length: self.length,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Detector section: the two-mode tuning block plus the global baseline
/// threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorSettings {
    pub b0: f64,
    pub b1: f64,
    pub r0: f64,
    pub r1: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub window: usize,
    pub lambda: f64,
    /// Fixed threshold of the global baseline; required wherever that
    /// detector runs.
    #[serde(default)]
    pub global_threshold: Option<f64>,
}

impl DetectorSettings {
    pub fn to_config(
        &self,
        pre_change: MixtureModel,
        post_change: PostChangeModel,
    ) -> Result<DetectorConfig> {
        if pre_change.num_modes() != 2 {
            return Err(Error::invalid_config(
                "pre_change",
                "the detector settings block carries parameters for exactly two modes",
            ));
        }
        DetectorConfig::new(
            pre_change,
            post_change,
            vec![self.b0, self.b1],
            vec![self.r0, self.r1],
            vec![self.alpha0, self.alpha1],
            vec![self.beta0, self.beta1],
            self.window,
            self.lambda,
        )
    }
}

/// Which per-step scoring baselines to evaluate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineSettings {
    pub lgmm: bool,
    pub nll: bool,
}

impl Default for BaselineSettings {
    fn default() -> Self {
        Self {
            lgmm: true,
            nll: true,
        }
    }
}

fn default_delay_gamma() -> u64 {
    100
}
fn default_delay_length() -> usize {
    400
}
fn default_roc_streams() -> usize {
    20
}
fn default_calibration_steps() -> u64 {
    200_000
}

/// Evaluation section: budgets, grid, and the master seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationSettings {
    /// Change-point trials per estimate (delay comparison and sweep points).
    pub trials: usize,
    /// Null-stream steps for the FAR/MTFA estimates.
    pub horizon: u64,
    /// Threshold scales swept around the calibrated operating point.
    pub threshold_grid: Vec<f64>,
    pub master_seed: u64,
    /// When set, both detectors are calibrated to this false-alarm rate
    /// before any estimate runs.
    #[serde(default)]
    pub target_far: Option<f64>,
    #[serde(default = "default_delay_gamma")]
    pub delay_gamma: u64,
    #[serde(default = "default_delay_length")]
    pub delay_length: usize,
    #[serde(default = "default_roc_streams")]
    pub roc_streams: usize,
    /// Trials per change point for the worst-case delay; defaults to `trials`.
    #[serde(default)]
    pub wadd_trials: Option<usize>,
    #[serde(default = "default_calibration_steps")]
    pub calibration_steps: u64,
}

impl EvaluationSettings {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid_config("trials", "must be >= 1"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid_config("horizon", "must be >= 1"));
        }
        if self.wadd_trials.unwrap_or(self.trials) < 100 {
            return Err(Error::invalid_config(
                "wadd_trials",
                "worst-case delay estimation needs at least 100 trials per change point",
            ));
        }
        if self.delay_gamma as usize >= self.delay_length {
            return Err(Error::invalid_config(
                "delay_gamma",
                "must fall before delay_length",
            ));
        }
        if self.roc_streams == 0 {
            return Err(Error::invalid_config("roc_streams", "must be >= 1"));
        }
        Ok(())
    }
}

/// Per-detector results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorReport {
    pub threshold_scale: f64,
    pub far: f64,
    pub mtfa: Option<f64>,
    pub far_upper_bound_only: bool,
    pub wadd: Option<f64>,
    pub wadd_stderr: Option<f64>,
    pub mean_delay: Option<f64>,
    pub delay_stderr: Option<f64>,
    pub censored_frac: Option<f64>,
    pub auroc: Option<f64>,
    pub aupr: Option<f64>,
    pub sweep: Vec<SweepPoint>,
    pub trial_count: u64,
}

/// Ranking quality of a per-step scoring baseline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineReport {
    pub auroc: f64,
    pub aupr: f64,
}

/// Head-to-head summary at the calibrated operating points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub far_ratio: f64,
    /// FARs agree within ±10% relative.
    pub matched_far: bool,
    pub global_mean_delay: f64,
    pub mode_aware_mean_delay: f64,
    /// Positive when the mode-aware detector is faster.
    pub delay_reduction_pct: f64,
    pub auroc_gap: Option<f64>,
}

/// Full benchmark output; serialized as the report document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub master_seed: u64,
    pub config_digest: String,
    pub notes: Vec<String>,
    pub mode_aware: DetectorReport,
    pub global: DetectorReport,
    pub lgmm: Option<BaselineReport>,
    pub nll: Option<BaselineReport>,
    pub comparison: Option<ComparisonReport>,
    /// Pooled mode-aware ROC/PR curve, exported as `roc.csv`.
    pub roc_curve: Vec<RocPoint>,
}

/// Per-step score traces for one stream, shared across all methods.
#[derive(Debug, Clone)]
pub struct ScoreTraces {
    pub labels: Vec<bool>,
    pub mode_aware: Vec<f64>,
    pub global: Vec<f64>,
    pub lgmm: Vec<f64>,
    pub nll: Vec<f64>,
}

/// Runs every method over one simulated stream in scoring mode (no alarm
/// freeze) and labels steps at or after the change as positive.
///
/// The mode-aware score is `max_m W^(m)/θ^(m)`, the closest any mode's
/// statistic stands to its own threshold. Scoring by the active mode's raw
/// statistic alone would zero out post-change steps whose MAP estimate
/// lands on the other mode and cripple the ranking.
pub fn score_traces(
    scenario: &Scenario,
    ma_config: &DetectorConfig,
    global_threshold: f64,
    seed: u64,
) -> Result<ScoreTraces> {
    let gamma = scenario.gamma.ok_or_else(|| {
        Error::SingleClass("no positives; ROC undefined for a null stream".to_string())
    })?;
    let (errors, _) = simulate_stream(scenario, seed)?;
    let mut ma = ModeAwareCusum::new(ma_config.clone());
    let mut global = GlobalCusum::new(
        scenario.pre_change.clone(),
        scenario.post_change.clone(),
        global_threshold,
    )?;
    let nll_model = MixtureModel::single(
        scenario.pre_change.transform(),
        scenario.pre_change.moment_matched_component()?,
    );

    let mut traces = ScoreTraces {
        labels: Vec::with_capacity(errors.len()),
        mode_aware: Vec::with_capacity(errors.len()),
        global: Vec::with_capacity(errors.len()),
        lgmm: Vec::with_capacity(errors.len()),
        nll: Vec::with_capacity(errors.len()),
    };
    for (i, &eps) in errors.iter().enumerate() {
        let t = (i + 1) as u64;
        traces.labels.push(t >= gamma);
        ma.scoring_step(eps)?;
        let (w, theta) = ma.snapshot();
        let rel = w
            .iter()
            .zip(&theta)
            .map(|(wi, ti)| wi / ti)
            .fold(f64::NEG_INFINITY, f64::max);
        traces.mode_aware.push(rel);
        traces.global.push(global.scoring_step(eps)?.statistic);
        traces.lgmm.push(lgmm_score(&scenario.pre_change, eps)?);
        traces.nll.push(lgmm_score(&nll_model, eps)?);
    }
    Ok(traces)
}

/// Pooled ranking evaluation of all four methods over seeded streams.
#[derive(Debug, Clone)]
pub struct MethodRankings {
    pub mode_aware: RankingEval,
    pub global: RankingEval,
    pub lgmm: RankingEval,
    pub nll: RankingEval,
}

pub fn score_stream_rankings(
    scenario: &Scenario,
    ma_config: &DetectorConfig,
    global_threshold: f64,
    streams: usize,
    master_seed: u64,
    domain: u64,
) -> Result<MethodRankings> {
    let traces: Vec<ScoreTraces> = (0..streams)
        .into_par_iter()
        .map(|s| {
            let seed = crate::rng::derive_seed(master_seed, domain, s as u64);
            score_traces(scenario, ma_config, global_threshold, seed)
        })
        .collect::<Result<_>>()?;
    let pool = |pick: fn(&ScoreTraces) -> &Vec<f64>| -> Vec<(f64, bool)> {
        traces
            .iter()
            .flat_map(|t| pick(t).iter().copied().zip(t.labels.iter().copied()))
            .collect()
    };
    Ok(MethodRankings {
        mode_aware: roc_pr(&pool(|t| &t.mode_aware))?,
        global: roc_pr(&pool(|t| &t.global))?,
        lgmm: roc_pr(&pool(|t| &t.lgmm))?,
        nll: roc_pr(&pool(|t| &t.nll))?,
    })
}

// Stream domains: any estimate that feeds a paired comparison uses the same
// domain for both detectors, so they face identical streams.
const DOMAIN_CALIBRATION: u64 = 1;
const DOMAIN_FAR: u64 = 2;
const DOMAIN_WADD: u64 = 3;
const DOMAIN_DELAY: u64 = 4;
const DOMAIN_ROC: u64 = 5;
const DOMAIN_SWEEP: u64 = 6;

/// Factory pair for the two detector arms at a given threshold scale.
struct Arms {
    ma_config: DetectorConfig,
    global_base: f64,
    pre: MixtureModel,
    post: PostChangeModel,
}

impl Arms {
    fn mode_aware_at(&self, scale: f64) -> Result<Box<dyn SequentialDetector>> {
        let cfg = self.ma_config.with_threshold_scale(scale)?;
        Ok(Box::new(ModeAwareCusum::new(cfg)))
    }

    fn global_at(&self, scale: f64) -> Result<Box<dyn SequentialDetector>> {
        Ok(Box::new(GlobalCusum::new(
            self.pre.clone(),
            self.post.clone(),
            self.global_base * scale,
        )?))
    }
}

/// Runs the full benchmark. Deterministic given the config (including its
/// master seed); `config_digest` is recorded verbatim in the report.
pub fn run_benchmark(config: &BenchmarkConfig, config_digest: &str) -> Result<BenchmarkReport> {
    config.evaluation.validate()?;
    let scenario = config.scenario.to_scenario()?;
    let eval = &config.evaluation;
    let master = eval.master_seed;

    let ma_config = config
        .detector
        .to_config(scenario.pre_change.clone(), scenario.post_change.clone())?;
    let global_base = config
        .detector
        .global_threshold
        .ok_or_else(|| Error::invalid_config("global_threshold", "required for benchmarks"))?;
    if !(global_base.is_finite() && global_base > 0.0) {
        return Err(Error::invalid_config("global_threshold", "must be > 0"));
    }
    let arms = Arms {
        ma_config: ma_config.clone(),
        global_base,
        pre: scenario.pre_change.clone(),
        post: scenario.post_change.clone(),
    };
    let mut notes: Vec<String> = ma_config.warnings();

    // Calibrate both arms to the common false-alarm target.
    let null = scenario.null_stream(scenario.length);
    let (scale_ma, scale_g) = match eval.target_far {
        Some(target) => {
            let ma = calibrate_threshold_scale(
                &|s| arms.mode_aware_at(s),
                &null,
                target,
                eval.calibration_steps,
                master,
                DOMAIN_CALIBRATION,
            )?;
            let g = calibrate_threshold_scale(
                &|s| arms.global_at(s),
                &null,
                target,
                eval.calibration_steps,
                master,
                DOMAIN_CALIBRATION,
            )?;
            (ma.scale, g.scale)
        }
        None => (1.0, 1.0),
    };

    let far_ma = estimate_far_mtfa(
        || arms.mode_aware_at(scale_ma).expect("calibrated scale"),
        &null,
        eval.horizon,
        master,
        DOMAIN_FAR,
    )?;
    let far_g = estimate_far_mtfa(
        || arms.global_at(scale_g).expect("calibrated scale"),
        &null,
        eval.horizon,
        master,
        DOMAIN_FAR,
    )?;

    // Change-dependent estimates only exist when the scenario changes.
    let mut wadd_ma = None;
    let mut wadd_g = None;
    let mut delay_ma = None;
    let mut delay_g = None;
    let mut rankings = None;
    if scenario.gamma.is_some() {
        let gammas = default_wadd_gammas(scenario.length);
        let wadd_trials = eval.wadd_trials.unwrap_or(eval.trials);
        wadd_ma = Some(estimate_wadd(
            || arms.mode_aware_at(scale_ma).expect("calibrated scale"),
            &scenario,
            &gammas,
            wadd_trials,
            master,
            DOMAIN_WADD,
        )?);
        wadd_g = Some(estimate_wadd(
            || arms.global_at(scale_g).expect("calibrated scale"),
            &scenario,
            &gammas,
            wadd_trials,
            master,
            DOMAIN_WADD,
        )?);

        let delay_scenario = scenario.with_change(eval.delay_gamma, eval.delay_length);
        delay_ma = Some(estimate_delay(
            || arms.mode_aware_at(scale_ma).expect("calibrated scale"),
            &delay_scenario,
            eval.trials,
            master,
            DOMAIN_DELAY,
        )?);
        delay_g = Some(estimate_delay(
            || arms.global_at(scale_g).expect("calibrated scale"),
            &delay_scenario,
            eval.trials,
            master,
            DOMAIN_DELAY,
        )?);

        rankings = Some(score_stream_rankings(
            &scenario,
            &ma_config.with_threshold_scale(scale_ma)?,
            global_base * scale_g,
            eval.roc_streams,
            master,
            DOMAIN_ROC,
        )?);
    } else {
        notes.push("no positives; ROC undefined".to_string());
        notes.push("null scenario: delay and worst-case delay skipped".to_string());
    }

    // Sweep the grid around the calibrated operating points.
    let (sweep_ma, sweep_g) = if scenario.gamma.is_some() && eval.threshold_grid.len() >= 5 {
        let delay_scenario = scenario.with_change(eval.delay_gamma, eval.delay_length);
        let grid_ma: Vec<f64> = eval.threshold_grid.iter().map(|s| s * scale_ma).collect();
        let grid_g: Vec<f64> = eval.threshold_grid.iter().map(|s| s * scale_g).collect();
        let ma = sweep_delay_vs_far(
            &|s| arms.mode_aware_at(s),
            &null,
            &delay_scenario,
            &grid_ma,
            eval.trials,
            eval.horizon,
            master,
            DOMAIN_SWEEP,
        )?;
        let g = sweep_delay_vs_far(
            &|s| arms.global_at(s),
            &null,
            &delay_scenario,
            &grid_g,
            eval.trials,
            eval.horizon,
            master,
            DOMAIN_SWEEP,
        )?;
        (ma, g)
    } else {
        if scenario.gamma.is_some() {
            notes.push("threshold_grid has fewer than 5 scales: sweep skipped".to_string());
        }
        (Vec::new(), Vec::new())
    };

    let comparison = match (&delay_ma, &delay_g) {
        (Some(ma), Some(g)) => {
            let far_ratio = if far_g.far > 0.0 {
                far_ma.far / far_g.far
            } else {
                f64::NAN
            };
            Some(ComparisonReport {
                far_ratio,
                matched_far: (far_ratio - 1.0).abs() <= 0.10,
                global_mean_delay: g.mean,
                mode_aware_mean_delay: ma.mean,
                delay_reduction_pct: 100.0 * (g.mean - ma.mean) / g.mean,
                auroc_gap: rankings
                    .as_ref()
                    .map(|r| r.mode_aware.auroc - r.global.auroc),
            })
        }
        _ => None,
    };

    let wadd_trial_total = if scenario.gamma.is_some() {
        (eval.wadd_trials.unwrap_or(eval.trials) * default_wadd_gammas(scenario.length).len())
            as u64
    } else {
        0
    };
    let detector_report = |scale: f64,
                           far: &crate::harness::FarMtfa,
                           wadd: &Option<crate::harness::WaddEstimate>,
                           delay: &Option<crate::harness::DelayEstimate>,
                           ranking: Option<&RankingEval>,
                           sweep: Vec<SweepPoint>| {
        DetectorReport {
            threshold_scale: scale,
            far: far.far,
            mtfa: far.mtfa,
            far_upper_bound_only: far.upper_bound_only,
            wadd: wadd.as_ref().map(|w| w.wadd),
            wadd_stderr: wadd.as_ref().map(|w| w.stderr),
            mean_delay: delay.as_ref().map(|d| d.mean),
            delay_stderr: delay.as_ref().map(|d| d.stderr),
            censored_frac: delay.as_ref().map(|d| d.censored_frac),
            auroc: ranking.map(|r| r.auroc),
            aupr: ranking.map(|r| r.aupr),
            sweep,
            trial_count: delay.as_ref().map_or(0, |d| d.trials) + wadd_trial_total,
        }
    };

    Ok(BenchmarkReport {
        schema_version: CONFIG_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: master,
        config_digest: config_digest.to_string(),
        notes,
        mode_aware: detector_report(
            scale_ma,
            &far_ma,
            &wadd_ma,
            &delay_ma,
            rankings.as_ref().map(|r| &r.mode_aware),
            sweep_ma,
        ),
        global: detector_report(
            scale_g,
            &far_g,
            &wadd_g,
            &delay_g,
            rankings.as_ref().map(|r| &r.global),
            sweep_g,
        ),
        lgmm: rankings.as_ref().filter(|_| config.baselines.lgmm).map(|r| BaselineReport {
            auroc: r.lgmm.auroc,
            aupr: r.lgmm.aupr,
        }),
        nll: rankings.as_ref().filter(|_| config.baselines.nll).map(|r| BaselineReport {
            auroc: r.nll.auroc,
            aupr: r.nll.aupr,
        }),
        comparison,
        roc_curve: rankings.map(|r| r.mode_aware.points).unwrap_or_default(),
    })
}
