//! Seeded Monte Carlo harness: synthetic scenarios, detector trials, and
//! the delay / false-alarm / ranking estimators built on top of them.
//!
//! Every stream is a pure function of `(master_seed, domain, trial)`, so
//! trials are safe to fan out across workers; aggregation always reduces in
//! trial order, making reports identical for one worker and many.

pub mod benchmark;
pub mod roc;
pub mod sweep;

use rand::Rng;
use rayon::prelude::*;

use crate::detector::{PostChangeModel, SequentialDetector};
use crate::dynamics::{generate, ModeSequence, ModeSequenceSpec};
use crate::error::{Error, Result};
use crate::mixture::MixtureModel;
use crate::rng::{derive_rng, derive_seed};

/// One simulated stream: a pre-change mixture driven by a latent mode
/// sequence, switching to the post-change density at `gamma` (`None` keeps
/// the stream null forever).
#[derive(Debug, Clone)]
pub struct Scenario {
    pub mode_spec: ModeSequenceSpec,
    pub pre_change: MixtureModel,
    pub post_change: PostChangeModel,
    pub gamma: Option<u64>,
    pub length: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::invalid_config("length", "must be >= 1"));
        }
        if let Some(g) = self.gamma {
            if g < 1 || g > self.length as u64 {
                return Err(Error::invalid_config(
                    "gamma",
                    format!("{g} must lie in [1, length={}]", self.length),
                ));
            }
        }
        if self.mode_spec.num_modes() != self.pre_change.num_modes() {
            return Err(Error::invalid_config(
                "pi",
                format!(
                    "{} modes in the sequence spec vs {} mixture components",
                    self.mode_spec.num_modes(),
                    self.pre_change.num_modes()
                ),
            ));
        }
        if let PostChangeModel::Mixture(m) = &self.post_change {
            if m.transform() != self.pre_change.transform() {
                return Err(Error::invalid_config(
                    "post_change",
                    "mixture transform must match pre_change",
                ));
            }
        }
        Ok(())
    }

    /// Null-stream copy of this scenario (`gamma = ∞`).
    pub fn null_stream(&self, length: usize) -> Scenario {
        Scenario {
            gamma: None,
            length,
            ..self.clone()
        }
    }

    /// Copy with a different change point and length.
    pub fn with_change(&self, gamma: u64, length: usize) -> Scenario {
        Scenario {
            gamma: Some(gamma),
            length,
            ..self.clone()
        }
    }
}

fn sample_post<R: Rng>(post: &PostChangeModel, rng: &mut R) -> f64 {
    match post {
        PostChangeModel::Component(c) => c.sample(rng),
        PostChangeModel::Mixture(m) => {
            let u: f64 = rng.random();
            let mut cum = 0.0;
            let mut idx = m.num_modes() - 1;
            for (i, w) in m.weights().iter().enumerate() {
                cum += w;
                if u < cum {
                    idx = i;
                    break;
                }
            }
            m.components()[idx].sample(rng)
        }
    }
}

/// Simulates one stream. Mode and error draws come from separate derived
/// sub-streams, so the error sequence never shifts with the regime's draw
/// count. Errors at `t < gamma` follow the active pre-change component, and
/// from `gamma` on they follow the post-change density.
pub fn simulate_stream(scenario: &Scenario, seed: u64) -> Result<(Vec<f64>, ModeSequence)> {
    scenario.validate()?;
    let modes = generate(
        &scenario.mode_spec,
        scenario.length,
        derive_seed(seed, 0, 0),
    )?;
    let mut err_rng = derive_rng(seed, 1, 0);
    let transform = scenario.pre_change.transform();
    let components = scenario.pre_change.components();
    let errors: Vec<f64> = modes
        .modes
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let t = (i + 1) as u64;
            let y = match scenario.gamma {
                Some(g) if t >= g => sample_post(&scenario.post_change, &mut err_rng),
                _ => components[m].sample(&mut err_rng),
            };
            transform.invert(y)
        })
        .collect();
    Ok((errors, modes))
}

/// Outcome of one detector trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub tau: Option<u64>,
    pub gamma: Option<u64>,
    /// `tau - gamma + 1` when the alarm lands at or after the change; for
    /// censored trials (no alarm by stream end) the remaining horizon,
    /// flagged via `censored`.
    pub delay: Option<u64>,
    pub false_alarm: bool,
    pub censored: bool,
    pub seed: u64,
}

/// Trial outcome plus the detector statistic just before the change, used
/// by the worst-history bucketing of the delay criterion.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub result: TrialResult,
    pub pre_change_stat: f64,
}

/// Runs a fresh detector over one simulated stream until its first alarm.
pub fn run_trial(
    detector: &mut dyn SequentialDetector,
    scenario: &Scenario,
    seed: u64,
) -> Result<TrialRecord> {
    let (errors, _) = simulate_stream(scenario, seed)?;
    let mut pre_change_stat = 0.0;
    let mut tau = None;
    for (i, &eps) in errors.iter().enumerate() {
        let t = (i + 1) as u64;
        if scenario.gamma == Some(t) {
            pre_change_stat = detector
                .snapshot()
                .0
                .into_iter()
                .fold(0.0f64, f64::max);
        }
        let out = detector.step(eps)?;
        if out.alarmed {
            tau = Some(out.t);
            break;
        }
    }
    let result = match (tau, scenario.gamma) {
        (Some(t), Some(g)) if t >= g => TrialResult {
            tau,
            gamma: scenario.gamma,
            delay: Some(t - g + 1),
            false_alarm: false,
            censored: false,
            seed,
        },
        (Some(_), _) => TrialResult {
            tau,
            gamma: scenario.gamma,
            delay: None,
            false_alarm: true,
            censored: false,
            seed,
        },
        (None, Some(g)) => TrialResult {
            tau: None,
            gamma: scenario.gamma,
            delay: Some(scenario.length as u64 - g + 1),
            false_alarm: false,
            censored: true,
            seed,
        },
        (None, None) => TrialResult {
            tau: None,
            gamma: None,
            delay: None,
            false_alarm: false,
            censored: false,
            seed,
        },
    };
    Ok(TrialRecord {
        result,
        pre_change_stat,
    })
}

/// False-alarm statistics from long null streams.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FarMtfa {
    /// Alarms per step under the null: `1 / mtfa`, or 0 when nothing fired.
    pub far: f64,
    /// Mean inter-alarm time; `None` when no alarm fired within budget.
    pub mtfa: Option<f64>,
    pub alarms: u64,
    pub steps: u64,
    /// Budget was extended because fewer than the required alarms appeared.
    pub widened: bool,
    /// No alarms at all: `far` is only an upper bound.
    pub upper_bound_only: bool,
}

/// Steps per independent null chunk when estimating FAR/MTFA.
const FAR_CHUNK_STEPS: usize = 20_000;
/// Minimum alarm count before the estimate is accepted without widening.
const FAR_MIN_ALARMS: u64 = 30;
/// Budget growth cap: widen at most this many times (doubling each time).
const FAR_MAX_WIDENINGS: u32 = 3;

/// Estimates FAR and MTFA over null streams with renewal restarts: after
/// each alarm the detector state resets (the stream keeps going), and the
/// mean completed inter-alarm segment length is the MTFA. Widens the budget
/// (doubling, capped) until at least 30 alarms are seen.
pub fn estimate_far_mtfa<F>(
    factory: F,
    scenario: &Scenario,
    total_steps: u64,
    master_seed: u64,
    domain: u64,
) -> Result<FarMtfa>
where
    F: Fn() -> Box<dyn SequentialDetector> + Sync,
{
    let null = scenario.null_stream(FAR_CHUNK_STEPS);
    null.validate()?;
    let mut n_chunks = (total_steps as usize).div_ceil(FAR_CHUNK_STEPS).max(1);
    let mut first_chunk = 0usize;
    let mut segments_total = 0u64;
    let mut alarms = 0u64;
    let mut steps = 0u64;
    let mut widened = false;

    for round in 0..=FAR_MAX_WIDENINGS {
        let chunk_results: Vec<Result<(u64, u64, u64)>> = (first_chunk..first_chunk + n_chunks)
            .into_par_iter()
            .map(|chunk| {
                let seed = derive_seed(master_seed, domain, chunk as u64);
                let (errors, _) = simulate_stream(&null, seed)?;
                let mut detector = factory();
                let mut seg_sum = 0u64;
                let mut seg_count = 0u64;
                for &eps in &errors {
                    let out = detector.step(eps)?;
                    if out.alarmed {
                        seg_sum += out.t;
                        seg_count += 1;
                        detector.reset();
                    }
                }
                Ok((seg_sum, seg_count, errors.len() as u64))
            })
            .collect();
        for r in chunk_results {
            let (seg_sum, seg_count, chunk_steps) = r?;
            segments_total += seg_sum;
            alarms += seg_count;
            steps += chunk_steps;
        }
        if alarms >= FAR_MIN_ALARMS {
            break;
        }
        if round == FAR_MAX_WIDENINGS {
            break;
        }
        first_chunk += n_chunks;
        n_chunks *= 2;
        widened = true;
    }

    if alarms == 0 {
        return Ok(FarMtfa {
            far: 0.0,
            mtfa: None,
            alarms,
            steps,
            widened,
            upper_bound_only: true,
        });
    }
    let mtfa = segments_total as f64 / alarms as f64;
    Ok(FarMtfa {
        far: 1.0 / mtfa,
        mtfa: Some(mtfa),
        alarms,
        steps,
        widened,
        upper_bound_only: false,
    })
}

/// Conditional detection-delay estimate at a fixed change point.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DelayEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub detected: u64,
    pub false_alarms: u64,
    pub censored: u64,
    pub censored_frac: f64,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `trials` seeded trials and averages `tau - gamma + 1` over those
/// detecting at or after the change; censored trials contribute the
/// remaining horizon and are counted. Trials that false-alarm before the
/// change carry no post-change observation and are excluded from the mean.
pub fn estimate_delay<F>(
    factory: F,
    scenario: &Scenario,
    trials: usize,
    master_seed: u64,
    domain: u64,
) -> Result<DelayEstimate>
where
    F: Fn() -> Box<dyn SequentialDetector> + Sync,
{
    scenario.validate()?;
    if scenario.gamma.is_none() {
        return Err(Error::invalid_input(
            "delay estimation needs a finite change point",
        ));
    }
    let records = run_trials(&factory, scenario, trials, master_seed, domain, 0)?;
    Ok(summarize_delays(&records))
}

fn run_trials<F>(
    factory: &F,
    scenario: &Scenario,
    trials: usize,
    master_seed: u64,
    domain: u64,
    substream_base: u64,
) -> Result<Vec<TrialRecord>>
where
    F: Fn() -> Box<dyn SequentialDetector> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(master_seed, domain, substream_base + i as u64);
            let mut detector = factory();
            run_trial(detector.as_mut(), scenario, seed)
        })
        .collect()
}

fn summarize_delays(records: &[TrialRecord]) -> DelayEstimate {
    let delays: Vec<f64> = records
        .iter()
        .filter_map(|r| r.result.delay.map(|d| d as f64))
        .collect();
    let false_alarms = records.iter().filter(|r| r.result.false_alarm).count() as u64;
    let censored = records.iter().filter(|r| r.result.censored).count() as u64;
    let detected = delays.len() as u64 - censored;
    let (mean, stderr) = mean_and_stderr(&delays);
    DelayEstimate {
        mean,
        stderr,
        trials: records.len() as u64,
        detected,
        false_alarms,
        censored,
        censored_frac: if delays.is_empty() {
            0.0
        } else {
            censored as f64 / delays.len() as f64
        },
    }
}

/// Worst-case average detection delay estimate.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WaddEstimate {
    pub wadd: f64,
    pub stderr: f64,
    pub censored_frac: f64,
    pub per_gamma: Vec<GammaDelay>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GammaDelay {
    pub gamma: u64,
    pub mean_delay: f64,
    pub worst_bucket_mean: f64,
    pub worst_bucket_stderr: f64,
    pub included_trials: u64,
}

/// Number of pre-change-history buckets for the worst-case approximation.
const WADD_BUCKETS: usize = 4;

/// Approximates the worst-case average delay: for each change point in
/// `gammas`, trials are bucketed by the quantile of their pre-change
/// terminal statistic and the worst bucket's mean delay is kept; the
/// supremum over change points is the estimate.
pub fn estimate_wadd<F>(
    factory: F,
    scenario: &Scenario,
    gammas: &[u64],
    trials_per_gamma: usize,
    master_seed: u64,
    domain: u64,
) -> Result<WaddEstimate>
where
    F: Fn() -> Box<dyn SequentialDetector> + Sync,
{
    if gammas.is_empty() {
        return Err(Error::invalid_input("at least one change point required"));
    }
    if trials_per_gamma < 100 {
        return Err(Error::invalid_input(
            "at least 100 trials per change point required",
        ));
    }

    let mut per_gamma = Vec::with_capacity(gammas.len());
    let mut total_included = 0u64;
    let mut total_censored = 0u64;
    for (gi, &gamma) in gammas.iter().enumerate() {
        let scn = scenario.with_change(gamma, scenario.length);
        let records = run_trials(
            &factory,
            &scn,
            trials_per_gamma,
            master_seed,
            domain,
            (gi as u64) << 32,
        )?;

        let mut included: Vec<(f64, f64)> = records
            .iter()
            .filter_map(|r| r.result.delay.map(|d| (r.pre_change_stat, d as f64)))
            .collect();
        total_included += included.len() as u64;
        total_censored += records.iter().filter(|r| r.result.censored).count() as u64;
        if included.is_empty() {
            return Err(Error::invalid_input(format!(
                "no usable trials at gamma={gamma}: every trial alarmed early"
            )));
        }
        included.sort_by(|a, b| a.0.total_cmp(&b.0));

        let n = included.len();
        let buckets = WADD_BUCKETS.min(n);
        let mut worst = f64::NEG_INFINITY;
        let mut worst_stderr = f64::NAN;
        for b in 0..buckets {
            let lo = b * n / buckets;
            let hi = ((b + 1) * n / buckets).max(lo + 1);
            let slice: Vec<f64> = included[lo..hi.min(n)].iter().map(|p| p.1).collect();
            let (mean, stderr) = mean_and_stderr(&slice);
            if mean > worst {
                worst = mean;
                worst_stderr = stderr;
            }
        }
        let (mean_all, _) = mean_and_stderr(&included.iter().map(|p| p.1).collect::<Vec<_>>());
        per_gamma.push(GammaDelay {
            gamma,
            mean_delay: mean_all,
            worst_bucket_mean: worst,
            worst_bucket_stderr: worst_stderr,
            included_trials: n as u64,
        });
    }

    let worst_gamma = per_gamma
        .iter()
        .max_by(|a, b| a.worst_bucket_mean.total_cmp(&b.worst_bucket_mean))
        .unwrap();
    Ok(WaddEstimate {
        wadd: worst_gamma.worst_bucket_mean,
        stderr: worst_gamma.worst_bucket_stderr,
        censored_frac: if total_included == 0 {
            0.0
        } else {
            total_censored as f64 / total_included as f64
        },
        per_gamma,
    })
}

/// Default change-point grid for the worst-case delay criterion.
pub fn default_wadd_gammas(length: usize) -> Vec<u64> {
    let l = length as u64;
    let mut gammas = vec![1, l / 4, l / 2, 3 * l / 4];
    gammas.retain(|&g| g >= 1 && g <= l);
    gammas.dedup();
    gammas
}
