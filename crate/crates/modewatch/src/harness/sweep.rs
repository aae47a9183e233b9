//! Threshold calibration and the delay-versus-false-alarm trade-off sweep.

use serde::{Deserialize, Serialize};

use crate::detector::SequentialDetector;
use crate::error::{Error, Result};
use crate::harness::{estimate_delay, estimate_far_mtfa, FarMtfa, Scenario};
use crate::rng::derive_seed;

/// Result of calibrating a detector's threshold scale to a target FAR.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationOutcome {
    pub scale: f64,
    pub achieved: FarMtfa,
}

const CALIBRATION_MAX_BRACKET: i32 = 20;
const CALIBRATION_BISECTIONS: usize = 24;
const CALIBRATION_REL_TOL: f64 = 0.02;

/// Finds the threshold scale at which the detector's null false-alarm rate
/// meets `target_far`, by bisection on the log-scale. Every evaluation
/// replays the same derived null streams, so the search is deterministic.
pub fn calibrate_threshold_scale<F>(
    factory_at: &F,
    scenario: &Scenario,
    target_far: f64,
    steps_per_eval: u64,
    master_seed: u64,
    domain: u64,
) -> Result<CalibrationOutcome>
where
    F: Fn(f64) -> Result<Box<dyn SequentialDetector>> + Sync,
{
    if !(target_far.is_finite() && target_far > 0.0 && target_far < 1.0) {
        return Err(Error::invalid_config(
            "target_far",
            "must lie strictly between 0 and 1",
        ));
    }
    let eval = |scale: f64| -> Result<FarMtfa> {
        estimate_far_mtfa(
            || factory_at(scale).expect("scale already validated"),
            scenario,
            steps_per_eval,
            master_seed,
            domain,
        )
    };
    // Probe the factory once so configuration errors surface eagerly.
    factory_at(1.0)?;

    // Bracket the target: FAR is non-increasing in the scale.
    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    let start = eval(1.0)?;
    if start.far > target_far {
        let mut expanded = false;
        for _ in 0..CALIBRATION_MAX_BRACKET {
            hi *= 2.0;
            if eval(hi)?.far <= target_far {
                expanded = true;
                break;
            }
        }
        if !expanded {
            return Err(Error::invalid_input(format!(
                "cannot push FAR down to {target_far}: still above target at scale {hi}"
            )));
        }
    } else {
        let mut expanded = false;
        for _ in 0..CALIBRATION_MAX_BRACKET {
            lo *= 0.5;
            if eval(lo)?.far > target_far {
                expanded = true;
                break;
            }
        }
        if !expanded {
            return Err(Error::invalid_input(format!(
                "cannot raise FAR up to {target_far}: no alarms even at scale {lo}"
            )));
        }
    }

    let mut best_scale = hi;
    let mut best = eval(hi)?;
    for _ in 0..CALIBRATION_BISECTIONS {
        let mid = (lo.ln() / 2.0 + hi.ln() / 2.0).exp();
        let at_mid = eval(mid)?;
        if at_mid.far > 0.0
            && (at_mid.far / target_far - 1.0).abs()
                < (best.far / target_far - 1.0).abs().min(f64::INFINITY)
        {
            best_scale = mid;
            best = at_mid.clone();
        }
        if at_mid.far > 0.0 && (at_mid.far / target_far - 1.0).abs() <= CALIBRATION_REL_TOL {
            break;
        }
        if at_mid.far > target_far {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CalibrationOutcome {
        scale: best_scale,
        achieved: best,
    })
}

/// One point on the delay-versus-FAR curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold_scale: f64,
    pub far: f64,
    pub mtfa: Option<f64>,
    pub far_upper_bound_only: bool,
    pub mean_delay: f64,
    pub delay_stderr: f64,
    pub censored_frac: f64,
    pub trials: u64,
}

/// Sweeps a grid of threshold scales, estimating FAR on shared null streams
/// and conditional delay on shared change streams at every point. Points
/// come back sorted by FAR descending (loosest threshold first).
#[allow(clippy::too_many_arguments)]
pub fn sweep_delay_vs_far<F>(
    factory_at: &F,
    null_scenario: &Scenario,
    change_scenario: &Scenario,
    scales: &[f64],
    trials: usize,
    null_steps: u64,
    master_seed: u64,
    domain: u64,
) -> Result<Vec<SweepPoint>>
where
    F: Fn(f64) -> Result<Box<dyn SequentialDetector>> + Sync,
{
    if scales.len() < 5 {
        return Err(Error::invalid_input(
            "threshold grid needs at least 5 scales",
        ));
    }
    if scales
        .windows(2)
        .any(|w| w[0] >= w[1] || !w[0].is_finite())
        || scales.iter().any(|&s| s <= 0.0 || !s.is_finite())
    {
        return Err(Error::invalid_input(
            "threshold grid must be strictly increasing and positive",
        ));
    }

    // All scales replay the same null and change streams; only the
    // thresholds move, so the curve is a clean monotone construction.
    let far_domain = derive_seed(domain, 0, 0);
    let delay_domain = derive_seed(domain, 1, 0);
    let mut points = Vec::with_capacity(scales.len());
    for &scale in scales {
        let far = estimate_far_mtfa(
            || factory_at(scale).expect("validated scale"),
            null_scenario,
            null_steps,
            master_seed,
            far_domain,
        )?;
        let delay = estimate_delay(
            || factory_at(scale).expect("validated scale"),
            change_scenario,
            trials,
            master_seed,
            delay_domain,
        )?;
        points.push(SweepPoint {
            threshold_scale: scale,
            far: far.far,
            mtfa: far.mtfa,
            far_upper_bound_only: far.upper_bound_only,
            mean_delay: delay.mean,
            delay_stderr: delay.stderr,
            censored_frac: delay.censored_frac,
            trials: delay.trials,
        });
    }
    points.sort_by(|a, b| b.far.total_cmp(&a.far));
    Ok(points)
}
