//! Sequential change detectors over prediction-error streams.
//!
//! Two CUSUM variants share one step interface: a classical global detector
//! driven by the full mixture density with a fixed threshold, and the
//! mode-aware detector that estimates the latent error mode each step, runs
//! one CUSUM statistic per mode, and adapts per-mode thresholds to the
//! windowed error variance. Per-step scoring baselines (mixture negative
//! log-likelihood and single-Gaussian negative log-likelihood) live here too.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{log_sum_exp, GaussianComponent, MixtureModel};

/// Lower clamp for the adaptive drift scale `d`, guarding the `2/d²`
/// threshold term when a variance window is (nearly) constant. A huge
/// threshold in that degenerate case suppresses alarms rather than firing.
pub const D_FLOOR: f64 = 1e-6;

/// Post-change error density `g`. Interpreted in the pre-change model's
/// evaluation domain; a mixture must share the pre-change transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PostChangeModel {
    #[serde(rename = "component")]
    Component(GaussianComponent),
    #[serde(rename = "mixture")]
    Mixture(MixtureModel),
}

impl PostChangeModel {
    /// Log-density in the (shared) evaluation domain, Jacobian omitted:
    /// likelihood ratios against the pre-change model cancel it exactly.
    pub fn log_pdf_transformed(&self, y: f64) -> f64 {
        match self {
            PostChangeModel::Component(c) => c.log_pdf(y),
            PostChangeModel::Mixture(m) => {
                let terms: Vec<f64> = m
                    .weights()
                    .iter()
                    .zip(m.components())
                    .map(|(w, c)| w.ln() + c.log_pdf(y))
                    .collect();
                log_sum_exp(&terms)
            }
        }
    }
}

/// Tuning parameters and reference densities for the mode-aware detector.
///
/// Per-mode vectors are indexed like the pre-change components (index 0 is
/// the low-error mode). `b` seeds the thresholds, `r` scales the windowed
/// error std into the drift `d = r·σ̂`, `(alpha, beta)` set the SPRT base
/// term `ln((1-β)/α)`, `window` bounds the per-mode variance buffers, and
/// `lambda` is the exponential smoothing weight of the threshold update.
#[derive(Debug, Clone)]
pub struct DetectorConfig {
    pre_change: MixtureModel,
    post_change: PostChangeModel,
    b: Vec<f64>,
    r: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    window: usize,
    lambda: f64,
}

impl DetectorConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        pre_change: MixtureModel,
        post_change: PostChangeModel,
        b: Vec<f64>,
        r: Vec<f64>,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        window: usize,
        lambda: f64,
    ) -> Result<Self> {
        let k = pre_change.num_modes();
        for (name, v) in [("b", &b), ("r", &r), ("alpha", &alpha), ("beta", &beta)] {
            if v.len() != k {
                return Err(Error::invalid_config(
                    name,
                    format!("{} entries for {k} modes", v.len()),
                ));
            }
        }
        for (m, &x) in b.iter().enumerate() {
            if !x.is_finite() || x <= 0.0 {
                return Err(Error::invalid_config(format!("b{m}"), "must be > 0"));
            }
        }
        for (m, &x) in r.iter().enumerate() {
            if !x.is_finite() || x <= 0.0 {
                return Err(Error::invalid_config(format!("r{m}"), "must be > 0"));
            }
        }
        for (m, (&a, &bt)) in alpha.iter().zip(&beta).enumerate() {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::invalid_config(
                    format!("alpha{m}"),
                    "must lie in (0,1)",
                ));
            }
            if !(bt > 0.0 && bt < 1.0) {
                return Err(Error::invalid_config(
                    format!("beta{m}"),
                    "must lie in (0,1)",
                ));
            }
            if (1.0 - bt) / a <= 1.0 {
                return Err(Error::invalid_config(
                    format!("alpha{m}"),
                    format!("(1-beta)/alpha = {} must exceed 1", (1.0 - bt) / a),
                ));
            }
        }
        if window < 2 {
            return Err(Error::invalid_config("window", "must be >= 2"));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::invalid_config("lambda", "must lie in (0,1]"));
        }
        if let PostChangeModel::Mixture(m) = &post_change {
            if m.transform() != pre_change.transform() {
                return Err(Error::invalid_config(
                    "post_change",
                    "mixture transform must match pre_change",
                ));
            }
        }
        Ok(Self {
            pre_change,
            post_change,
            b,
            r,
            alpha,
            beta,
            window,
            lambda,
        })
    }

    /// Non-fatal advisories; a scale sequence that grows with the mode index
    /// trades away the conservative low-mode thresholding.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.r.windows(2).any(|w| w[0] < w[1]) {
            out.push(format!(
                "r = {:?} is not non-increasing; r0 >= r1 keeps the low-error \
                 mode threshold conservative",
                self.r
            ));
        }
        out
    }

    /// Scales every threshold path by `s > 0` while leaving the drift
    /// untouched: `b` is multiplied by `s` and each `alpha` is remapped so
    /// that `ln((1-β)/α)` scales by exactly `s`. Alarm times are monotone
    /// non-decreasing in `s` on any fixed stream.
    pub fn with_threshold_scale(&self, s: f64) -> Result<Self> {
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::invalid_input(format!(
                "threshold scale {s} must be > 0"
            )));
        }
        let mut scaled = self.clone();
        for m in 0..self.b.len() {
            scaled.b[m] = self.b[m] * s;
            scaled.alpha[m] = (1.0 - self.beta[m]).powf(1.0 - s) * self.alpha[m].powf(s);
        }
        Self::new(
            scaled.pre_change,
            scaled.post_change,
            scaled.b,
            scaled.r,
            scaled.alpha,
            scaled.beta,
            scaled.window,
            scaled.lambda,
        )
    }

    pub fn pre_change(&self) -> &MixtureModel {
        &self.pre_change
    }

    pub fn post_change(&self) -> &PostChangeModel {
        &self.post_change
    }

    pub fn num_modes(&self) -> usize {
        self.pre_change.num_modes()
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// SPRT base term `ln((1-β_m)/α_m)`.
    pub fn sprt_term(&self, m: usize) -> f64 {
        ((1.0 - self.beta[m]) / self.alpha[m]).ln()
    }
}

/// Evolving state of the mode-aware detector.
#[derive(Debug, Clone)]
pub struct DetectorState {
    w: Vec<f64>,
    theta: Vec<f64>,
    buffers: Vec<VecDeque<f64>>,
    t: u64,
    alarm: Option<u64>,
}

impl DetectorState {
    fn new(config: &DetectorConfig) -> Self {
        let k = config.num_modes();
        Self {
            w: vec![0.0; k],
            theta: config.b.clone(),
            buffers: (0..k).map(|_| VecDeque::with_capacity(config.window)).collect(),
            t: 0,
            alarm: None,
        }
    }

    pub fn w(&self, m: usize) -> f64 {
        self.w[m]
    }

    pub fn theta(&self, m: usize) -> f64 {
        self.theta[m]
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn alarm(&self) -> Option<u64> {
        self.alarm
    }

    pub fn buffer(&self, m: usize) -> impl Iterator<Item = f64> + '_ {
        self.buffers[m].iter().copied()
    }
}

/// Per-step detector output. `alarmed` holds exactly when
/// `statistic >= threshold` for the estimated active mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub t: u64,
    pub estimated_mode: usize,
    pub llr: f64,
    /// Drift subtracted from the log-likelihood ratio (`k = d/2`); zero for
    /// the global detector.
    pub drift: f64,
    pub statistic: f64,
    pub threshold: f64,
    pub alarmed: bool,
}

/// Common stepping interface shared by both CUSUM detectors.
pub trait SequentialDetector {
    /// Advances one step; errors once an alarm has frozen the state.
    fn step(&mut self, epsilon: f64) -> Result<StepOutcome>;

    /// Advances one step without alarm latching, for per-step score traces.
    fn scoring_step(&mut self, epsilon: f64) -> Result<StepOutcome>;

    /// Returns to the initial state (renewal); the stream clock restarts.
    fn reset(&mut self);

    fn alarmed_at(&self) -> Option<u64>;

    /// Current per-mode statistics and thresholds, for trace export.
    fn snapshot(&self) -> (Vec<f64>, Vec<f64>);
}

/// Unbiased sample standard deviation; 0 for fewer than two values.
pub fn variance_estimate<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Mode-aware CUSUM: per-mode statistics with variance-adaptive,
/// exponentially smoothed thresholds.
///
/// Each step runs five stages: MAP estimation of the active mode from the
/// current error, the log-likelihood ratio `ℓ = ln g(ε)/f_m(ε)`, the
/// adaptive threshold update `θ ← λh + (1-λ)θ` with `h = (2/d²)·ln((1-β)/α)`
/// and `d = r·σ̂` over the mode's sliding window, the reflected CUSUM update
/// `W ← max(W + ℓ - d/2, 0)` for the active mode only, and the `W ≥ θ`
/// alarm comparison. The inactive modes carry over untouched.
#[derive(Debug, Clone)]
pub struct ModeAwareCusum {
    config: DetectorConfig,
    state: DetectorState,
}

impl ModeAwareCusum {
    pub fn new(config: DetectorConfig) -> Self {
        let state = DetectorState::new(&config);
        Self { config, state }
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn state(&self) -> &DetectorState {
        &self.state
    }

    fn advance(&mut self, epsilon: f64, latch: bool) -> Result<StepOutcome> {
        let cfg = &self.config;
        let y = cfg.pre_change.transform().apply(epsilon)?;

        // Step 1: MAP mode estimate from the current error.
        let mut mode = 0usize;
        let mut best = f64::NEG_INFINITY;
        for (m, (w, c)) in cfg
            .pre_change
            .weights()
            .iter()
            .zip(cfg.pre_change.components())
            .enumerate()
        {
            let score = w.ln() + c.log_pdf(y);
            if score > best {
                mode = m;
                best = score;
            }
        }

        // Step 2: log-likelihood ratio against the active component.
        // Jacobians cancel, so both sides are evaluated in the transformed
        // domain.
        let llr = cfg.post_change.log_pdf_transformed(y)
            - cfg.pre_change.components()[mode].log_pdf(y);

        // Step 3: windowed variance and adaptive threshold for the active
        // mode. The freshest error enters the window before estimating; a
        // mode seen fewer than twice falls back to its component std.
        let buffer = &mut self.state.buffers[mode];
        if buffer.len() == cfg.window {
            buffer.pop_front();
        }
        buffer.push_back(y);
        let sigma_hat = if buffer.len() >= 2 {
            variance_estimate(buffer.iter().copied())
        } else {
            cfg.pre_change.components()[mode].std()
        };
        let d = (cfg.r[mode] * sigma_hat).max(D_FLOOR);
        let k = d / 2.0;
        let h = (2.0 / (d * d)) * cfg.sprt_term(mode);
        let theta = cfg.lambda * h + (1.0 - cfg.lambda) * self.state.theta[mode];
        self.state.theta[mode] = theta;

        // Step 4: reflected CUSUM update for the active mode only.
        let w = (self.state.w[mode] + (llr - k)).max(0.0);
        self.state.w[mode] = w;

        // Step 5: detection.
        self.state.t += 1;
        let alarmed = w >= theta;
        if alarmed && latch && self.state.alarm.is_none() {
            self.state.alarm = Some(self.state.t);
        }
        Ok(StepOutcome {
            t: self.state.t,
            estimated_mode: mode,
            llr,
            drift: k,
            statistic: w,
            threshold: theta,
            alarmed,
        })
    }
}

impl SequentialDetector for ModeAwareCusum {
    fn step(&mut self, epsilon: f64) -> Result<StepOutcome> {
        if let Some(tau) = self.state.alarm {
            return Err(Error::StepAfterAlarm(tau));
        }
        self.advance(epsilon, true)
    }

    fn scoring_step(&mut self, epsilon: f64) -> Result<StepOutcome> {
        self.advance(epsilon, false)
    }

    fn reset(&mut self) {
        self.state = DetectorState::new(&self.config);
    }

    fn alarmed_at(&self) -> Option<u64> {
        self.state.alarm
    }

    fn snapshot(&self) -> (Vec<f64>, Vec<f64>) {
        (self.state.w.clone(), self.state.theta.clone())
    }
}

/// Classical CUSUM baseline: one statistic over the full mixture density
/// with a fixed threshold and no drift subtraction.
#[derive(Debug, Clone)]
pub struct GlobalCusum {
    pre_change: MixtureModel,
    post_change: PostChangeModel,
    threshold: f64,
    w: f64,
    t: u64,
    alarm: Option<u64>,
}

impl GlobalCusum {
    pub fn new(
        pre_change: MixtureModel,
        post_change: PostChangeModel,
        threshold: f64,
    ) -> Result<Self> {
        if !threshold.is_finite() || threshold <= 0.0 {
            return Err(Error::invalid_config("threshold", "must be > 0"));
        }
        if let PostChangeModel::Mixture(m) = &post_change {
            if m.transform() != pre_change.transform() {
                return Err(Error::invalid_config(
                    "post_change",
                    "mixture transform must match pre_change",
                ));
            }
        }
        Ok(Self {
            pre_change,
            post_change,
            threshold,
            w: 0.0,
            t: 0,
            alarm: None,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn statistic(&self) -> f64 {
        self.w
    }

    fn advance(&mut self, epsilon: f64, latch: bool) -> Result<StepOutcome> {
        let y = self.pre_change.transform().apply(epsilon)?;
        let terms: Vec<f64> = self
            .pre_change
            .weights()
            .iter()
            .zip(self.pre_change.components())
            .map(|(w, c)| w.ln() + c.log_pdf(y))
            .collect();
        let llr = self.post_change.log_pdf_transformed(y) - log_sum_exp(&terms);
        self.w = (self.w + llr).max(0.0);
        self.t += 1;
        let alarmed = self.w >= self.threshold;
        if alarmed && latch && self.alarm.is_none() {
            self.alarm = Some(self.t);
        }
        Ok(StepOutcome {
            t: self.t,
            estimated_mode: 0,
            llr,
            drift: 0.0,
            statistic: self.w,
            threshold: self.threshold,
            alarmed,
        })
    }
}

impl SequentialDetector for GlobalCusum {
    fn step(&mut self, epsilon: f64) -> Result<StepOutcome> {
        if let Some(tau) = self.alarm {
            return Err(Error::StepAfterAlarm(tau));
        }
        self.advance(epsilon, true)
    }

    fn scoring_step(&mut self, epsilon: f64) -> Result<StepOutcome> {
        self.advance(epsilon, false)
    }

    fn reset(&mut self) {
        self.w = 0.0;
        self.t = 0;
        self.alarm = None;
    }

    fn alarmed_at(&self) -> Option<u64> {
        self.alarm
    }

    fn snapshot(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![self.w], vec![self.threshold])
    }
}

/// Mixture negative log-likelihood score: higher means more out-of-distribution.
pub fn lgmm_score(model: &MixtureModel, epsilon: f64) -> Result<f64> {
    Ok(-model.log_density(epsilon)?)
}

/// Single-Gaussian negative log-likelihood score on raw errors.
pub fn nll_score(component: &GaussianComponent, epsilon: f64) -> Result<f64> {
    if !epsilon.is_finite() {
        return Err(Error::domain(format!("observation {epsilon} is not finite")));
    }
    Ok(-component.log_pdf(epsilon))
}
