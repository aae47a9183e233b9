//! Independent reference implementations used only to check the production
//! detectors. Everything here is written directly from the detector's
//! mathematical definition with its own helpers, not by calling into the
//! library's computation paths.

/// ln(2π), local to keep the oracle self-contained.
const LN_2PI: f64 = 1.8378770664093453;

pub fn normal_log_pdf(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    -0.5 * z * z - std.ln() - 0.5 * LN_2PI
}

/// Scan identity for a reflected CUSUM: after t steps with increments
/// `z_1..z_t`, the statistic equals `max(0, max_{j<=t} sum_{i=j..t} z_i)`,
/// evaluated by an exhaustive double loop.
pub fn scan_cusum(increments: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for j in 0..increments.len() {
        let tail: f64 = increments[j..].iter().sum();
        if tail > best {
            best = tail;
        }
    }
    best
}

/// Inputs of the reference mode-aware detector; one Gaussian per mode in
/// the evaluation domain plus a single-Gaussian post-change density.
pub struct Alg1Inputs {
    pub weights: [f64; 2],
    pub pre_mean: [f64; 2],
    pub pre_std: [f64; 2],
    pub post_mean: f64,
    pub post_std: f64,
    pub b: [f64; 2],
    pub r: [f64; 2],
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub window: usize,
    pub lambda: f64,
    /// Observations already mapped into the evaluation domain.
    pub observations: Vec<f64>,
}

/// One step of reference state.
#[derive(Debug, Clone, Copy)]
pub struct Alg1Step {
    pub mode: usize,
    pub w: [f64; 2],
    pub theta: [f64; 2],
    pub alarmed: bool,
}

/// Reference recursion for the adaptive per-mode CUSUM, transcribed step by
/// step: MAP mode estimate, log-likelihood ratio against the active
/// component, windowed std with the freshest sample included (component std
/// until a mode has two samples), drift d = r·σ̂ floored at 1e-6, threshold
/// h = (2/d²)·ln((1-β)/α) smoothed by λ, reflected CUSUM update with k =
/// d/2 on the active mode only, and an alarm when W ≥ θ. Stops at the
/// first alarm.
pub fn alg1_reference(inputs: &Alg1Inputs) -> Vec<Alg1Step> {
    let mut w = [0.0f64; 2];
    let mut theta = [inputs.b[0], inputs.b[1]];
    let mut buffers: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut steps = Vec::with_capacity(inputs.observations.len());

    for &y in &inputs.observations {
        // Step 1: mode estimation (MAP on the current error, low index wins ties).
        let score0 = inputs.weights[0].ln() + normal_log_pdf(y, inputs.pre_mean[0], inputs.pre_std[0]);
        let score1 = inputs.weights[1].ln() + normal_log_pdf(y, inputs.pre_mean[1], inputs.pre_std[1]);
        let m = if score1 > score0 { 1 } else { 0 };

        // Step 2: log-likelihood ratio.
        let llr = normal_log_pdf(y, inputs.post_mean, inputs.post_std)
            - normal_log_pdf(y, inputs.pre_mean[m], inputs.pre_std[m]);

        // Step 3: windowed variance and adaptive step-down threshold.
        if buffers[m].len() == inputs.window {
            buffers[m].remove(0);
        }
        buffers[m].push(y);
        let sigma = if buffers[m].len() >= 2 {
            let n = buffers[m].len() as f64;
            let mean = buffers[m].iter().sum::<f64>() / n;
            let ss: f64 = buffers[m].iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        } else {
            inputs.pre_std[m]
        };
        let d = (inputs.r[m] * sigma).max(1e-6);
        let k = d / 2.0;
        let h = (2.0 / (d * d)) * ((1.0 - inputs.beta[m]) / inputs.alpha[m]).ln();
        theta[m] = inputs.lambda * h + (1.0 - inputs.lambda) * theta[m];

        // Step 4: CUSUM update for the active mode.
        w[m] = (w[m] + (llr - k)).max(0.0);

        // Step 5: detection.
        let alarmed = w[m] >= theta[m];
        steps.push(Alg1Step {
            mode: m,
            w,
            theta,
            alarmed,
        });
        if alarmed {
            break;
        }
    }
    steps
}

/// O(P*N) pair-counting AUROC with half credit for ties.
pub fn pair_count_auroc(scores: &[(f64, bool)]) -> f64 {
    let pos: Vec<f64> = scores.iter().filter(|(_, l)| *l).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = scores.iter().filter(|(_, l)| !*l).map(|(s, _)| *s).collect();
    let mut total = 0.0;
    for &sp in &pos {
        for &sn in &neg {
            total += if sp > sn {
                1.0
            } else if sp == sn {
                0.5
            } else {
                0.0
            };
        }
    }
    total / (pos.len() as f64 * neg.len() as f64)
}
