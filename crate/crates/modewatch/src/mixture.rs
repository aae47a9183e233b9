//! Two-mode (generalizable to K-mode) Gaussian mixture over prediction errors:
//! density evaluation, EM fitting, and latent-mode estimation.
//!
//! The mixture lives in an evaluation domain selected by [`Transform`]:
//! `Identity` evaluates densities on raw errors, `Log` on `ln x` with the
//! `1/x` Jacobian folded into every density. Components are always kept
//! sorted by ascending mean, so index 0 is the low-error mode.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub(crate) const LN_2PI: f64 = 1.8378770664093453;

/// Default relative log-likelihood tolerance for EM convergence.
pub const EM_DEFAULT_TOL: f64 = 1e-8;
/// Default EM iteration cap.
pub const EM_DEFAULT_MAX_ITER: usize = 500;
/// Component std floor, as a fraction of the overall sample std.
pub const VARIANCE_FLOOR_RATIO: f64 = 1e-6;

/// Domain in which densities are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    Identity,
    /// Evaluate on `ln x`; observations must be strictly positive.
    #[default]
    Log,
}

impl Transform {
    /// Maps an observation into the evaluation domain.
    pub fn apply(self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain(format!("observation {x} is not finite")));
        }
        match self {
            Transform::Identity => Ok(x),
            Transform::Log => {
                if x <= 0.0 {
                    Err(Error::domain(format!(
                        "observation {x} must be > 0 under the log transform"
                    )))
                } else {
                    Ok(x.ln())
                }
            }
        }
    }

    /// Log-Jacobian of the mapping at `x` (`d transform / dx`, logged).
    fn log_jacobian(self, x: f64) -> f64 {
        match self {
            Transform::Identity => 0.0,
            Transform::Log => -x.ln(),
        }
    }

    /// Maps a value from the evaluation domain back to observation space.
    pub fn invert(self, y: f64) -> f64 {
        match self {
            Transform::Identity => y,
            Transform::Log => y.exp(),
        }
    }
}

/// One Gaussian component, parameterized in the evaluation domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawComponent")]
pub struct GaussianComponent {
    mean: f64,
    std: f64,
}

#[derive(Deserialize)]
struct RawComponent {
    mean: f64,
    std: f64,
}

impl TryFrom<RawComponent> for GaussianComponent {
    type Error = Error;
    fn try_from(raw: RawComponent) -> Result<Self> {
        GaussianComponent::new(raw.mean, raw.std)
    }
}

impl GaussianComponent {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::invalid_model(format!("mean {mean} is not finite")));
        }
        if !std.is_finite() || std <= 0.0 {
            return Err(Error::invalid_model(format!(
                "std {std} must be finite and > 0"
            )));
        }
        Ok(Self { mean, std })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    /// Log-density of N(mean, std²) at `y` (evaluation domain, no Jacobian).
    pub fn log_pdf(&self, y: f64) -> f64 {
        let z = (y - self.mean) / self.std;
        -0.5 * z * z - self.std.ln() - 0.5 * LN_2PI
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.log_pdf(y).exp()
    }

    /// Draws from N(mean, std²) in the evaluation domain.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        use rand_distr::Distribution;
        rand_distr::Normal::new(self.mean, self.std)
            .expect("component invariants guarantee a valid normal")
            .sample(rng)
    }
}

/// Numerically stable `ln Σ exp(v)`.
pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// In-distribution error density `f = Σ_m π_m f_m` with per-mode Gaussian
/// components sorted by ascending mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixtureModel")]
pub struct MixtureModel {
    transform: Transform,
    weights: Vec<f64>,
    components: Vec<GaussianComponent>,
}

#[derive(Deserialize)]
struct RawMixtureModel {
    #[serde(default)]
    transform: Transform,
    weights: Vec<f64>,
    components: Vec<GaussianComponent>,
}

impl TryFrom<RawMixtureModel> for MixtureModel {
    type Error = Error;
    fn try_from(raw: RawMixtureModel) -> Result<Self> {
        MixtureModel::new(raw.transform, raw.weights, raw.components)
    }
}

impl MixtureModel {
    /// Builds a model, validating the simplex constraint and re-sorting
    /// components (with their weights) by ascending mean.
    pub fn new(
        transform: Transform,
        weights: Vec<f64>,
        components: Vec<GaussianComponent>,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::invalid_model(format!(
                "{} weights vs {} components; need equal non-zero lengths",
                weights.len(),
                components.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid_model("weights must be finite and >= 0"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid_model(format!(
                "weights sum to {sum}, expected 1 within 1e-12"
            )));
        }
        let mut paired: Vec<(f64, GaussianComponent)> =
            weights.into_iter().zip(components).collect();
        paired.sort_by(|a, b| a.1.mean.total_cmp(&b.1.mean));
        let (weights, components) = paired.into_iter().unzip();
        Ok(Self {
            transform,
            weights,
            components,
        })
    }

    /// Single-component convenience constructor.
    pub fn single(transform: Transform, component: GaussianComponent) -> Self {
        Self {
            transform,
            weights: vec![1.0],
            components: vec![component],
        }
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn num_modes(&self) -> usize {
        self.components.len()
    }

    fn check_mode(&self, m: usize) -> Result<()> {
        if m >= self.components.len() {
            Err(Error::invalid_input(format!(
                "mode index {m} out of range for {} components",
                self.components.len()
            )))
        } else {
            Ok(())
        }
    }

    /// Mixture log-density at observation `x`, Jacobian included.
    pub fn log_density(&self, x: f64) -> Result<f64> {
        let y = self.transform.apply(x)?;
        let terms: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w.ln() + c.log_pdf(y))
            .collect();
        Ok(log_sum_exp(&terms) + self.transform.log_jacobian(x))
    }

    /// Mixture density `f(x) = Σ_m π_m f_m(x)`.
    pub fn density(&self, x: f64) -> Result<f64> {
        Ok(self.log_density(x)?.exp())
    }

    /// Log of the unweighted component density `f_m(x)`, Jacobian included.
    pub fn mode_log_density(&self, m: usize, x: f64) -> Result<f64> {
        self.check_mode(m)?;
        let y = self.transform.apply(x)?;
        Ok(self.components[m].log_pdf(y) + self.transform.log_jacobian(x))
    }

    /// Component density `f_m(x)` without its weight.
    pub fn mode_density(&self, m: usize, x: f64) -> Result<f64> {
        Ok(self.mode_log_density(m, x)?.exp())
    }

    /// MAP estimate of the latent mode for one observation:
    /// `argmax_m π_m f_m(x)`, ties broken toward the lower index.
    pub fn map_mode(&self, x: f64) -> Result<usize> {
        let y = self.transform.apply(x)?;
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for (m, (w, c)) in self.weights.iter().zip(&self.components).enumerate() {
            let score = w.ln() + c.log_pdf(y);
            if score > best_score {
                best = m;
                best_score = score;
            }
        }
        Ok(best)
    }

    /// Mean of the mixture in the evaluation domain.
    pub fn mixture_mean(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w * c.mean)
            .sum()
    }

    /// Std of the mixture in the evaluation domain.
    pub fn mixture_std(&self) -> f64 {
        let mean = self.mixture_mean();
        let second: f64 = self
            .weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w * (c.std * c.std + c.mean * c.mean))
            .sum();
        (second - mean * mean).max(0.0).sqrt()
    }

    /// Single Gaussian matching the mixture's first two moments. Used by the
    /// plain negative-log-likelihood scoring baseline.
    pub fn moment_matched_component(&self) -> Result<GaussianComponent> {
        GaussianComponent::new(self.mixture_mean(), self.mixture_std())
    }
}

/// Summary of one EM fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub iterations: usize,
    pub final_log_likelihood: f64,
    pub converged: bool,
}

/// Fits a K-component mixture by EM with k-means++ seeding.
///
/// Deterministic given `seed`. Convergence is declared when the relative
/// log-likelihood improvement drops below `tol` before `max_iter`.
pub fn fit_em(
    samples: &[f64],
    k: usize,
    transform: Transform,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<(MixtureModel, FitReport)> {
    if k == 0 {
        return Err(Error::invalid_input("k must be >= 1"));
    }
    if samples.len() < 10 * k {
        return Err(Error::InsufficientData(format!(
            "{} samples for k={k}; need at least {}",
            samples.len(),
            10 * k
        )));
    }
    let ys: Vec<f64> = samples
        .iter()
        .map(|&x| transform.apply(x))
        .collect::<Result<_>>()?;
    let n = ys.len();
    let nf = n as f64;

    let global_mean = ys.iter().sum::<f64>() / nf;
    let global_std = (ys.iter().map(|y| (y - global_mean).powi(2)).sum::<f64>() / nf).sqrt();
    if global_std <= 0.0 {
        return Err(Error::DegenerateFit(
            "samples carry zero variance".to_string(),
        ));
    }
    let floor = VARIANCE_FLOOR_RATIO * global_std;

    let centers = kmeanspp_centers(&ys, k, seed)?;
    let (mut weights, mut means, mut stds) = initial_parameters(&ys, &centers, global_std, floor);

    let jacobian_shift: f64 = match transform {
        Transform::Identity => 0.0,
        Transform::Log => -ys.iter().sum::<f64>(),
    };

    let mut responsibilities = vec![0.0f64; n * k];
    let mut log_likelihood = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0usize;

    for iter in 1..=max_iter {
        iterations = iter;

        // E step in log space.
        let mut ll = 0.0f64;
        let mut terms = vec![0.0f64; k];
        for (i, &y) in ys.iter().enumerate() {
            for j in 0..k {
                let z = (y - means[j]) / stds[j];
                terms[j] = weights[j].ln() - 0.5 * z * z - stds[j].ln() - 0.5 * LN_2PI;
            }
            let lse = log_sum_exp(&terms);
            ll += lse;
            for j in 0..k {
                responsibilities[i * k + j] = (terms[j] - lse).exp();
            }
        }

        // EM must never decrease the likelihood; tolerate only FP noise.
        if log_likelihood.is_finite() && ll < log_likelihood - 1e-7 * (1.0 + ll.abs()) {
            return Err(Error::Internal(format!(
                "EM log-likelihood decreased from {log_likelihood} to {ll} at iteration {iter}"
            )));
        }
        let improvement = (ll - log_likelihood).abs() / ll.abs().max(1.0);
        log_likelihood = ll;
        if iter > 1 && improvement < tol {
            converged = true;
            break;
        }

        // M step.
        for j in 0..k {
            let total: f64 = (0..n).map(|i| responsibilities[i * k + j]).sum();
            if total <= 0.0 {
                return Err(Error::DegenerateFit(format!(
                    "component {j} lost all responsibility mass"
                )));
            }
            let mean: f64 = (0..n)
                .map(|i| responsibilities[i * k + j] * ys[i])
                .sum::<f64>()
                / total;
            let var: f64 = (0..n)
                .map(|i| responsibilities[i * k + j] * (ys[i] - mean).powi(2))
                .sum::<f64>()
                / total;
            let std = var.sqrt();
            if std < floor {
                return Err(Error::DegenerateFit(format!(
                    "component {j} std {std} fell below the floor {floor}"
                )));
            }
            weights[j] = total / nf;
            means[j] = mean;
            stds[j] = std;
        }
    }

    let weight_sum: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / weight_sum).collect();
    let components: Vec<GaussianComponent> = means
        .iter()
        .zip(&stds)
        .map(|(&m, &s)| GaussianComponent::new(m, s))
        .collect::<Result<_>>()?;
    let model = MixtureModel::new(transform, weights, components)?;
    let report = FitReport {
        iterations,
        final_log_likelihood: log_likelihood + jacobian_shift,
        converged,
    };
    Ok((model, report))
}

/// k-means++ seeding over the transformed samples.
fn kmeanspp_centers(ys: &[f64], k: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    let mut centers = Vec::with_capacity(k);
    centers.push(ys[rng.random_range(0..ys.len())]);
    let mut dist2: Vec<f64> = ys.iter().map(|y| (y - centers[0]).powi(2)).collect();
    while centers.len() < k {
        let total: f64 = dist2.iter().sum();
        if total <= 0.0 {
            return Err(Error::DegenerateFit(format!(
                "fewer than {k} distinct sample values"
            )));
        }
        let mut target = rng.random::<f64>() * total;
        let mut chosen = ys.len() - 1;
        for (i, d) in dist2.iter().enumerate() {
            target -= d;
            if target <= 0.0 {
                chosen = i;
                break;
            }
        }
        let center = ys[chosen];
        centers.push(center);
        for (i, y) in ys.iter().enumerate() {
            dist2[i] = dist2[i].min((y - center).powi(2));
        }
    }
    Ok(centers)
}

/// Hard-assignment initialization from the seeded centers.
fn initial_parameters(
    ys: &[f64],
    centers: &[f64],
    global_std: f64,
    floor: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let k = centers.len();
    let mut counts = vec![0usize; k];
    let mut sums = vec![0.0f64; k];
    let mut sq_sums = vec![0.0f64; k];
    for &y in ys {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (j, c) in centers.iter().enumerate() {
            let d = (y - c).powi(2);
            if d < best_d {
                best = j;
                best_d = d;
            }
        }
        counts[best] += 1;
        sums[best] += y;
        sq_sums[best] += y * y;
    }
    let n = ys.len() as f64;
    let mut weights = Vec::with_capacity(k);
    let mut means = Vec::with_capacity(k);
    let mut stds = Vec::with_capacity(k);
    for j in 0..k {
        if counts[j] == 0 {
            weights.push(1.0 / n);
            means.push(centers[j]);
            stds.push(global_std);
            continue;
        }
        let c = counts[j] as f64;
        let mean = sums[j] / c;
        let var = (sq_sums[j] / c - mean * mean).max(0.0);
        let std = var.sqrt();
        weights.push(c / n);
        means.push(mean);
        stds.push(if std > floor { std } else { global_std });
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    (weights, means, stds)
}

/// Most probable latent mode path under an HMM whose initial distribution is
/// the mixture weights and whose emissions are the mixture components.
///
/// `transition` must be row-stochastic with one row per mode. Ties prefer the
/// lower state index.
pub fn viterbi_modes(
    model: &MixtureModel,
    transition: &[Vec<f64>],
    observations: &[f64],
) -> Result<Vec<usize>> {
    let k = model.num_modes();
    if observations.is_empty() {
        return Err(Error::invalid_input("observations must be nonempty"));
    }
    validate_transition(transition, k)?;

    let emission = |m: usize, x: f64| -> Result<f64> { model.mode_log_density(m, x) };

    let n = observations.len();
    let mut delta = vec![f64::NEG_INFINITY; k];
    let mut backptr = vec![vec![0usize; k]; n];
    for (m, slot) in delta.iter_mut().enumerate() {
        *slot = model.weights()[m].ln() + emission(m, observations[0])?;
    }
    for (t, &x) in observations.iter().enumerate().skip(1) {
        let mut next = vec![f64::NEG_INFINITY; k];
        for s in 0..k {
            let mut best_prev = 0usize;
            let mut best_val = f64::NEG_INFINITY;
            for (prev, &d) in delta.iter().enumerate() {
                let val = d + transition[prev][s].ln();
                if val > best_val {
                    best_prev = prev;
                    best_val = val;
                }
            }
            backptr[t][s] = best_prev;
            next[s] = best_val + emission(s, x)?;
        }
        delta = next;
    }

    let mut path = vec![0usize; n];
    let mut best_final = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    for (s, &d) in delta.iter().enumerate() {
        if d > best_val {
            best_final = s;
            best_val = d;
        }
    }
    path[n - 1] = best_final;
    for t in (0..n - 1).rev() {
        path[t] = backptr[t + 1][path[t + 1]];
    }
    Ok(path)
}

pub(crate) fn validate_transition(transition: &[Vec<f64>], k: usize) -> Result<()> {
    if transition.len() != k {
        return Err(Error::NonStochasticMatrix(format!(
            "{} rows for {k} modes",
            transition.len()
        )));
    }
    for (i, row) in transition.iter().enumerate() {
        if row.len() != k {
            return Err(Error::NonStochasticMatrix(format!(
                "row {i} has {} entries, expected {k}",
                row.len()
            )));
        }
        if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::NonStochasticMatrix(format!(
                "row {i} has negative or non-finite entries"
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NonStochasticMatrix(format!(
                "row {i} sums to {sum}, expected 1 within 1e-9"
            )));
        }
    }
    Ok(())
}
