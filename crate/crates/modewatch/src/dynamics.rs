//! Latent mode-sequence generators: the ground-truth hidden state driving
//! simulated error streams.
//!
//! Four regimes are supported: a static mode drawn once, fully independent
//! per-step draws, a Markov chain whose stationary law matches the mixture
//! weights, and an arbitrary deterministic switching schedule.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::validate_transition;
use crate::rng::rng_from_seed;

/// How the latent mode evolves over time.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeDynamics {
    /// One mode drawn at t=1 and held forever.
    Static,
    /// Independent draw from `pi` at every step.
    Iid,
    /// Markov chain with the given row-stochastic transition matrix.
    Markov { transition: Vec<Vec<f64>> },
    /// Deterministic toggling at the given strictly increasing switch times.
    /// Starts in mode 0 unless the first switch time is 1.
    Arbitrary { switch_times: Vec<u64> },
}

impl ModeDynamics {
    fn variant_name(&self) -> &'static str {
        match self {
            ModeDynamics::Static => "static",
            ModeDynamics::Iid => "iid",
            ModeDynamics::Markov { .. } => "markov",
            ModeDynamics::Arbitrary { .. } => "arbitrary",
        }
    }
}

/// Validated generative specification of a latent mode sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct ModeSequenceSpec {
    pi: Vec<f64>,
    dynamics: ModeDynamics,
}

/// Wire format: `{"variant": "markov", "pi": [...], "transition": [[...]]}`.
#[derive(Serialize, Deserialize)]
struct RawSpec {
    variant: String,
    pi: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    transition: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    switch_times: Option<Vec<u64>>,
}

impl TryFrom<RawSpec> for ModeSequenceSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        let dynamics = match raw.variant.as_str() {
            "static" => ModeDynamics::Static,
            "iid" => ModeDynamics::Iid,
            "markov" => ModeDynamics::Markov {
                transition: raw.transition.ok_or_else(|| {
                    Error::invalid_config("transition", "required for the markov variant")
                })?,
            },
            "arbitrary" => ModeDynamics::Arbitrary {
                switch_times: raw.switch_times.ok_or_else(|| {
                    Error::invalid_config("switch_times", "required for the arbitrary variant")
                })?,
            },
            other => {
                return Err(Error::invalid_config(
                    "variant",
                    format!("unknown variant `{other}`"),
                ))
            }
        };
        ModeSequenceSpec::new(raw.pi, dynamics)
    }
}

impl From<ModeSequenceSpec> for RawSpec {
    fn from(spec: ModeSequenceSpec) -> Self {
        let variant = spec.dynamics.variant_name().to_string();
        let (transition, switch_times) = match spec.dynamics {
            ModeDynamics::Markov { transition } => (Some(transition), None),
            ModeDynamics::Arbitrary { switch_times } => (None, Some(switch_times)),
            _ => (None, None),
        };
        RawSpec {
            variant,
            pi: spec.pi,
            transition,
            switch_times,
        }
    }
}

impl ModeSequenceSpec {
    pub fn new(pi: Vec<f64>, dynamics: ModeDynamics) -> Result<Self> {
        if pi.is_empty() {
            return Err(Error::invalid_model("pi must be nonempty"));
        }
        if pi.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid_model("pi entries must be finite and >= 0"));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid_model(format!(
                "pi sums to {sum}, expected 1 within 1e-12"
            )));
        }
        match &dynamics {
            ModeDynamics::Static | ModeDynamics::Iid => {}
            ModeDynamics::Markov { transition } => {
                validate_transition(transition, pi.len())?;
                // pi must be invariant under the chain; this admits absorbing
                // chains pinned to pi as well as ergodic ones.
                for (j, &target) in pi.iter().enumerate() {
                    let balance: f64 = pi
                        .iter()
                        .zip(transition)
                        .map(|(p, row)| p * row[j])
                        .sum();
                    if (balance - target).abs() > 1e-6 {
                        return Err(Error::invalid_model(format!(
                            "pi is not stationary for the transition matrix: \
                             (pi P)[{j}] = {balance}, pi[{j}] = {target} (tol 1e-6)"
                        )));
                    }
                }
            }
            ModeDynamics::Arbitrary { switch_times } => {
                if pi.len() != 2 {
                    return Err(Error::invalid_model(
                        "the arbitrary regime toggles between exactly two modes",
                    ));
                }
                if switch_times.first().is_some_and(|&t| t < 1) {
                    return Err(Error::invalid_model("switch times must be >= 1"));
                }
                if switch_times.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid_model(
                        "switch times must be strictly increasing",
                    ));
                }
            }
        }
        Ok(Self { pi, dynamics })
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn dynamics(&self) -> &ModeDynamics {
        &self.dynamics
    }

    pub fn num_modes(&self) -> usize {
        self.pi.len()
    }
}

/// A realized latent mode path together with the spec and seed that made it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSequence {
    pub modes: Vec<usize>,
    pub spec: ModeSequenceSpec,
    pub seed: u64,
}

fn sample_categorical(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (i, p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    probs.len() - 1
}

/// Realizes a mode sequence of the given length. Deterministic per seed; the
/// arbitrary regime consumes no randomness at all.
pub fn generate(spec: &ModeSequenceSpec, length: usize, seed: u64) -> Result<ModeSequence> {
    if length == 0 {
        return Err(Error::invalid_input("length must be >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let modes = match spec.dynamics() {
        ModeDynamics::Static => {
            let m = sample_categorical(&mut rng, spec.pi());
            vec![m; length]
        }
        ModeDynamics::Iid => (0..length)
            .map(|_| sample_categorical(&mut rng, spec.pi()))
            .collect(),
        ModeDynamics::Markov { transition } => {
            let mut modes = Vec::with_capacity(length);
            let mut current = sample_categorical(&mut rng, spec.pi());
            modes.push(current);
            for _ in 1..length {
                current = sample_categorical(&mut rng, &transition[current]);
                modes.push(current);
            }
            modes
        }
        ModeDynamics::Arbitrary { switch_times } => {
            // Mode at time t is the parity of switches that have occurred by t;
            // a first switch at t=1 therefore starts the process in mode 1.
            let mut modes = Vec::with_capacity(length);
            let mut next_switch = 0usize;
            let mut current = 0usize;
            for t in 1..=length as u64 {
                while next_switch < switch_times.len() && switch_times[next_switch] <= t {
                    current ^= 1;
                    next_switch += 1;
                }
                modes.push(current);
            }
            modes
        }
    };
    Ok(ModeSequence {
        modes,
        spec: spec.clone(),
        seed,
    })
}

/// Checks the long-run frequency of every mode against `pi` within `tol`.
pub fn validate_long_run(seq: &ModeSequence, tol: f64) -> bool {
    let n = seq.modes.len() as f64;
    if seq.modes.is_empty() {
        return false;
    }
    let mut counts = vec![0usize; seq.spec.num_modes()];
    for &m in &seq.modes {
        counts[m] += 1;
    }
    counts
        .iter()
        .zip(seq.spec.pi())
        .all(|(&c, &p)| (c as f64 / n - p).abs() <= tol)
}

/// Unique stationary distribution of a primitive (irreducible, aperiodic)
/// row-stochastic matrix, found by solving the balance equations.
pub fn stationary_distribution(transition: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = transition.len();
    validate_transition(transition, k)?;
    if !is_primitive(transition) {
        return Err(Error::NoUniqueStationary(
            "transition matrix is reducible or periodic".to_string(),
        ));
    }

    // Solve v (P - I) = 0 with Σ v = 1: transpose to (Pᵀ - I) vᵀ = 0 and
    // replace the last equation by the normalization row.
    let mut a = vec![vec![0.0f64; k]; k];
    let mut b = vec![0.0f64; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = transition[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for entry in a[k - 1].iter_mut() {
        *entry = 1.0;
    }
    b[k - 1] = 1.0;

    // Gaussian elimination with partial pivoting.
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-14 {
            return Err(Error::NoUniqueStationary(
                "balance equations are singular".to_string(),
            ));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..k {
            let factor = a[row][col] / a[col][col];
            let (pivot_rows, tail) = a.split_at_mut(row);
            let pivot_row = &pivot_rows[col];
            for (entry, &pivot) in tail[0][col..].iter_mut().zip(&pivot_row[col..]) {
                *entry -= factor * pivot;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut v = vec![0.0f64; k];
    for row in (0..k).rev() {
        let mut acc = b[row];
        for j in (row + 1)..k {
            acc -= a[row][j] * v[j];
        }
        v[row] = acc / a[row][row];
    }

    for x in &mut v {
        if *x < 0.0 && *x > -1e-12 {
            *x = 0.0;
        }
    }
    let total: f64 = v.iter().sum();
    for x in &mut v {
        *x /= total;
    }

    for (j, &target) in v.iter().enumerate() {
        let balance: f64 = v.iter().zip(transition).map(|(p, row)| p * row[j]).sum();
        if (balance - target).abs() > 1e-10 {
            return Err(Error::Internal(format!(
                "stationary solve residual {} at column {j}",
                (balance - target).abs()
            )));
        }
    }
    Ok(v)
}

/// Primitivity via Wielandt's bound: P^((k-1)^2 + 1) strictly positive.
fn is_primitive(transition: &[Vec<f64>]) -> bool {
    let k = transition.len();
    let exponent = (k - 1) * (k - 1) + 1;
    let mut power = transition.to_vec();
    for _ in 1..exponent {
        power = mat_mul(&power, transition);
    }
    power.iter().all(|row| row.iter().all(|&p| p > 0.0))
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = a.len();
    let mut out = vec![vec![0.0f64; k]; k];
    for i in 0..k {
        for j in 0..k {
            out[i][j] = (0..k).map(|l| a[i][l] * b[l][j]).sum();
        }
    }
    out
}
