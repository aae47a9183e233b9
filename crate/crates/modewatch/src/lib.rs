//! Mode-aware quickest change detection for streaming prediction-error
//! signals.
//!
//! In-distribution prediction error is modeled as a two-mode Gaussian
//! mixture whose latent mode evolves over time. The mode-aware CUSUM
//! detector tracks the mode online, runs one CUSUM statistic per mode, and
//! adapts per-mode alarm thresholds to a sliding-window variance estimate.
//! A seeded Monte Carlo harness benchmarks it against a global-threshold
//! CUSUM and per-step likelihood baselines on detection delay, false-alarm
//! rate, AUROC, and AUPR.
//!
//! Start with the runnable examples (`cargo run --example <name>`), which
//! walk through each capability: mixture fitting, mode-sequence generation,
//! stream simulation, detection, scoring, and benchmarking.

pub mod cli;
pub mod detector;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod io;
pub mod mixture;
pub mod rng;
pub mod trajectory;

pub use error::{Error, Result};
