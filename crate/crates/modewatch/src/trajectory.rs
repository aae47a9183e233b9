//! Displacement metrics turning predicted/ground-truth trajectories into
//! scalar prediction-error streams.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar trajectory over a prediction horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    points: Vec<(f64, f64)>,
}

impl Trajectory {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid_input("trajectory must be nonempty"));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid_input("trajectory coordinates must be finite"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn horizon(&self) -> usize {
        self.points.len()
    }
}

/// Which displacement metric feeds the error stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Ade,
    Fde,
    Rmse,
}

/// Per-step error record; all three metrics are populated for reporting,
/// regardless of which one drives detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub t: u64,
    pub ade: f64,
    pub fde: f64,
    pub rmse: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_mode: Option<usize>,
}

impl ErrorRecord {
    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Ade => self.ade,
            Metric::Fde => self.fde,
            Metric::Rmse => self.rmse,
        }
    }
}

fn check_pair(pred: &Trajectory, truth: &Trajectory) -> Result<()> {
    if pred.horizon() != truth.horizon() {
        return Err(Error::invalid_input(format!(
            "horizon mismatch: {} predicted vs {} ground-truth points",
            pred.horizon(),
            truth.horizon()
        )));
    }
    Ok(())
}

fn step_distances(pred: &Trajectory, truth: &Trajectory) -> Vec<f64> {
    pred.points()
        .iter()
        .zip(truth.points())
        .map(|((px, py), (tx, ty))| ((px - tx).powi(2) + (py - ty).powi(2)).sqrt())
        .collect()
}

/// Average displacement error: mean ℓ2 distance across the horizon.
pub fn ade(pred: &Trajectory, truth: &Trajectory) -> Result<f64> {
    check_pair(pred, truth)?;
    let distances = step_distances(pred, truth);
    Ok(distances.iter().sum::<f64>() / distances.len() as f64)
}

/// Final displacement error: ℓ2 distance at the last horizon step.
pub fn fde(pred: &Trajectory, truth: &Trajectory) -> Result<f64> {
    check_pair(pred, truth)?;
    let (px, py) = *pred.points().last().unwrap();
    let (tx, ty) = *truth.points().last().unwrap();
    Ok(((px - tx).powi(2) + (py - ty).powi(2)).sqrt())
}

/// Root mean squared error: sqrt of the mean squared ℓ2 deviation.
pub fn rmse(pred: &Trajectory, truth: &Trajectory) -> Result<f64> {
    check_pair(pred, truth)?;
    let sq: f64 = pred
        .points()
        .iter()
        .zip(truth.points())
        .map(|((px, py), (tx, ty))| (px - tx).powi(2) + (py - ty).powi(2))
        .sum();
    Ok((sq / pred.horizon() as f64).sqrt())
}

/// Builds the error stream the detectors consume: one record per pair,
/// 1-based time indices in input order.
pub fn error_stream(pairs: &[(Trajectory, Trajectory)]) -> Result<Vec<ErrorRecord>> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, (pred, truth))| {
            let build = || -> Result<ErrorRecord> {
                Ok(ErrorRecord {
                    t: (i + 1) as u64,
                    ade: ade(pred, truth)?,
                    fde: fde(pred, truth)?,
                    rmse: rmse(pred, truth)?,
                    true_mode: None,
                })
            };
            build().map_err(|e| Error::invalid_input(format!("pair {i}: {e}")))
        })
        .collect()
}
