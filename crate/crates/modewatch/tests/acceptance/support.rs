//! Shared fixtures and small statistics helpers for the acceptance suite.

use modewatch::detector::{DetectorConfig, GlobalCusum, ModeAwareCusum, SequentialDetector};
use modewatch::harness::benchmark::BenchmarkConfig;
use modewatch::harness::Scenario;
use modewatch::Result;

pub fn bundled_config(name: &str) -> BenchmarkConfig {
    let path = format!("{}/configs/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let bytes = std::fs::read(&path).unwrap_or_else(|e| panic!("read {path}: {e}"));
    serde_json::from_slice(&bytes).unwrap_or_else(|e| panic!("parse {path}: {e}"))
}

pub fn scenario_of(config: &BenchmarkConfig) -> Scenario {
    config.scenario.to_scenario().expect("bundled scenario is valid")
}

pub fn ma_config_of(config: &BenchmarkConfig) -> DetectorConfig {
    config
        .detector
        .to_config(
            config.scenario.pre_change.clone(),
            config.scenario.post_change.clone(),
        )
        .expect("bundled detector settings are valid")
}

pub struct Arms {
    pub ma: DetectorConfig,
    pub global_base: f64,
    pub scenario: Scenario,
}

impl Arms {
    pub fn from_config(config: &BenchmarkConfig) -> Self {
        Arms {
            ma: ma_config_of(config),
            global_base: config.detector.global_threshold.expect("bundled threshold"),
            scenario: scenario_of(config),
        }
    }

    pub fn ma_at(&self, scale: f64) -> Result<Box<dyn SequentialDetector>> {
        Ok(Box::new(ModeAwareCusum::new(
            self.ma.with_threshold_scale(scale)?,
        )))
    }

    pub fn global_at(&self, scale: f64) -> Result<Box<dyn SequentialDetector>> {
        Ok(Box::new(GlobalCusum::new(
            self.scenario.pre_change.clone(),
            self.scenario.post_change.clone(),
            self.global_base * scale,
        )?))
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn sample_std(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// One-sided 95% Student-t quantile by degrees of freedom.
pub fn t_quantile_95(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        6.314, 2.920, 2.353, 2.132, 2.015, 1.943, 1.895, 1.860, 1.833, 1.812, 1.796, 1.782,
        1.771, 1.761, 1.753, 1.746, 1.740, 1.734, 1.729, 1.725, 1.721, 1.717, 1.714, 1.711,
        1.708, 1.706, 1.703, 1.701, 1.699, 1.697,
    ];
    if df == 0 {
        f64::INFINITY
    } else if df <= TABLE.len() {
        TABLE[df - 1]
    } else {
        1.645
    }
}

/// Lower bound of the one-sided 95% confidence interval for the mean of
/// paired differences.
pub fn lower_confidence_bound(diffs: &[f64]) -> f64 {
    let m = mean(diffs);
    let se = sample_std(diffs) / (diffs.len() as f64).sqrt();
    m - t_quantile_95(diffs.len() - 1) * se
}

pub fn pass(criterion: u32, description: &str) {
    println!("ACCEPTANCE {criterion:02}: PASS — {description}");
}
