//! Run the bundled Markovian benchmark end to end through the library API
//! (the CLI wraps the same entry point) with trimmed Monte Carlo budgets.
//!
//! Run with: cargo run --example run_benchmark

use modewatch::harness::benchmark::{run_benchmark, BenchmarkConfig};
use modewatch::io::sha256_hex;

fn main() -> modewatch::Result<()> {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/configs/markov-default.json"
    );
    let bytes = std::fs::read(path).expect("bundled config exists");
    let digest = sha256_hex(&bytes);
    let mut config: BenchmarkConfig =
        serde_json::from_slice(&bytes).expect("bundled config parses");

    // Trim budgets so the example finishes in a few seconds.
    config.evaluation.trials = 100;
    config.evaluation.horizon = 40_000;
    config.evaluation.calibration_steps = 200_000;
    config.evaluation.roc_streams = 8;

    let report = run_benchmark(&config, &digest)?;
    println!(
        "mode-aware: far {:.5}, mean delay {:.2}, auroc {:.4}",
        report.mode_aware.far,
        report.mode_aware.mean_delay.unwrap(),
        report.mode_aware.auroc.unwrap()
    );
    println!(
        "global:     far {:.5}, mean delay {:.2}, auroc {:.4}",
        report.global.far,
        report.global.mean_delay.unwrap(),
        report.global.auroc.unwrap()
    );
    let comparison = report.comparison.as_ref().unwrap();
    println!(
        "delay reduction {:.1}% at far ratio {:.3}",
        comparison.delay_reduction_pct, comparison.far_ratio
    );
    println!(
        "baselines: lgmm auroc {:.4}, nll auroc {:.4}",
        report.lgmm.as_ref().unwrap().auroc,
        report.nll.as_ref().unwrap().auroc
    );
    println!("sweep points per detector: {}", report.mode_aware.sweep.len());
    Ok(())
}
