//! Trace the delay-versus-false-alarm trade-off for both detectors over a
//! grid of threshold scales, after calibrating each to a common target
//! false-alarm rate.
//!
//! Run with: cargo run --example delay_far_tradeoff

use modewatch::detector::{
    DetectorConfig, GlobalCusum, ModeAwareCusum, PostChangeModel, SequentialDetector,
};
use modewatch::dynamics::{ModeDynamics, ModeSequenceSpec};
use modewatch::harness::sweep::{calibrate_threshold_scale, sweep_delay_vs_far};
use modewatch::harness::Scenario;
use modewatch::mixture::{GaussianComponent, MixtureModel, Transform};
use modewatch::Result;

fn main() -> Result<()> {
    let pre = MixtureModel::new(
        Transform::Log,
        vec![0.44, 0.56],
        vec![
            GaussianComponent::new(0.0, 0.5)?,
            GaussianComponent::new(1.0, 0.5)?,
        ],
    )?;
    let post = PostChangeModel::Component(GaussianComponent::new(1.25, 0.75)?);
    let null = Scenario {
        mode_spec: ModeSequenceSpec::new(
            vec![0.44, 0.56],
            ModeDynamics::Markov {
                transition: vec![
                    vec![0.9681818181818181, 0.03181818181818182],
                    vec![0.025, 0.975],
                ],
            },
        )?,
        pre_change: pre.clone(),
        post_change: post.clone(),
        gamma: None,
        length: 400,
    };
    let change = null.with_change(100, 400);

    let config = DetectorConfig::new(
        pre.clone(),
        post.clone(),
        vec![94.22204733332609, 376.88818933330435],
        vec![0.5, 0.25],
        vec![0.05, 0.05],
        vec![0.05, 0.05],
        10,
        0.4,
    )?;
    let ma_at = move |s: f64| -> Result<Box<dyn SequentialDetector>> {
        Ok(Box::new(ModeAwareCusum::new(config.with_threshold_scale(s)?)))
    };
    let pre2 = pre.clone();
    let post2 = post.clone();
    let g_at = move |s: f64| -> Result<Box<dyn SequentialDetector>> {
        Ok(Box::new(GlobalCusum::new(pre2.clone(), post2.clone(), 10.0 * s)?))
    };

    let target_far = 0.002;
    let cal_ma = calibrate_threshold_scale(&ma_at, &null, target_far, 300_000, 7, 0)?;
    let cal_g = calibrate_threshold_scale(&g_at, &null, target_far, 300_000, 7, 0)?;
    println!(
        "calibrated to far {target_far}: mode-aware scale {:.4}, global threshold {:.2}",
        cal_ma.scale,
        10.0 * cal_g.scale
    );

    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    let print_curve = |name: &str, points: &[modewatch::harness::sweep::SweepPoint]| {
        println!("\n{name} (loosest threshold first):");
        println!("  far        mean delay   censored");
        for p in points {
            println!(
                "  {:<9.5}  {:>7.2}      {:.3}",
                p.far, p.mean_delay, p.censored_frac
            );
        }
    };
    let ma_scales: Vec<f64> = grid.iter().map(|s| s * cal_ma.scale).collect();
    let ma_points = sweep_delay_vs_far(&ma_at, &null, &change, &ma_scales, 150, 60_000, 7, 1)?;
    print_curve("mode-aware", &ma_points);
    let g_scales: Vec<f64> = grid.iter().map(|s| s * cal_g.scale).collect();
    let g_points = sweep_delay_vs_far(&g_at, &null, &change, &g_scales, 150, 60_000, 7, 1)?;
    print_curve("global", &g_points);
    Ok(())
}
