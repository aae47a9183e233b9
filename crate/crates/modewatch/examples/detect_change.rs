//! Run the mode-aware CUSUM and the global baseline over one stream with
//! an injected change, and inspect the alarm times.
//!
//! Run with: cargo run --example detect_change

use modewatch::detector::{
    DetectorConfig, GlobalCusum, ModeAwareCusum, PostChangeModel, SequentialDetector,
};
use modewatch::dynamics::{ModeDynamics, ModeSequenceSpec};
use modewatch::harness::{simulate_stream, Scenario};
use modewatch::mixture::{GaussianComponent, MixtureModel, Transform};

fn main() -> modewatch::Result<()> {
    let pre = MixtureModel::new(
        Transform::Log,
        vec![0.44, 0.56],
        vec![
            GaussianComponent::new(0.0, 0.5)?,
            GaussianComponent::new(1.0, 0.5)?,
        ],
    )?;
    let post = PostChangeModel::Component(GaussianComponent::new(1.25, 0.75)?);
    let scenario = Scenario {
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
        gamma: Some(250),
        length: 500,
    };
    let (errors, _) = simulate_stream(&scenario, 11)?;

    // Per-mode config: SPRT design point alpha = beta = 0.05, drift scales
    // r0 > r1, ten-step variance windows, moderate threshold smoothing.
    // The threshold scale squeezes the operating point to a desk-size
    // false-alarm rate.
    let config = DetectorConfig::new(
        pre.clone(),
        post.clone(),
        vec![94.22204733332609, 376.88818933330435],
        vec![0.5, 0.25],
        vec![0.05, 0.05],
        vec![0.05, 0.05],
        10,
        0.4,
    )?
    .with_threshold_scale(0.006)?;

    let mut mode_aware = ModeAwareCusum::new(config);
    let mut global = GlobalCusum::new(pre, post, 11.0)?;

    for &eps in &errors {
        if mode_aware.alarmed_at().is_none() {
            mode_aware.step(eps)?;
        }
        if global.alarmed_at().is_none() {
            global.step(eps)?;
        }
        if mode_aware.alarmed_at().is_some() && global.alarmed_at().is_some() {
            break;
        }
    }

    println!("change injected at t=250");
    match mode_aware.alarmed_at() {
        Some(tau) => println!("mode-aware alarm at t={tau} (delay {})", tau - 250 + 1),
        None => println!("mode-aware: no alarm"),
    }
    match global.alarmed_at() {
        Some(tau) => println!("global alarm at t={tau} (delay {})", tau - 250 + 1),
        None => println!("global: no alarm"),
    }
    Ok(())
}
