//! Estimate the latent error mode per observation: MAP on the current
//! error, and Viterbi smoothing when the transition matrix is known.
//!
//! Run with: cargo run --example estimate_modes

use modewatch::detector::PostChangeModel;
use modewatch::dynamics::{ModeDynamics, ModeSequenceSpec};
use modewatch::harness::{simulate_stream, Scenario};
use modewatch::mixture::{viterbi_modes, GaussianComponent, MixtureModel, Transform};

fn main() -> modewatch::Result<()> {
    let transition = vec![vec![0.9, 0.1], vec![0.1, 0.9]];
    let pre = MixtureModel::new(
        Transform::Identity,
        vec![0.5, 0.5],
        vec![
            GaussianComponent::new(0.0, 1.0)?,
            GaussianComponent::new(3.0, 1.0)?,
        ],
    )?;
    let scenario = Scenario {
        mode_spec: ModeSequenceSpec::new(
            vec![0.5, 0.5],
            ModeDynamics::Markov {
                transition: transition.clone(),
            },
        )?,
        pre_change: pre.clone(),
        post_change: PostChangeModel::Component(GaussianComponent::new(6.0, 1.0)?),
        gamma: None,
        length: 2_000,
    };
    let (errors, truth) = simulate_stream(&scenario, 3)?;

    // Blind per-step MAP vs Viterbi with the true transition matrix.
    let map_path: Vec<usize> = errors
        .iter()
        .map(|&e| pre.map_mode(e))
        .collect::<modewatch::Result<_>>()?;
    let viterbi_path = viterbi_modes(&pre, &transition, &errors)?;

    let accuracy = |path: &[usize]| {
        path.iter()
            .zip(&truth.modes)
            .filter(|(a, b)| a == b)
            .count() as f64
            / path.len() as f64
    };
    println!("MAP accuracy:     {:.3}", accuracy(&map_path));
    println!("Viterbi accuracy: {:.3}", accuracy(&viterbi_path));
    // Smoothing with the true dynamics should not do worse than
    // observation-only MAP on a persistent chain.
    assert!(accuracy(&viterbi_path) >= accuracy(&map_path));
    Ok(())
}
