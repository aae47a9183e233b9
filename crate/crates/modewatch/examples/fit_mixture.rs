//! Fit a two-mode Gaussian mixture to synthetic prediction errors with
//! seeded EM, then round-trip the model through its JSON form.
//!
//! Run with: cargo run --example fit_mixture

use modewatch::mixture::{fit_em, GaussianComponent, MixtureModel, Transform};
use modewatch::rng::rng_from_seed;
use rand::Rng;

fn main() -> modewatch::Result<()> {
    // Plant a 60/40 mixture of N(1.0, 0.5) and N(4.0, 1.0).
    let low = GaussianComponent::new(1.0, 0.5)?;
    let high = GaussianComponent::new(4.0, 1.0)?;
    let mut rng = rng_from_seed(42);
    let samples: Vec<f64> = (0..20_000)
        .map(|_| {
            if rng.random::<f64>() < 0.6 {
                low.sample(&mut rng)
            } else {
                high.sample(&mut rng)
            }
        })
        .collect();

    let (model, report) = fit_em(&samples, 2, Transform::Identity, 7, 1e-8, 500)?;
    println!(
        "converged: {} after {} iterations (log-likelihood {:.2})",
        report.converged, report.iterations, report.final_log_likelihood
    );
    for (weight, comp) in model.weights().iter().zip(model.components()) {
        println!("  weight {weight:.3}  mean {:.3}  std {:.3}", comp.mean(), comp.std());
    }

    // Components come back sorted by mean: index 0 is the low-error mode.
    assert!(model.components()[0].mean() < model.components()[1].mean());

    // The JSON form round-trips the exact parameter values.
    let json = serde_json::to_string_pretty(&model).expect("model serializes");
    let restored: MixtureModel = serde_json::from_str(&json).expect("model parses");
    assert_eq!(model, restored);
    println!("\nserialized model:\n{json}");
    Ok(())
}
