//! Generate latent mode sequences under all four dynamics regimes and
//! simulate the error streams they drive.
//!
//! Run with: cargo run --example generate_streams

use modewatch::detector::PostChangeModel;
use modewatch::dynamics::{generate, validate_long_run, ModeDynamics, ModeSequenceSpec};
use modewatch::harness::{simulate_stream, Scenario};
use modewatch::mixture::{GaussianComponent, MixtureModel, Transform};

fn main() -> modewatch::Result<()> {
    let pi = vec![0.44, 0.56];

    // A static sequence holds one draw forever, so the mixture weights only
    // show up across realizations.
    let static_spec = ModeSequenceSpec::new(pi.clone(), ModeDynamics::Static)?;
    let mode_zero_draws = (0..1000)
        .filter(|&seed| generate(&static_spec, 1, seed).unwrap().modes[0] == 0)
        .count();
    println!(
        "   static: mode-0 drawn in {:.3} of 1000 realizations (pi0 = 0.44)",
        mode_zero_draws as f64 / 1000.0
    );

    // The other regimes mix within a single long realization. The arbitrary
    // schedule repeats a 50-step pattern: 22 steps in mode 0, 28 in mode 1.
    let mut switch_times = Vec::new();
    let mut t = 23u64;
    while t < 100_000 {
        switch_times.push(t);
        switch_times.push(t + 28);
        t += 50;
    }
    let regimes = vec![
        ("iid", ModeDynamics::Iid),
        (
            "markov",
            ModeDynamics::Markov {
                transition: vec![
                    vec![0.9681818181818181, 0.03181818181818182],
                    vec![0.025, 0.975],
                ],
            },
        ),
        ("arbitrary", ModeDynamics::Arbitrary { switch_times }),
    ];
    for (name, dynamics) in regimes {
        let spec = ModeSequenceSpec::new(pi.clone(), dynamics)?;
        let seq = generate(&spec, 100_000, 42)?;
        let freq0 = seq.modes.iter().filter(|&&m| m == 0).count() as f64 / 1e5;
        println!(
            "{name:>9}: mode-0 frequency {freq0:.4}, long-run check at 2% tol: {}",
            validate_long_run(&seq, 0.02)
        );
        assert!(validate_long_run(&seq, 0.02));
    }

    // Drive an error stream from the Markov regime: log-normal errors in
    // distribution before the change point, a wider density after it.
    let pre = MixtureModel::new(
        Transform::Log,
        pi.clone(),
        vec![
            GaussianComponent::new(0.0, 0.5)?,
            GaussianComponent::new(1.0, 0.5)?,
        ],
    )?;
    let scenario = Scenario {
        mode_spec: ModeSequenceSpec::new(
            pi,
            ModeDynamics::Markov {
                transition: vec![
                    vec![0.9681818181818181, 0.03181818181818182],
                    vec![0.025, 0.975],
                ],
            },
        )?,
        pre_change: pre,
        post_change: PostChangeModel::Component(GaussianComponent::new(1.25, 0.75)?),
        gamma: Some(150),
        length: 200,
    };
    let (errors, modes) = simulate_stream(&scenario, 7)?;
    println!("\nfirst ten steps of the simulated stream:");
    for (t, (mode, error)) in modes.modes.iter().zip(&errors).take(10).enumerate() {
        println!("  t={:>2}  mode={mode}  error={error:.4}", t + 1);
    }
    Ok(())
}
