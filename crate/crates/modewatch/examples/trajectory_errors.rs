//! Turn predicted/ground-truth trajectories into displacement-error
//! records with ADE, FDE, and RMSE.
//!
//! Run with: cargo run --example trajectory_errors

use modewatch::trajectory::{ade, error_stream, fde, rmse, Trajectory};

fn main() -> modewatch::Result<()> {
    let truth = Trajectory::new(vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)])?;
    // Prediction drifts sideways over the horizon.
    let pred = Trajectory::new(vec![(0.0, 0.1), (1.0, 0.4), (2.0, 0.9), (3.0, 1.6)])?;

    println!("ade  = {:.4}", ade(&pred, &truth)?);
    println!("fde  = {:.4}", fde(&pred, &truth)?);
    println!("rmse = {:.4}", rmse(&pred, &truth)?);

    // RMSE never falls below ADE (quadratic vs arithmetic mean).
    assert!(rmse(&pred, &truth)? >= ade(&pred, &truth)?);

    // A stream of per-step records for the detectors: one record per
    // prediction, indexed in input order.
    let pairs = vec![
        (pred.clone(), truth.clone()),
        (truth.clone(), truth.clone()),
        (pred, truth),
    ];
    let records = error_stream(&pairs)?;
    for r in &records {
        println!("t={}  ade={:.4}  fde={:.4}  rmse={:.4}", r.t, r.ade, r.fde, r.rmse);
    }
    assert_eq!(records[1].ade, 0.0);
    Ok(())
}
