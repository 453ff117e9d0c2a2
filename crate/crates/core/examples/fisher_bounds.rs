//! Fisher information and Cramér-Rao precision bounds.
//!
//! Computes F (photon counting), H (quantum Fisher information via the
//! generalized-Liouvillian eigenvalue), the empirical bias of the Bayesian
//! mean estimator, and the resulting biased CRB/QCRB RMSE bounds on a small
//! detuning grid. Writes fisher_bounds.csv.
//!
//! cargo run --release -p photonest --example fisher_bounds

use photonest::bayes::EstimatorKind;
use photonest::fisher::{empirical_bias, FisherReport};
use photonest::validate::{run_validation, HarnessConfig, ValidationGrid};

fn main() -> photonest::Result<()> {
    let deltas: Vec<f64> = (1..=8).map(|k| 0.25 * k as f64).collect();
    let grid = ValidationGrid::one_d_custom(&deltas, 1.0, 400);
    let cfg = HarnessConfig { seed: 12, ..Default::default() };
    let outcomes = run_validation(&grid, &[EstimatorKind::BayesMean], None, &cfg)?;

    let estimates: Vec<Vec<f64>> = outcomes[0]
        .estimates
        .iter()
        .map(|recs| recs.iter().map(|e| e[0]).collect())
        .collect();
    let curve = empirical_bias(&deltas, &estimates)?;
    let report = FisherReport::build(1.0, 48, &curve, 1e-3, 1e-3, 1)?;

    println!("delta  F        H        rmse     crb      qcrb");
    for (i, row) in outcomes[0].table.rows.iter().enumerate() {
        println!(
            "{:<6} {:<8.3} {:<8.3} {:<8.4} {:<8.4} {:.4}",
            report.theta_grid[i],
            report.fisher[i],
            report.qfi[i],
            row.rmse,
            report.crb_rmse[i],
            report.qcrb_rmse[i]
        );
    }
    report.write_csv("fisher_bounds.csv")?;
    println!("wrote fisher_bounds.csv");
    Ok(())
}
