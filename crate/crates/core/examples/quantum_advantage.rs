//! Quantum vs classical signals: paired RMSE comparison.
//!
//! Evaluates the Bayesian estimator on full delay lists against the same
//! estimator restricted to the integrated-intensity (mean-delay) signal, on
//! identical records. The quantum correlations in the delays buy a solid
//! precision advantage.
//!
//! cargo run --release -p photonest --example quantum_advantage

use photonest::bayes::EstimatorKind;
use photonest::validate::{compare_tables, run_validation, HarnessConfig, ValidationGrid};

fn main() -> photonest::Result<()> {
    let grid = ValidationGrid::one_d_custom(&[0.4, 0.8, 1.2, 1.6], 1.0, 300);
    let cfg = HarnessConfig { seed: 4, ..Default::default() };
    let outcomes = run_validation(
        &grid,
        &[EstimatorKind::BayesMean, EstimatorKind::ClassicalMean],
        None,
        &cfg,
    )?;

    println!("delta  quantum-RMSE  classical-RMSE");
    for (q, c) in outcomes[0].table.rows.iter().zip(&outcomes[1].table.rows) {
        println!("{:<6} {:<13.4} {:.4}", q.delta, q.rmse, c.rmse);
    }
    let summary = compare_tables(&outcomes[0].table, &outcomes[1].table)?;
    println!(
        "mean-RMSE ratio quantum/classical: {:.3} (quantum wins {}/{} points)",
        summary.ratio_of_means,
        summary.wins_a,
        grid.points.len()
    );
    Ok(())
}
