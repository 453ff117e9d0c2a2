//! Noise robustness of the learned estimator (smoke scale).
//!
//! Two protocols: detector jitter added to the delays (the network trains on
//! noisy inputs, Bayes stays noise-unaware), and Gaussian noise on the
//! training targets (imperfect calibration). Desk-scale runs live behind the
//! `photonest noise-sweep` subcommand.
//!
//! cargo run --release -p photonest --example noise_robustness

use photonest::validate::{jitter_sweep, target_noise_sweep, SweepScale};

fn main() -> photonest::Result<()> {
    let scale = SweepScale { train_records: 20_000, epochs: 60, batch_size: 2048, trajectories_per_point: 300 };
    let deltas = [0.27, 0.8];

    println!("jitter sweep (sigma_tau on inputs):");
    println!("sigma_tau  delta  NN-RMSE  noise-unaware-Bayes-RMSE");
    for row in jitter_sweep(&[0.25, 0.5], &deltas, &scale, 10)? {
        println!(
            "{:<10} {:<6} {:<8.4} {:.4}",
            row.sigma_tau, row.delta, row.rmse_nn, row.rmse_bayes
        );
    }

    println!("\ntarget-noise sweep (sigma_y on training labels):");
    println!("sigma_y  delta  NN-RMSE  clean-Bayes-RMSE");
    for row in target_noise_sweep(&[0.25, 0.5], &deltas, &scale, 11)? {
        println!(
            "{:<8} {:<6} {:<8.4} {:.4}",
            row.sigma_y, row.delta, row.rmse_nn, row.rmse_bayes
        );
    }
    Ok(())
}
