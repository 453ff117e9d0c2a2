//! Exact Bayesian inference on one photon-counting record.
//!
//! Simulates a 48-click record at a hidden detuning, computes the grid
//! posterior for the full quantum signal and for its classical reduction
//! (the mean delay), and writes both curves to posterior.csv.
//!
//! cargo run --release -p photonest --example posterior

use photonest::bayes::{classical_posterior, estimate_map, estimate_mean, posterior_1d};
use photonest::physics::SystemParams;
use photonest::seed::child_rng;
use photonest::sim::{simulate_trajectory_euler, DEFAULT_EULER_DT, DEFAULT_STEP_CAP};

fn main() -> photonest::Result<()> {
    let truth = SystemParams::unit_gamma(0.8, 1.0)?;
    let mut rng = child_rng(7, 0);
    let record =
        simulate_trajectory_euler(&truth, 48, DEFAULT_EULER_DT, DEFAULT_STEP_CAP, &mut rng)?;

    let quantum = posterior_1d(&record, (0.0, 5.0), 1000, 1.0)?;
    let classical = classical_posterior(&record, (0.0, 5.0), 1000, 1.0)?;

    println!("truth: delta = 0.8");
    println!(
        "quantum signal:   mean {:.4}, MAP {:.4}, posterior sd {:.4}",
        estimate_mean(&quantum).values[0],
        estimate_map(&quantum).values[0],
        quantum.variance()[0].sqrt()
    );
    println!(
        "classical signal: mean {:.4}, posterior sd {:.4}",
        estimate_mean(&classical).values[0],
        classical.variance()[0].sqrt()
    );

    let mut text = String::from("delta,quantum_mass,classical_mass\n");
    for ((d, q), c) in quantum.axes[0].iter().zip(&quantum.masses).zip(&classical.masses) {
        text.push_str(&format!("{d},{q},{c}\n"));
    }
    std::fs::write("posterior.csv", text)?;
    println!("wrote posterior.csv");
    Ok(())
}
