//! Waiting-time distributions of the driven emitter.
//!
//! Prints w(tau) for several detunings as CSV: the oscillatory,
//! antibunched shape (w(0) = 0) is what the estimators feed on.
//!
//! cargo run --release -p photonest --example waiting_time > wtd.csv

use photonest::physics::{waiting_time_density, SystemParams};

fn main() -> photonest::Result<()> {
    let deltas = [0.0, 0.8, 1.6, 2.4];
    let params: Vec<SystemParams> = deltas
        .iter()
        .map(|&d| SystemParams::unit_gamma(d, 1.0))
        .collect::<photonest::Result<_>>()?;

    print!("tau");
    for d in &deltas {
        print!(",w_delta_{d}");
    }
    println!();
    for k in 0..=600 {
        let tau = k as f64 * 0.02;
        print!("{tau}");
        for p in &params {
            print!(",{}", waiting_time_density(tau, p)?);
        }
        println!();
    }
    Ok(())
}
