//! Quantum-jump trajectory simulation, two ways.
//!
//! Integrates the stochastic Schrödinger equation under photon counting and
//! cross-checks the resulting delay statistics against the fast tabulated
//! inverse-CDF sampler (two-sample Kolmogorov-Smirnov distance).
//!
//! cargo run --release -p photonest --example trajectory

use photonest::physics::{classical_moments, SystemParams};
use photonest::seed::child_rng;
use photonest::sim::{simulate_trajectory_euler, DelaySampler, DEFAULT_EULER_DT, DEFAULT_STEP_CAP};

fn ks_distance(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

fn main() -> photonest::Result<()> {
    let truth = SystemParams::unit_gamma(0.8, 1.0)?;
    let mut rng = child_rng(42, 0);

    let record = simulate_trajectory_euler(&truth, 48, DEFAULT_EULER_DT, DEFAULT_STEP_CAP, &mut rng)?;
    println!("one trajectory at (delta, omega) = (0.8, 1.0), 48 clicks:");
    println!(
        "  total duration T = {:.2}/gamma, mean delay {:.3}/gamma (E[tau] = {:.3}/gamma)",
        record.delays.iter().sum::<f64>(),
        record.mean_delay(),
        classical_moments(&truth, 48)?.mu
    );
    println!("  first delays: {:?}", &record.delays[..6.min(record.delays.len())]);

    let n = 10_000;
    let mut euler_pool = Vec::with_capacity(n);
    while euler_pool.len() < n {
        let rec =
            simulate_trajectory_euler(&truth, 48, DEFAULT_EULER_DT, DEFAULT_STEP_CAP, &mut rng)?;
        euler_pool.extend(rec.delays);
    }
    euler_pool.truncate(n);

    let sampler = DelaySampler::new(&truth)?;
    let iid_pool: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();

    let d = ks_distance(euler_pool, iid_pool);
    println!("KS distance between Euler and i.i.d. pools ({n} delays): {d:.4}");
    Ok(())
}
