//! Joint estimation of detuning and Rabi frequency from one record.
//!
//! cargo run --release -p photonest --example posterior_2d

use photonest::bayes::posterior_2d;
use photonest::physics::SystemParams;
use photonest::seed::child_rng;
use photonest::sim::{simulate_trajectory_euler, DEFAULT_EULER_DT, DEFAULT_STEP_CAP};

fn main() -> photonest::Result<()> {
    let truth = SystemParams::unit_gamma(0.8, 1.2)?;
    let mut rng = child_rng(11, 0);
    let record =
        simulate_trajectory_euler(&truth, 48, DEFAULT_EULER_DT, DEFAULT_STEP_CAP, &mut rng)?;

    let post = posterior_2d(&record, (0.0, 3.0), (0.25, 5.0), (300, 300))?;
    let mean = post.mean();
    let map = post.map_point();
    let var = post.variance();
    println!("truth: (delta, omega) = (0.8, 1.2)");
    println!("posterior mean: ({:.4}, {:.4})", mean[0], mean[1]);
    println!("posterior MAP:  ({:.4}, {:.4})", map[0], map[1]);
    println!("posterior sd:   ({:.4}, {:.4})", var[0].sqrt(), var[1].sqrt());

    post.write_csv("posterior_2d.csv")?;
    println!("wrote posterior_2d.csv (delta, omega, mass)");
    Ok(())
}
