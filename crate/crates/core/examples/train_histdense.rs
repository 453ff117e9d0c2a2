//! Train a small histogram-dense estimator and pit it against Bayes.
//!
//! Uses a reduced dataset so the run takes about a minute; the acceptance
//! suite and the CLI run the full desk-scale protocol.
//!
//! cargo run --release -p photonest --example train_histdense

use photonest::bayes::EstimatorKind;
use photonest::nn::{train, ArchKind, TrainConfig};
use photonest::sim::{generate_dataset, NoiseConfig, ParameterBox};
use photonest::validate::{run_validation, HarnessConfig, ValidationGrid};

fn main() -> photonest::Result<()> {
    let dataset =
        generate_dataset(ParameterBox::standard_1d(), 20_000, 48, NoiseConfig::default(), 1)?;
    let config = TrainConfig {
        epochs: 60,
        batch_size: 2048,
        seed: 2,
        ..TrainConfig::default()
    };
    let (model, history) = train(&dataset, &config, ArchKind::OneD)?;
    println!("trained {} parameters", model.param_count());
    for (e, t, v) in history.rows.iter().step_by(10) {
        println!("epoch {e:>3}: train MSLE {t:.5}, val MSLE {v:.5}");
    }

    let grid = ValidationGrid::one_d_custom(&[0.4, 0.8, 1.2, 1.6], 1.0, 300);
    let cfg = HarnessConfig { seed: 3, ..Default::default() };
    let outcomes = run_validation(
        &grid,
        &[EstimatorKind::Nn, EstimatorKind::BayesMean],
        Some(&model),
        &cfg,
    )?;
    println!("delta  NN-RMSE  Bayes-RMSE");
    for (nn, bayes) in outcomes[0].table.rows.iter().zip(&outcomes[1].table.rows) {
        println!("{:<6} {:<8.4} {:.4}", nn.delta, nn.rmse, bayes.rmse);
    }
    Ok(())
}
