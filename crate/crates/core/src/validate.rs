//! Paired validation harness: RMSE and bias of every estimator on
//! bitwise-identical records, plus the noise-sweep protocols.
//!
//! Grid points are evaluated in parallel; record generation follows the
//! per-record seeding contract, so all estimators in one run see identical
//! records and repeated runs are bitwise reproducible.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::bayes::{classical_posterior, posterior_1d, posterior_2d, EstimatorKind};
use crate::error::{Error, Result};
use crate::nn::{train, ArchKind, HistDenseModel, TrainConfig};
use crate::physics::SystemParams;
use crate::seed::{child_rng, grid_stream};
use crate::sim::{generate_dataset, generate_record, DelaySampler, NoiseConfig, ParameterBox};

/// Truth grid for validation runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationGrid {
    /// (delta, omega) per grid point.
    pub points: Vec<(f64, f64)>,
    pub trajectories_per_point: usize,
    pub two_d: bool,
}

impl ValidationGrid {
    /// 40 uniformly spaced detunings on [0, 2.1], fixed omega = 1.
    pub fn one_d_default(trajectories_per_point: usize) -> Self {
        let points = crate::bayes::linspace(0.0, 2.1, 40)
            .into_iter()
            .map(|d| (d, 1.0))
            .collect();
        Self { points, trajectories_per_point, two_d: false }
    }

    /// 40 x 40 grid over delta in [0, 2.1] and omega in [0.25, 2.1].
    pub fn two_d_default(trajectories_per_point: usize) -> Self {
        let deltas = crate::bayes::linspace(0.0, 2.1, 40);
        let omegas = crate::bayes::linspace(0.25, 2.1, 40);
        let mut points = Vec::with_capacity(1600);
        for &d in &deltas {
            for &o in &omegas {
                points.push((d, o));
            }
        }
        Self { points, trajectories_per_point, two_d: true }
    }

    /// Custom 1D grid at fixed omega.
    pub fn one_d_custom(deltas: &[f64], omega: f64, trajectories_per_point: usize) -> Self {
        Self {
            points: deltas.iter().map(|&d| (d, omega)).collect(),
            trajectories_per_point,
            two_d: false,
        }
    }

    /// Custom 2D grid from axis values.
    pub fn two_d_custom(deltas: &[f64], omegas: &[f64], trajectories_per_point: usize) -> Self {
        let mut points = Vec::with_capacity(deltas.len() * omegas.len());
        for &d in deltas {
            for &o in omegas {
                points.push((d, o));
            }
        }
        Self { points, trajectories_per_point, two_d: true }
    }
}

/// Posterior and record-generation settings for a validation run.
#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub n_clicks: usize,
    /// Prior support for the 1D posteriors (matches the NN training box).
    pub support_delta: (f64, f64),
    /// Prior support of the Rabi axis for 2D posteriors.
    pub support_omega: (f64, f64),
    pub n_grid_1d: usize,
    pub n_grid_2d: (usize, usize),
    /// Measurement noise applied to the validation records.
    pub noise: NoiseConfig,
    pub seed: u64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            n_clicks: 48,
            support_delta: (0.0, 5.0),
            support_omega: (0.25, 5.0),
            n_grid_1d: 1000,
            n_grid_2d: (300, 300),
            noise: NoiseConfig::default(),
            seed: 0,
        }
    }
}

/// Per-grid-point error metrics of one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub delta: f64,
    pub omega: f64,
    /// Euclidean RMSE over all estimated axes.
    pub rmse: f64,
    pub rmse_axes: Vec<f64>,
    pub bias_axes: Vec<f64>,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub estimator: EstimatorKind,
    pub two_d: bool,
    pub rows: Vec<MetricRow>,
}

impl MetricTable {
    pub fn mean_rmse(&self) -> f64 {
        self.rows.iter().map(|r| r.rmse).sum::<f64>() / self.rows.len() as f64
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        if self.two_d {
            writeln!(
                out,
                "delta,omega,rmse,rmse_delta,rmse_omega,bias_delta,bias_omega,n_samples,estimator"
            )?;
            for r in &self.rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.delta,
                    r.omega,
                    r.rmse,
                    r.rmse_axes[0],
                    r.rmse_axes[1],
                    r.bias_axes[0],
                    r.bias_axes[1],
                    r.n_samples,
                    self.estimator.tag()
                )?;
            }
        } else {
            writeln!(out, "delta,omega,rmse,bias,n_samples,estimator")?;
            for r in &self.rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.delta,
                    r.omega,
                    r.rmse,
                    r.bias_axes[0],
                    r.n_samples,
                    self.estimator.tag()
                )?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Full result of a validation run for one estimator.
#[derive(Debug, Clone)]
pub struct ValidationOutcome {
    pub estimator: EstimatorKind,
    pub table: MetricTable,
    /// Raw estimates: `estimates[point][record][axis]`.
    pub estimates: Vec<Vec<Vec<f64>>>,
}

fn prior_mean_1d(support: (f64, f64)) -> f64 {
    0.5 * (support.0 + support.1)
}

/// Evaluate the requested estimators on identical records per grid point.
///
/// Records whose likelihood vanishes at every grid point (possible for
/// jitter-clipped zero delays under the noiseless model) fall back to the
/// prior mean for the Bayesian estimators: with no usable evidence the
/// posterior is the prior.
pub fn run_validation(
    grid: &ValidationGrid,
    estimators: &[EstimatorKind],
    model: Option<&HistDenseModel>,
    cfg: &HarnessConfig,
) -> Result<Vec<ValidationOutcome>> {
    if estimators.is_empty() {
        return Err(Error::InvalidConfig("no estimators requested".into()));
    }
    if estimators.contains(&EstimatorKind::Nn) && model.is_none() {
        return Err(Error::MissingModel);
    }
    if grid.two_d && estimators.contains(&EstimatorKind::ClassicalMean) {
        return Err(Error::InvalidConfig(
            "the classical mean-delay estimator is defined for 1D grids only".into(),
        ));
    }
    if let Some(m) = model {
        if m.n_clicks != cfg.n_clicks {
            return Err(Error::ShapeMismatch(format!(
                "model expects {} clicks, harness generates {}",
                m.n_clicks, cfg.n_clicks
            )));
        }
    }
    cfg.noise.validate()?;

    // estimates[estimator][point][record][axis]
    let per_point: Vec<Vec<Vec<Vec<f64>>>> = grid
        .points
        .par_iter()
        .enumerate()
        .map(|(p, &(delta, omega))| {
            let truth = SystemParams::unit_gamma(delta, omega)?;
            let sampler = DelaySampler::new(&truth)?;
            let mut out: Vec<Vec<Vec<f64>>> =
                vec![Vec::with_capacity(grid.trajectories_per_point); estimators.len()];
            for r in 0..grid.trajectories_per_point {
                let mut rng = child_rng(cfg.seed, grid_stream(p, r));
                let rec = generate_record(&sampler, cfg.n_clicks, &cfg.noise, &mut rng);
                for (e, kind) in estimators.iter().enumerate() {
                    let est = match kind {
                        EstimatorKind::BayesMean => {
                            if grid.two_d {
                                match posterior_2d(
                                    &rec,
                                    cfg.support_delta,
                                    cfg.support_omega,
                                    cfg.n_grid_2d,
                                ) {
                                    Ok(post) => post.mean(),
                                    Err(Error::AllImpossible) => vec![
                                        prior_mean_1d(cfg.support_delta),
                                        prior_mean_1d(cfg.support_omega),
                                    ],
                                    Err(e) => return Err(e),
                                }
                            } else {
                                match posterior_1d(&rec, cfg.support_delta, cfg.n_grid_1d, omega) {
                                    Ok(post) => post.mean(),
                                    Err(Error::AllImpossible) => {
                                        vec![prior_mean_1d(cfg.support_delta)]
                                    }
                                    Err(e) => return Err(e),
                                }
                            }
                        }
                        EstimatorKind::BayesMap => {
                            if grid.two_d {
                                match posterior_2d(
                                    &rec,
                                    cfg.support_delta,
                                    cfg.support_omega,
                                    cfg.n_grid_2d,
                                ) {
                                    Ok(post) => post.map_point(),
                                    Err(Error::AllImpossible) => vec![
                                        prior_mean_1d(cfg.support_delta),
                                        prior_mean_1d(cfg.support_omega),
                                    ],
                                    Err(e) => return Err(e),
                                }
                            } else {
                                match posterior_1d(&rec, cfg.support_delta, cfg.n_grid_1d, omega) {
                                    Ok(post) => post.map_point(),
                                    Err(Error::AllImpossible) => {
                                        vec![prior_mean_1d(cfg.support_delta)]
                                    }
                                    Err(e) => return Err(e),
                                }
                            }
                        }
                        EstimatorKind::ClassicalMean => {
                            classical_posterior(&rec, cfg.support_delta, cfg.n_grid_1d, omega)?
                                .mean()
                        }
                        EstimatorKind::Nn => model.expect("checked above").forward(&rec)?.values,
                    };
                    out[e].push(est);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let n_axes = if grid.two_d { 2 } else { 1 };
    let outcomes = estimators
        .iter()
        .enumerate()
        .map(|(e, &kind)| {
            let estimates: Vec<Vec<Vec<f64>>> =
                per_point.iter().map(|point| point[e].clone()).collect();
            let rows: Vec<MetricRow> = grid
                .points
                .iter()
                .zip(&estimates)
                .map(|(&(delta, omega), ests)| {
                    let truth = [delta, omega];
                    let n = ests.len();
                    let mut sq = vec![0.0; n_axes];
                    let mut bias = vec![0.0; n_axes];
                    let mut sq_all = 0.0;
                    for est in ests {
                        for a in 0..n_axes {
                            let err = est[a] - truth[a];
                            sq[a] += err * err;
                            bias[a] += err;
                            sq_all += err * err;
                        }
                    }
                    MetricRow {
                        delta,
                        omega,
                        rmse: (sq_all / n as f64).sqrt(),
                        rmse_axes: sq.iter().map(|s| (s / n as f64).sqrt()).collect(),
                        bias_axes: bias.iter().map(|b| b / n as f64).collect(),
                        n_samples: n,
                    }
                })
                .collect();
            ValidationOutcome {
                estimator: kind,
                table: MetricTable { estimator: kind, two_d: grid.two_d, rows },
                estimates,
            }
        })
        .collect();
    Ok(outcomes)
}

/// Summary of a paired comparison between two metric tables.
#[derive(Debug, Clone)]
pub struct CompareSummary {
    /// RMSE ratio a/b per grid point.
    pub per_point_ratio: Vec<f64>,
    /// Ratio of grid-mean RMSEs.
    pub ratio_of_means: f64,
    /// Mean of the per-point ratios.
    pub mean_ratio: f64,
    /// Points where a (resp. b) has strictly lower RMSE.
    pub wins_a: usize,
    pub wins_b: usize,
}

pub fn compare_tables(a: &MetricTable, b: &MetricTable) -> Result<CompareSummary> {
    if a.rows.len() != b.rows.len()
        || a.rows
            .iter()
            .zip(&b.rows)
            .any(|(x, y)| x.delta != y.delta || x.omega != y.omega)
    {
        return Err(Error::GridMismatch(
            "metric tables were computed on different grids".into(),
        ));
    }
    let per_point_ratio: Vec<f64> =
        a.rows.iter().zip(&b.rows).map(|(x, y)| x.rmse / y.rmse).collect();
    let mean_a = a.mean_rmse();
    let mean_b = b.mean_rmse();
    let wins_a = a.rows.iter().zip(&b.rows).filter(|(x, y)| x.rmse < y.rmse).count();
    let wins_b = a.rows.iter().zip(&b.rows).filter(|(x, y)| y.rmse < x.rmse).count();
    Ok(CompareSummary {
        ratio_of_means: mean_a / mean_b,
        mean_ratio: per_point_ratio.iter().sum::<f64>() / per_point_ratio.len() as f64,
        per_point_ratio,
        wins_a,
        wins_b,
    })
}

/// Desk-scale knobs for the training-based protocols.
#[derive(Debug, Clone, Copy)]
pub struct SweepScale {
    pub train_records: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub trajectories_per_point: usize,
}

impl SweepScale {
    /// Desk-scale defaults: hours-scale runtimes instead of the full
    /// paper-scale data volumes, preserving every qualitative ordering.
    pub fn desk() -> Self {
        Self { train_records: 200_000, epochs: 200, batch_size: 12_800, trajectories_per_point: 1000 }
    }

    /// Tiny settings for smoke tests.
    pub fn smoke() -> Self {
        Self { train_records: 2000, epochs: 30, batch_size: 256, trajectories_per_point: 50 }
    }
}

fn subseed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One row of a jitter-robustness sweep.
#[derive(Debug, Clone)]
pub struct JitterRow {
    pub sigma_tau: f64,
    pub delta: f64,
    pub rmse_nn: f64,
    /// Noise-unaware Bayesian inference on the same jittered records.
    pub rmse_bayes: f64,
}

/// Train a model per jitter level and compare it against noise-unaware
/// Bayesian inference on identically jittered validation records.
pub fn jitter_sweep(
    sigmas: &[f64],
    deltas: &[f64],
    scale: &SweepScale,
    seed: u64,
) -> Result<Vec<JitterRow>> {
    let mut rows = Vec::with_capacity(sigmas.len() * deltas.len());
    for (k, &sigma_tau) in sigmas.iter().enumerate() {
        let noise = NoiseConfig { sigma_tau, sigma_y: 0.0, clip_negative_delays: true };
        let dataset = generate_dataset(
            ParameterBox::standard_1d(),
            scale.train_records,
            48,
            noise,
            subseed(seed, 2 * k as u64),
        )?;
        let cfg = TrainConfig {
            epochs: scale.epochs,
            batch_size: scale.batch_size,
            seed: subseed(seed, 2 * k as u64 + 1),
            ..TrainConfig::default()
        };
        let (model, _) = train(&dataset, &cfg, ArchKind::OneD)?;

        let grid = ValidationGrid::one_d_custom(deltas, 1.0, scale.trajectories_per_point);
        let harness = HarnessConfig { noise, seed: subseed(seed, 1000 + k as u64), ..Default::default() };
        let outcomes = run_validation(
            &grid,
            &[EstimatorKind::Nn, EstimatorKind::BayesMean],
            Some(&model),
            &harness,
        )?;
        for (i, &delta) in deltas.iter().enumerate() {
            rows.push(JitterRow {
                sigma_tau,
                delta,
                rmse_nn: outcomes[0].table.rows[i].rmse,
                rmse_bayes: outcomes[1].table.rows[i].rmse,
            });
        }
    }
    Ok(rows)
}

/// One row of a target-noise sweep.
#[derive(Debug, Clone)]
pub struct TargetNoiseRow {
    pub sigma_y: f64,
    pub delta: f64,
    pub rmse_nn: f64,
    /// Noiseless Bayesian reference on the same records.
    pub rmse_bayes: f64,
}

/// Train models on targets corrupted by calibration noise `sigma_y` and
/// validate them on clean records.
pub fn target_noise_sweep(
    sigmas: &[f64],
    deltas: &[f64],
    scale: &SweepScale,
    seed: u64,
) -> Result<Vec<TargetNoiseRow>> {
    let dataset = generate_dataset(
        ParameterBox::standard_1d(),
        scale.train_records,
        48,
        NoiseConfig::default(),
        subseed(seed, 7),
    )?;
    let grid = ValidationGrid::one_d_custom(deltas, 1.0, scale.trajectories_per_point);
    let harness = HarnessConfig { seed: subseed(seed, 8), ..Default::default() };

    let mut rows = Vec::with_capacity(sigmas.len() * deltas.len());
    for (k, &sigma_y) in sigmas.iter().enumerate() {
        let cfg = TrainConfig {
            epochs: scale.epochs,
            batch_size: scale.batch_size,
            sigma_y,
            seed: subseed(seed, 100 + k as u64),
            ..TrainConfig::default()
        };
        let (model, _) = train(&dataset, &cfg, ArchKind::OneD)?;
        let outcomes = run_validation(
            &grid,
            &[EstimatorKind::Nn, EstimatorKind::BayesMean],
            Some(&model),
            &harness,
        )?;
        for (i, &delta) in deltas.iter().enumerate() {
            rows.push(TargetNoiseRow {
                sigma_y,
                delta,
                rmse_nn: outcomes[0].table.rows[i].rmse,
                rmse_bayes: outcomes[1].table.rows[i].rmse,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids_have_documented_shapes() {
        let g1 = ValidationGrid::one_d_default(100);
        assert_eq!(g1.points.len(), 40);
        assert_eq!(g1.points[0], (0.0, 1.0));
        let last = g1.points.last().unwrap();
        assert!((last.0 - 2.1).abs() < 1e-12 && last.1 == 1.0);
        let g2 = ValidationGrid::two_d_default(100);
        assert_eq!(g2.points.len(), 1600);
    }

    #[test]
    fn constant_estimator_metrics_are_analytic() {
        // A zero-weight model always outputs the support lower edge (0), so
        // rmse = |0 - delta| = delta and bias = -delta, exactly.
        let model = HistDenseModel::zeroed(
            ArchKind::OneD,
            crate::nn::HistogramSpec::default(),
            48,
            vec![(0.0, 5.0)],
        )
        .unwrap();
        let grid = ValidationGrid::one_d_custom(&[0.4, 1.2], 1.0, 40);
        let cfg = HarnessConfig { seed: 5, ..Default::default() };
        let out = run_validation(&grid, &[EstimatorKind::Nn], Some(&model), &cfg).unwrap();
        let rows = &out[0].table.rows;
        assert!((rows[0].rmse - 0.4).abs() < 1e-12);
        assert!((rows[1].rmse - 1.2).abs() < 1e-12);
        assert!((rows[0].bias_axes[0] + 0.4).abs() < 1e-12);
    }

    #[test]
    fn rmse_dominates_bias() {
        let grid = ValidationGrid::one_d_custom(&[0.8], 1.0, 120);
        let cfg = HarnessConfig { n_grid_1d: 400, seed: 1, ..Default::default() };
        let out = run_validation(
            &grid,
            &[EstimatorKind::BayesMean, EstimatorKind::ClassicalMean],
            None,
            &cfg,
        )
        .unwrap();
        for o in &out {
            for r in &o.table.rows {
                assert!(r.rmse >= r.bias_axes[0].abs() - 1e-12);
            }
        }
    }

    #[test]
    fn estimators_see_identical_records() {
        // The Bayes-mean run must be reproducible when estimators are added.
        let grid = ValidationGrid::one_d_custom(&[0.6], 1.0, 30);
        let cfg = HarnessConfig { n_grid_1d: 300, seed: 2, ..Default::default() };
        let solo = run_validation(&grid, &[EstimatorKind::BayesMean], None, &cfg).unwrap();
        let paired = run_validation(
            &grid,
            &[EstimatorKind::ClassicalMean, EstimatorKind::BayesMean],
            None,
            &cfg,
        )
        .unwrap();
        assert_eq!(solo[0].estimates, paired[1].estimates);
    }

    #[test]
    fn missing_model_is_an_error() {
        let grid = ValidationGrid::one_d_custom(&[0.5], 1.0, 10);
        let cfg = HarnessConfig::default();
        assert!(matches!(
            run_validation(&grid, &[EstimatorKind::Nn], None, &cfg),
            Err(Error::MissingModel)
        ));
    }

    #[test]
    fn classical_estimator_rejected_on_2d_grids() {
        let grid = ValidationGrid::two_d_custom(&[0.5], &[1.0], 10);
        let cfg = HarnessConfig::default();
        assert!(run_validation(&grid, &[EstimatorKind::ClassicalMean], None, &cfg).is_err());
    }

    #[test]
    fn compare_tables_self_ratio_is_one() {
        let grid = ValidationGrid::one_d_custom(&[0.4, 0.9], 1.0, 25);
        let cfg = HarnessConfig { n_grid_1d: 200, seed: 3, ..Default::default() };
        let out = run_validation(&grid, &[EstimatorKind::ClassicalMean], None, &cfg).unwrap();
        let summary = compare_tables(&out[0].table, &out[0].table).unwrap();
        assert!(summary.per_point_ratio.iter().all(|&r| (r - 1.0).abs() < 1e-15));
        assert_eq!(summary.wins_a, 0);
        assert_eq!(summary.wins_b, 0);
    }

    #[test]
    fn compare_tables_rejects_grid_mismatch() {
        let cfg = HarnessConfig { n_grid_1d: 200, seed: 3, ..Default::default() };
        let a = run_validation(
            &ValidationGrid::one_d_custom(&[0.4], 1.0, 10),
            &[EstimatorKind::ClassicalMean],
            None,
            &cfg,
        )
        .unwrap();
        let b = run_validation(
            &ValidationGrid::one_d_custom(&[0.5], 1.0, 10),
            &[EstimatorKind::ClassicalMean],
            None,
            &cfg,
        )
        .unwrap();
        assert!(matches!(
            compare_tables(&a[0].table, &b[0].table),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn validation_runs_are_bitwise_reproducible() {
        let grid = ValidationGrid::one_d_custom(&[0.8], 1.0, 20);
        let cfg = HarnessConfig { n_grid_1d: 250, seed: 9, ..Default::default() };
        let a = run_validation(&grid, &[EstimatorKind::BayesMean], None, &cfg).unwrap();
        let b = run_validation(&grid, &[EstimatorKind::BayesMean], None, &cfg).unwrap();
        assert_eq!(a[0].estimates, b[0].estimates);
    }
}
