//! Command-line interface: dataset simulation, training, inference,
//! benchmarking, Fisher bounds and noise sweeps.
//!
//! Binary artifacts (datasets, models) are always stored in gamma = 1 units;
//! `--gamma-units` converts command-line arguments and emitted tables.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use photonest::bayes::{classical_posterior, posterior_1d, posterior_2d, EstimatorKind};
use photonest::error::{Error, Result};
use photonest::fisher::{empirical_bias, FisherReport};
use photonest::nn::{train, ArchKind, HistDenseModel, TrainConfig};
use photonest::seed::child_rng;
use photonest::sim::{
    generate_dataset, simulate_trajectory_euler, Dataset, DatasetMeta, GeneratorKind,
    NoiseConfig, ParameterBox, DEFAULT_EULER_DT, DEFAULT_STEP_CAP,
};
use photonest::validate::{
    compare_tables, jitter_sweep, run_validation, target_noise_sweep, HarnessConfig, SweepScale,
    ValidationGrid,
};

#[derive(Parser)]
#[command(name = "photonest", version, about = "Driven-emitter parameter estimation from photon-counting records")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed for all stochastic steps.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Numerical value of gamma in your unit system; CLI rates are divided
    /// by it and times multiplied by it on the way in, outputs converted
    /// back. Stored artifacts always use gamma = 1.
    #[arg(long, default_value_t = 1.0)]
    gamma_units: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a delay dataset (fixed parameters or a sampling box).
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Detuning: a value ("0.8") or a range ("0:5").
        #[arg(long)]
        delta: String,
        /// Rabi frequency: a value ("1") or a range ("0.25:5").
        #[arg(long, default_value = "1")]
        omega: String,
        #[arg(long, default_value_t = 48)]
        n_clicks: usize,
        /// Number of records.
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value_t = Method::Iid)]
        method: Method,
        /// Euler step size (euler method only).
        #[arg(long, default_value_t = DEFAULT_EULER_DT)]
        dt: f64,
        /// Jitter noise deviation applied to the delays.
        #[arg(long, default_value_t = 0.0)]
        sigma_tau: f64,
        /// Output dataset path (binary; add --csv for a CSV copy).
        #[arg(long)]
        out: PathBuf,
        /// Also export the records as CSV next to the binary file.
        #[arg(long)]
        csv: bool,
    },
    /// Train a histogram-dense model on a dataset.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = Arch::OneD)]
        arch: Arch,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 12_800)]
        batch: usize,
        #[arg(long, default_value_t = 0.001)]
        lr: f64,
        /// Gaussian noise deviation applied to the training targets.
        #[arg(long, default_value_t = 0.0)]
        sigma_y: f64,
        /// Output model path.
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV loss history (epoch, train MSLE, validation MSLE).
        #[arg(long)]
        loss_history: Option<PathBuf>,
    },
    /// Estimate parameters for every record of a dataset.
    Infer {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
        /// Use a trained model.
        #[arg(long, conflicts_with_all = ["bayes", "classical"])]
        model: Option<PathBuf>,
        /// Use exact Bayesian inference ("1d" or "2d").
        #[arg(long, conflicts_with = "classical")]
        bayes: Option<Arch>,
        /// Use the classical mean-delay signal.
        #[arg(long)]
        classical: bool,
        /// Report the posterior maximum instead of the posterior mean.
        #[arg(long)]
        map: bool,
        /// Grid points per posterior axis.
        #[arg(long, default_value_t = 1000)]
        n_grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Paired RMSE/bias validation of estimators on a truth grid.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Arch::OneD)]
        grid: Arch,
        #[arg(long, default_value_t = 1000)]
        per_point: usize,
        /// Comma-separated subset of {bayes,bayes-map,classical,nn}.
        #[arg(long, default_value = "bayes,classical")]
        estimators: String,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Jitter applied to the validation records.
        #[arg(long, default_value_t = 0.0)]
        sigma_tau: f64,
        #[arg(long, default_value_t = 48)]
        n_clicks: usize,
        /// Posterior grid points (per axis in 2D).
        #[arg(long, default_value_t = 1000)]
        n_grid: usize,
        /// Output CSV; per-estimator tables are concatenated.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fisher information, QFI and biased CRB/QCRB bounds on a detuning grid.
    Fisher {
        #[command(flatten)]
        common: Common,
        /// Grid as "lo:hi:count", e.g. "0:2.1:40".
        #[arg(long, default_value = "0:2.1:40")]
        delta_grid: String,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 48)]
        n_clicks: usize,
        /// Trajectories per grid point for the empirical bias curve.
        #[arg(long, default_value_t = 1000)]
        per_point: usize,
        /// Independent trajectories per estimate in the CRB.
        #[arg(long, default_value_t = 1)]
        eta: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Noise-robustness protocol: train per noise level and compare.
    NoiseSweep {
        #[command(flatten)]
        common: Common,
        /// Jitter deviations, comma-separated (trains one model per value).
        #[arg(long, conflicts_with = "sigma_y_list")]
        sigma_tau_list: Option<String>,
        /// Target-noise deviations, comma-separated.
        #[arg(long)]
        sigma_y_list: Option<String>,
        /// Validation detunings, comma-separated.
        #[arg(long, default_value = "0.27,0.8")]
        deltas: String,
        #[arg(long, default_value_t = 200_000)]
        train_records: usize,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 12_800)]
        batch: usize,
        #[arg(long, default_value_t = 1000)]
        per_point: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Iid,
    Euler,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Arch {
    #[value(name = "1d")]
    OneD,
    #[value(name = "2d")]
    TwoD,
}

impl From<Arch> for ArchKind {
    fn from(a: Arch) -> ArchKind {
        match a {
            Arch::OneD => ArchKind::OneD,
            Arch::TwoD => ArchKind::TwoD,
        }
    }
}

fn main() {
    if let Err(e) = dispatch(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

/// Parse "x" as a fixed value or "lo:hi" as a range, in user units.
fn parse_value_or_range(text: &str, gamma: f64) -> Result<(f64, f64)> {
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidConfig(format!("cannot parse number {s:?}")))
    };
    if let Some((lo, hi)) = text.split_once(':') {
        Ok((parse(lo)? / gamma, parse(hi)? / gamma))
    } else {
        let v = parse(text)? / gamma;
        Ok((v, v))
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("cannot parse number {s:?}")))
        })
        .collect()
}

fn parse_grid_spec(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidConfig(format!("grid spec {text:?} is not lo:hi:count")));
    }
    let lo: f64 = parts[0].parse().map_err(|_| Error::InvalidConfig("bad grid lo".into()))?;
    let hi: f64 = parts[1].parse().map_err(|_| Error::InvalidConfig("bad grid hi".into()))?;
    let n: usize = parts[2].parse().map_err(|_| Error::InvalidConfig("bad grid count".into()))?;
    if n < 2 || !(hi > lo) {
        return Err(Error::InvalidConfig("grid needs hi > lo and count >= 2".into()));
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

/// Deterministic JSON sidecar next to an output file.
fn write_sidecar(out: &Path, payload: serde_json::Value) -> Result<()> {
    let side = out.with_extension("meta.json");
    let text = serde_json::to_string_pretty(&payload)
        .map_err(|e| Error::Format(format!("sidecar serialization: {e}")))?;
    std::fs::write(side, text)?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            common,
            delta,
            omega,
            n_clicks,
            count,
            method,
            dt,
            sigma_tau,
            out,
            csv,
        } => {
            let g = common.gamma_units;
            let delta_r = parse_value_or_range(&delta, g)?;
            let omega_r = parse_value_or_range(&omega, g)?;
            let sigma_tau_int = sigma_tau * g;
            let noise =
                NoiseConfig { sigma_tau: sigma_tau_int, sigma_y: 0.0, clip_negative_delays: true };

            let dataset = match method {
                Method::Iid => {
                    let bounds = if omega_r.0 == omega_r.1 {
                        if delta_r.0 == delta_r.1 {
                            // Fixed point: a degenerate box is rejected by the
                            // generator, so sample via the validation path.
                            fixed_point_dataset(
                                delta_r.0, omega_r.0, count, n_clicks, noise, common.seed,
                            )?
                        } else {
                            generate_dataset(
                                ParameterBox::OneD { delta: delta_r, omega: omega_r.0 },
                                count,
                                n_clicks,
                                noise,
                                common.seed,
                            )?
                        }
                    } else {
                        generate_dataset(
                            ParameterBox::TwoD { delta: delta_r, omega: omega_r },
                            count,
                            n_clicks,
                            noise,
                            common.seed,
                        )?
                    };
                    bounds
                }
                Method::Euler => {
                    euler_dataset(delta_r, omega_r, count, n_clicks, dt * g, noise, common.seed)?
                }
            };
            dataset.write_binary(&out)?;
            if csv {
                dataset.write_csv(out.with_extension("csv"))?;
            }
            write_sidecar(
                &out,
                serde_json::json!({
                    "command": "simulate",
                    "version": env!("CARGO_PKG_VERSION"),
                    "seed": common.seed,
                    "gamma_units": g,
                    "delta": delta, "omega": omega,
                    "n_clicks": n_clicks, "count": count,
                    "method": match method { Method::Iid => "iid", Method::Euler => "euler" },
                    "dt": dt, "sigma_tau": sigma_tau,
                }),
            )
        }
        Command::Train { common, dataset, arch, epochs, batch, lr, sigma_y, out, loss_history } => {
            let g = common.gamma_units;
            let ds = Dataset::read_binary(&dataset)?;
            let cfg = TrainConfig {
                learning_rate: lr,
                batch_size: batch,
                epochs,
                sigma_y: sigma_y / g,
                seed: common.seed,
                ..TrainConfig::default()
            };
            let (model, history) = train(&ds, &cfg, arch.into())?;
            model.save(&out)?;
            if let Some(path) = loss_history {
                history.write_csv(path)?;
            }
            let last = history.rows.last().unwrap();
            println!(
                "trained {} parameters, final train MSLE {:.6}, validation MSLE {:.6}",
                model.param_count(),
                last.1,
                last.2
            );
            write_sidecar(
                &out,
                serde_json::json!({
                    "command": "train",
                    "version": env!("CARGO_PKG_VERSION"),
                    "seed": common.seed,
                    "gamma_units": g,
                    "dataset": dataset, "arch": match arch { Arch::OneD => "1d", Arch::TwoD => "2d" },
                    "epochs": epochs, "batch": batch, "lr": lr, "sigma_y": sigma_y,
                    "params": model.param_count(),
                }),
            )
        }
        Command::Infer { common, dataset, model, bayes, classical, map, n_grid, out } => {
            let g = common.gamma_units;
            let ds = Dataset::read_binary(&dataset)?;
            let estimates = infer_dataset(&ds, &model, bayes, classical, map, n_grid)?;
            write_infer_csv(&out, &ds, &estimates, g)?;
            write_sidecar(
                &out,
                serde_json::json!({
                    "command": "infer",
                    "version": env!("CARGO_PKG_VERSION"),
                    "seed": common.seed,
                    "gamma_units": g,
                    "dataset": dataset,
                    "estimator": estimates.first().map(|e| e.method.tag()),
                    "n_grid": n_grid,
                }),
            )
        }
        Command::Bench {
            common,
            grid,
            per_point,
            estimators,
            model,
            sigma_tau,
            n_clicks,
            n_grid,
            out,
        } => {
            let g = common.gamma_units;
            let kinds = parse_estimators(&estimators)?;
            let model = model.map(|p| HistDenseModel::load(p)).transpose()?;
            let vgrid = match grid {
                Arch::OneD => ValidationGrid::one_d_default(per_point),
                Arch::TwoD => ValidationGrid::two_d_default(per_point),
            };
            let cfg = HarnessConfig {
                n_clicks,
                n_grid_1d: n_grid,
                n_grid_2d: (n_grid.min(400), n_grid.min(400)),
                support_delta: if grid == Arch::TwoD { (0.0, 3.0) } else { (0.0, 5.0) },
                noise: NoiseConfig {
                    sigma_tau: sigma_tau * g,
                    sigma_y: 0.0,
                    clip_negative_delays: true,
                },
                seed: common.seed,
                ..HarnessConfig::default()
            };
            let outcomes = run_validation(&vgrid, &kinds, model.as_ref(), &cfg)?;
            write_bench_csv(&out, &outcomes, g)?;
            if outcomes.len() == 2 {
                let s = compare_tables(&outcomes[0].table, &outcomes[1].table)?;
                println!(
                    "{} vs {}: mean-RMSE ratio {:.4}, wins {}/{}",
                    outcomes[0].estimator.tag(),
                    outcomes[1].estimator.tag(),
                    s.ratio_of_means,
                    s.wins_a,
                    s.wins_b
                );
            }
            write_sidecar(
                &out,
                serde_json::json!({
                    "command": "bench",
                    "version": env!("CARGO_PKG_VERSION"),
                    "seed": common.seed,
                    "gamma_units": g,
                    "grid": match grid { Arch::OneD => "1d", Arch::TwoD => "2d" },
                    "per_point": per_point, "estimators": estimators,
                    "sigma_tau": sigma_tau, "n_clicks": n_clicks, "n_grid": n_grid,
                }),
            )
        }
        Command::Fisher { common, delta_grid, omega, n_clicks, per_point, eta, out } => {
            let g = common.gamma_units;
            let grid: Vec<f64> = parse_grid_spec(&delta_grid)?.iter().map(|d| d / g).collect();
            let vgrid = ValidationGrid::one_d_custom(&grid, omega / g, per_point);
            let cfg = HarnessConfig { n_clicks, seed: common.seed, ..HarnessConfig::default() };
            let outcomes = run_validation(&vgrid, &[EstimatorKind::BayesMean], None, &cfg)?;
            let per_point_estimates: Vec<Vec<f64>> = outcomes[0]
                .estimates
                .iter()
                .map(|recs| recs.iter().map(|e| e[0]).collect())
                .collect();
            let curve = empirical_bias(&grid, &per_point_estimates)?;
            let report = FisherReport::build(omega / g, n_clicks, &curve, 1e-3, 1e-3, eta)?;
            let report = report.scaled(g);
            report.write_csv(&out)?;
            write_sidecar(
                &out,
                serde_json::json!({
                    "command": "fisher",
                    "version": env!("CARGO_PKG_VERSION"),
                    "seed": common.seed,
                    "gamma_units": g,
                    "delta_grid": delta_grid, "omega": omega,
                    "n_clicks": n_clicks, "per_point": per_point, "eta": eta,
                }),
            )
        }
        Command::NoiseSweep {
            common,
            sigma_tau_list,
            sigma_y_list,
            deltas,
            train_records,
            epochs,
            batch,
            per_point,
            out,
        } => {
            let g = common.gamma_units;
            let deltas: Vec<f64> = parse_list(&deltas)?.iter().map(|d| d / g).collect();
            let scale = SweepScale {
                train_records,
                epochs,
                batch_size: batch,
                trajectories_per_point: per_point,
            };
            let mut text = String::from("noise_kind,sigma,delta,rmse_nn,rmse_bayes\n");
            if let Some(list) = sigma_tau_list {
                let sigmas: Vec<f64> = parse_list(&list)?.iter().map(|s| s * g).collect();
                for row in jitter_sweep(&sigmas, &deltas, &scale, common.seed)? {
                    text.push_str(&format!(
                        "jitter,{},{},{},{}\n",
                        row.sigma_tau / g,
                        row.delta * g,
                        row.rmse_nn * g,
                        row.rmse_bayes * g
                    ));
                }
            } else if let Some(list) = sigma_y_list {
                let sigmas: Vec<f64> = parse_list(&list)?.iter().map(|s| s / g).collect();
                for row in target_noise_sweep(&sigmas, &deltas, &scale, common.seed)? {
                    text.push_str(&format!(
                        "target,{},{},{},{}\n",
                        row.sigma_y * g,
                        row.delta * g,
                        row.rmse_nn * g,
                        row.rmse_bayes * g
                    ));
                }
            } else {
                return Err(Error::InvalidConfig(
                    "provide --sigma-tau-list or --sigma-y-list".into(),
                ));
            }
            std::fs::write(&out, text)?;
            write_sidecar(
                &out,
                serde_json::json!({
                    "command": "noise-sweep",
                    "version": env!("CARGO_PKG_VERSION"),
                    "seed": common.seed,
                    "gamma_units": g,
                    "train_records": train_records, "epochs": epochs,
                    "batch": batch, "per_point": per_point,
                }),
            )
        }
    }
}

/// Dataset with every record at the same truth (degenerate box).
fn fixed_point_dataset(
    delta: f64,
    omega: f64,
    count: usize,
    n_clicks: usize,
    noise: NoiseConfig,
    seed: u64,
) -> Result<Dataset> {
    use photonest::physics::SystemParams;
    use photonest::sim::{DelayRecord, DelaySampler};
    let truth = SystemParams::unit_gamma(delta, omega)?;
    let sampler = DelaySampler::new(&truth)?;
    let records: Vec<DelayRecord> = (0..count)
        .map(|i| {
            let mut rng = child_rng(seed, i as u64);
            let mut delays: Vec<f64> = (0..n_clicks).map(|_| sampler.sample(&mut rng)).collect();
            if noise.sigma_tau > 0.0 {
                use rand_distr::{Distribution, Normal};
                let normal = Normal::new(0.0, noise.sigma_tau).expect("validated");
                for t in &mut delays {
                    *t += normal.sample(&mut rng);
                    if noise.clip_negative_delays && *t < 0.0 {
                        *t = 0.0;
                    }
                }
            }
            Ok(DelayRecord { delays, truth: Some(truth) })
        })
        .collect::<Result<_>>()?;
    Ok(Dataset {
        records,
        meta: DatasetMeta {
            n_clicks,
            bounds: ParameterBox::OneD { delta: (delta, delta.max(1e-12)), omega },
            count,
            seed,
            generator: GeneratorKind::Iid,
            noise,
        },
    })
}

fn euler_dataset(
    delta_r: (f64, f64),
    omega_r: (f64, f64),
    count: usize,
    n_clicks: usize,
    dt: f64,
    noise: NoiseConfig,
    seed: u64,
) -> Result<Dataset> {
    use photonest::physics::SystemParams;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};
    let records = (0..count)
        .map(|i| {
            let mut rng = child_rng(seed, i as u64);
            let delta = delta_r.0 + (delta_r.1 - delta_r.0) * rng.random::<f64>();
            let omega = omega_r.0 + (omega_r.1 - omega_r.0) * rng.random::<f64>();
            let truth = SystemParams::unit_gamma(delta, omega)?;
            let mut rec =
                simulate_trajectory_euler(&truth, n_clicks, dt, DEFAULT_STEP_CAP, &mut rng)?;
            if noise.sigma_tau > 0.0 {
                let normal = Normal::new(0.0, noise.sigma_tau).expect("validated");
                for t in &mut rec.delays {
                    *t += normal.sample(&mut rng);
                    if noise.clip_negative_delays && *t < 0.0 {
                        *t = 0.0;
                    }
                }
            }
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    let bounds = if omega_r.0 == omega_r.1 {
        ParameterBox::OneD {
            delta: (delta_r.0, delta_r.1.max(delta_r.0 + 1e-12)),
            omega: omega_r.0,
        }
    } else {
        ParameterBox::TwoD { delta: delta_r, omega: omega_r }
    };
    Ok(Dataset {
        records,
        meta: DatasetMeta {
            n_clicks,
            bounds,
            count,
            seed,
            generator: GeneratorKind::Euler,
            noise,
        },
    })
}

fn parse_estimators(text: &str) -> Result<Vec<EstimatorKind>> {
    text.split(',')
        .map(|s| match s.trim() {
            "bayes" | "bayes-mean" => Ok(EstimatorKind::BayesMean),
            "bayes-map" => Ok(EstimatorKind::BayesMap),
            "classical" | "classical-mean" => Ok(EstimatorKind::ClassicalMean),
            "nn" => Ok(EstimatorKind::Nn),
            other => Err(Error::InvalidConfig(format!("unknown estimator {other:?}"))),
        })
        .collect()
}

fn infer_dataset(
    ds: &Dataset,
    model_path: &Option<PathBuf>,
    bayes: Option<Arch>,
    classical: bool,
    map: bool,
    n_grid: usize,
) -> Result<Vec<photonest::bayes::Estimate>> {
    if let Some(path) = model_path {
        let model = HistDenseModel::load(path)?;
        return ds.records.iter().map(|r| model.forward(r)).collect();
    }
    if classical {
        return ds
            .records
            .iter()
            .map(|r| {
                let post = classical_posterior(r, (0.0, 5.0), n_grid, fixed_omega(ds)?)?;
                Ok(photonest::bayes::Estimate {
                    values: post.mean(),
                    method: EstimatorKind::ClassicalMean,
                })
            })
            .collect();
    }
    match bayes {
        Some(Arch::OneD) => ds
            .records
            .iter()
            .map(|r| {
                let post = posterior_1d(r, (0.0, 5.0), n_grid, fixed_omega(ds)?)?;
                Ok(photonest::bayes::Estimate {
                    values: if map { post.map_point() } else { post.mean() },
                    method: if map { EstimatorKind::BayesMap } else { EstimatorKind::BayesMean },
                })
            })
            .collect(),
        Some(Arch::TwoD) => ds
            .records
            .iter()
            .map(|r| {
                let post = posterior_2d(r, (0.0, 3.0), (0.25, 5.0), (n_grid.min(400), n_grid.min(400)))?;
                Ok(photonest::bayes::Estimate {
                    values: if map { post.map_point() } else { post.mean() },
                    method: if map { EstimatorKind::BayesMap } else { EstimatorKind::BayesMean },
                })
            })
            .collect(),
        None => Err(Error::InvalidConfig(
            "choose one of --model, --bayes or --classical".into(),
        )),
    }
}

fn fixed_omega(ds: &Dataset) -> Result<f64> {
    match ds.meta.bounds {
        ParameterBox::OneD { omega, .. } => Ok(omega),
        ParameterBox::TwoD { .. } => Err(Error::InvalidConfig(
            "1D estimators need a dataset with a fixed Rabi frequency".into(),
        )),
    }
}

fn write_infer_csv(
    out: &Path,
    ds: &Dataset,
    estimates: &[photonest::bayes::Estimate],
    g: f64,
) -> Result<()> {
    use std::fmt::Write as _;
    let two_d = estimates.first().map(|e| e.values.len() == 2).unwrap_or(false);
    let mut text = String::new();
    if two_d {
        text.push_str("record,delta_true,omega_true,delta_hat,omega_hat,estimator\n");
    } else {
        text.push_str("record,delta_true,delta_hat,estimator\n");
    }
    for (i, (rec, est)) in ds.records.iter().zip(estimates).enumerate() {
        let truth = rec.truth.expect("persisted records carry truth");
        if two_d {
            let _ = writeln!(
                text,
                "{i},{},{},{},{},{}",
                truth.delta * g,
                truth.omega * g,
                est.values[0] * g,
                est.values[1] * g,
                est.method.tag()
            );
        } else {
            let _ = writeln!(
                text,
                "{i},{},{},{}",
                truth.delta * g,
                est.values[0] * g,
                est.method.tag()
            );
        }
    }
    std::fs::write(out, text)?;
    Ok(())
}

fn write_bench_csv(
    out: &Path,
    outcomes: &[photonest::validate::ValidationOutcome],
    g: f64,
) -> Result<()> {
    use std::fmt::Write as _;
    let mut text = String::new();
    let two_d = outcomes.first().map(|o| o.table.two_d).unwrap_or(false);
    if two_d {
        text.push_str(
            "delta,omega,rmse,rmse_delta,rmse_omega,bias_delta,bias_omega,n_samples,estimator\n",
        );
    } else {
        text.push_str("delta,omega,rmse,bias,n_samples,estimator\n");
    }
    for o in outcomes {
        for r in &o.table.rows {
            if two_d {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{},{},{}",
                    r.delta * g,
                    r.omega * g,
                    r.rmse * g,
                    r.rmse_axes[0] * g,
                    r.rmse_axes[1] * g,
                    r.bias_axes[0] * g,
                    r.bias_axes[1] * g,
                    r.n_samples,
                    o.estimator.tag()
                );
            } else {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    r.delta * g,
                    r.omega * g,
                    r.rmse * g,
                    r.bias_axes[0] * g,
                    r.n_samples,
                    o.estimator.tag()
                );
            }
        }
    }
    std::fs::write(out, text)?;
    Ok(())
}
