//! Photon-counting data generation: fast i.i.d. sampling, Euler-integrated
//! quantum trajectories, measurement noise and dataset persistence.
//!
//! Record generation is embarrassingly parallel under the seeding contract
//! of [`crate::seed`]: every record draws from its own child generator, so
//! parallel and serial generation produce bitwise-identical datasets.

mod euler;
mod io;
mod sampler;

pub use euler::{
    simulate_trajectory_euler, WavefunctionState, DEFAULT_EULER_DT, DEFAULT_STEP_CAP,
};
pub use sampler::{sample_delay, DelaySampler, DEFAULT_KNOTS, DEFAULT_TAU_MAX};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::SystemParams;
use crate::seed::child_rng;

/// One trajectory's data: the ordered inter-detection delays, with the
/// ground-truth parameters attached when the record was simulated.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayRecord {
    pub delays: Vec<f64>,
    pub truth: Option<SystemParams>,
}

impl DelayRecord {
    pub fn mean_delay(&self) -> f64 {
        if self.delays.is_empty() {
            return 0.0;
        }
        self.delays.iter().sum::<f64>() / self.delays.len() as f64
    }
}

/// Measurement/calibration noise settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Jitter: per-delay Gaussian noise standard deviation (0 disables).
    pub sigma_tau: f64,
    /// Training-target noise standard deviation (0 disables).
    pub sigma_y: f64,
    /// Clip negative jittered delays to zero.
    pub clip_negative_delays: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { sigma_tau: 0.0, sigma_y: 0.0, clip_negative_delays: true }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigma_tau < 0.0 || self.sigma_y < 0.0 {
            return Err(Error::Domain("noise deviations must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Sampling box for the unknown parameters (gamma fixed to 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ParameterBox {
    /// Detuning estimation with a fixed Rabi frequency.
    OneD { delta: (f64, f64), omega: f64 },
    /// Joint detuning/Rabi estimation.
    TwoD { delta: (f64, f64), omega: (f64, f64) },
}

impl ParameterBox {
    /// Standard 1D training box: `delta` uniform on `[0, 5]`, `omega = 1`.
    pub fn standard_1d() -> Self {
        ParameterBox::OneD { delta: (0.0, 5.0), omega: 1.0 }
    }

    /// Standard 2D training box: `delta` on `[0, 3]`, `omega` on `[0.25, 5]`.
    pub fn standard_2d() -> Self {
        ParameterBox::TwoD { delta: (0.0, 3.0), omega: (0.25, 5.0) }
    }

    pub fn n_params(&self) -> usize {
        match self {
            ParameterBox::OneD { .. } => 1,
            ParameterBox::TwoD { .. } => 2,
        }
    }

    /// Per-axis support intervals (the clamping box for estimators).
    pub fn support(&self) -> Vec<(f64, f64)> {
        match self {
            ParameterBox::OneD { delta, .. } => vec![*delta],
            ParameterBox::TwoD { delta, omega } => vec![*delta, *omega],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidRange(msg));
        match self {
            ParameterBox::OneD { delta: (lo, hi), omega } => {
                if !(*lo >= 0.0 && lo < hi && *hi <= 5.0) {
                    return bad(format!("1D delta range must satisfy 0 <= lo < hi <= 5, got [{lo}, {hi}]"));
                }
                if !(*omega > 0.0) {
                    return bad(format!("fixed omega must be positive, got {omega}"));
                }
            }
            ParameterBox::TwoD { delta: (dlo, dhi), omega: (olo, ohi) } => {
                if !(*dlo >= 0.0 && dlo < dhi && *dhi <= 3.0) {
                    return bad(format!("2D delta range must satisfy 0 <= lo < hi <= 3, got [{dlo}, {dhi}]"));
                }
                if !(*olo >= 0.25 && olo < ohi && *ohi <= 5.0) {
                    return bad(format!("2D omega range must satisfy 0.25 <= lo < hi <= 5, got [{olo}, {ohi}]"));
                }
            }
        }
        Ok(())
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> SystemParams {
        let uniform = |lo: f64, hi: f64, rng: &mut R| lo + (hi - lo) * rng.random::<f64>();
        match self {
            ParameterBox::OneD { delta: (lo, hi), omega } => SystemParams {
                delta: uniform(*lo, *hi, rng),
                omega: *omega,
                gamma: 1.0,
            },
            ParameterBox::TwoD { delta: (dlo, dhi), omega: (olo, ohi) } => {
                let delta = uniform(*dlo, *dhi, rng);
                let omega = uniform(*olo, *ohi, rng);
                SystemParams { delta, omega, gamma: 1.0 }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    Iid,
    Euler,
}

/// Self-describing dataset metadata, persisted in the binary header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n_clicks: usize,
    pub bounds: ParameterBox,
    pub count: usize,
    pub seed: u64,
    pub generator: GeneratorKind,
    pub noise: NoiseConfig,
}

/// A collection of delay records plus the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<DelayRecord>,
    pub meta: DatasetMeta,
}

/// Generate one record: delays first, then jitter, all from `rng`.
///
/// The draw order is part of the determinism contract: with `sigma_tau = 0`
/// the delay draws are untouched, so disabling noise reproduces the
/// noiseless records bitwise under the same seed.
pub(crate) fn generate_record<R: Rng + ?Sized>(
    sampler: &DelaySampler,
    n_clicks: usize,
    noise: &NoiseConfig,
    rng: &mut R,
) -> DelayRecord {
    let mut delays: Vec<f64> = (0..n_clicks).map(|_| sampler.sample(rng)).collect();
    if noise.sigma_tau > 0.0 {
        let normal = Normal::new(0.0, noise.sigma_tau).expect("validated sigma");
        for t in &mut delays {
            *t += normal.sample(rng);
            if noise.clip_negative_delays && *t < 0.0 {
                *t = 0.0;
            }
        }
    }
    DelayRecord { delays, truth: Some(*sampler.params()) }
}

/// Generate `count` records with truths drawn uniformly over `bounds`,
/// using the fast i.i.d. sampler and the per-record seeding contract.
pub fn generate_dataset(
    bounds: ParameterBox,
    count: usize,
    n_clicks: usize,
    noise: NoiseConfig,
    seed: u64,
) -> Result<Dataset> {
    bounds.validate()?;
    noise.validate()?;
    if count == 0 {
        return Err(Error::InvalidRange("count must be at least 1".into()));
    }
    if n_clicks == 0 {
        return Err(Error::InvalidRange("n_clicks must be at least 1".into()));
    }

    let records: Vec<DelayRecord> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = child_rng(seed, i as u64);
            let truth = bounds.draw(&mut rng);
            let sampler = DelaySampler::new(&truth).expect("box guarantees omega > 0");
            Ok(generate_record(&sampler, n_clicks, &noise, &mut rng))
        })
        .collect::<Result<_>>()?;

    Ok(Dataset {
        records,
        meta: DatasetMeta { n_clicks, bounds, count, seed, generator: GeneratorKind::Iid, noise },
    })
}
