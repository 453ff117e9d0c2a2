//! Grid posteriors and point estimators for quantum (delay-list) and
//! classical (mean-delay) photon-counting signals.
//!
//! Posteriors use a flat prior over the stated support, evaluated on a
//! uniform grid with max-stabilized exponentiation. Grid sums run in a fixed
//! index order so results are bitwise reproducible.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{classical_moments, wtd_raw, SystemParams};
use crate::sim::DelayRecord;

/// Discretized posterior over a 1D or 2D uniform parameter grid.
///
/// `axes[0]` is the detuning axis; a second axis, when present, is the Rabi
/// frequency. For two axes the masses are stored row-major as
/// `masses[i * axes[1].len() + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorGrid {
    pub axes: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    /// Log of the flat-prior marginal likelihood, up to the grid measure.
    pub log_evidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    BayesMean,
    BayesMap,
    ClassicalMean,
    Nn,
}

impl EstimatorKind {
    pub fn tag(&self) -> &'static str {
        match self {
            EstimatorKind::BayesMean => "bayes-mean",
            EstimatorKind::BayesMap => "bayes-map",
            EstimatorKind::ClassicalMean => "classical-mean",
            EstimatorKind::Nn => "nn",
        }
    }
}

/// A point estimate of the unknown parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub values: Vec<f64>,
    pub method: EstimatorKind,
}

/// Joint log-likelihood of a delay record: the sum of per-delay log
/// densities. Returns `-inf` when any delay is impossible under `params`
/// (for instance a jitter-clipped zero delay), signalling zero posterior
/// mass rather than an error.
pub fn log_likelihood(record: &DelayRecord, params: &SystemParams) -> f64 {
    log_likelihood_raw(&record.delays, params.delta, params.omega, params.gamma)
}

pub(crate) fn log_likelihood_raw(delays: &[f64], delta: f64, omega: f64, gamma: f64) -> f64 {
    let mut acc = 0.0;
    for &tau in delays {
        let w = wtd_raw(tau, delta, omega, gamma);
        if w <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += w.ln();
    }
    acc
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| lo + k as f64 * step).collect()
}

/// Max-stabilized normalization of log weights into probability masses.
fn normalize_log_weights(logw: Vec<f64>) -> Result<(Vec<f64>, f64)> {
    let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::AllImpossible);
    }
    let mut masses: Vec<f64> = logw.into_iter().map(|l| (l - max).exp()).collect();
    let total: f64 = masses.iter().sum();
    for m in &mut masses {
        *m /= total;
    }
    Ok((masses, max + total.ln()))
}

fn check_support(name: &str, lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::DegenerateSupport(format!("{name} range [{lo}, {hi}]")));
    }
    if lo < 0.0 {
        return Err(Error::DegenerateSupport(format!(
            "{name} support must be nonnegative, got lo = {lo}"
        )));
    }
    Ok(())
}

/// Posterior over the detuning for a fixed Rabi frequency.
pub fn posterior_1d(
    record: &DelayRecord,
    support: (f64, f64),
    n_grid: usize,
    fixed_omega: f64,
) -> Result<PosteriorGrid> {
    check_support("delta", support.0, support.1)?;
    if n_grid < 2 {
        return Err(Error::DegenerateSupport(format!("n_grid = {n_grid}")));
    }
    let axis = linspace(support.0, support.1, n_grid);
    let logw: Vec<f64> = axis
        .iter()
        .map(|&d| log_likelihood_raw(&record.delays, d, fixed_omega, 1.0))
        .collect();
    let (masses, log_sum) = normalize_log_weights(logw)?;
    let cell = (support.1 - support.0) / (n_grid - 1) as f64;
    Ok(PosteriorGrid { axes: vec![axis], masses, log_evidence: log_sum + cell.ln() })
}

/// Joint posterior over detuning and Rabi frequency.
pub fn posterior_2d(
    record: &DelayRecord,
    delta_range: (f64, f64),
    omega_range: (f64, f64),
    n_grid: (usize, usize),
) -> Result<PosteriorGrid> {
    check_support("delta", delta_range.0, delta_range.1)?;
    check_support("omega", omega_range.0, omega_range.1)?;
    if omega_range.0 <= 0.0 {
        return Err(Error::DegenerateSupport(
            "omega support must be strictly positive".into(),
        ));
    }
    if n_grid.0 < 2 || n_grid.1 < 2 {
        return Err(Error::DegenerateSupport(format!("n_grid = {n_grid:?}")));
    }
    let deltas = linspace(delta_range.0, delta_range.1, n_grid.0);
    let omegas = linspace(omega_range.0, omega_range.1, n_grid.1);
    let mut logw = Vec::with_capacity(n_grid.0 * n_grid.1);
    for &d in &deltas {
        for &o in &omegas {
            logw.push(log_likelihood_raw(&record.delays, d, o, 1.0));
        }
    }
    let (masses, log_sum) = normalize_log_weights(logw)?;
    let cell_d = (delta_range.1 - delta_range.0) / (n_grid.0 - 1) as f64;
    let cell_o = (omega_range.1 - omega_range.0) / (n_grid.1 - 1) as f64;
    Ok(PosteriorGrid {
        axes: vec![deltas, omegas],
        masses,
        log_evidence: log_sum + (cell_d * cell_o).ln(),
    })
}

/// Posterior over the detuning from the classical signal: the record is
/// reduced to its mean delay, whose likelihood is the Gaussian sampling
/// distribution of the sample mean.
pub fn classical_posterior(
    record: &DelayRecord,
    support: (f64, f64),
    n_grid: usize,
    fixed_omega: f64,
) -> Result<PosteriorGrid> {
    check_support("delta", support.0, support.1)?;
    if n_grid < 2 {
        return Err(Error::DegenerateSupport(format!("n_grid = {n_grid}")));
    }
    let axis = linspace(support.0, support.1, n_grid);
    let cell = (support.1 - support.0) / (n_grid - 1) as f64;
    let n = record.delays.len();
    if n == 0 {
        // No data: the posterior is the prior.
        let masses = vec![1.0 / n_grid as f64; n_grid];
        return Ok(PosteriorGrid { axes: vec![axis], masses, log_evidence: cell.ln() });
    }
    let tau_bar = record.mean_delay();
    let logw: Vec<f64> = axis
        .iter()
        .map(|&d| {
            let params = SystemParams { delta: d, omega: fixed_omega, gamma: 1.0 };
            let m = classical_moments(&params, n).expect("omega > 0 on the grid");
            let z = (tau_bar - m.mu) / m.sigma;
            -0.5 * z * z - m.sigma.ln()
        })
        .collect();
    let (masses, log_sum) = normalize_log_weights(logw)?;
    Ok(PosteriorGrid { axes: vec![axis], masses, log_evidence: log_sum + cell.ln() })
}

/// Posterior-mean point estimator (per axis).
pub fn estimate_mean(grid: &PosteriorGrid) -> Estimate {
    Estimate { values: grid.mean(), method: EstimatorKind::BayesMean }
}

/// Maximum a posteriori estimator; ties break toward the smaller parameter.
pub fn estimate_map(grid: &PosteriorGrid) -> Estimate {
    Estimate { values: grid.map_point(), method: EstimatorKind::BayesMap }
}

impl PosteriorGrid {
    pub fn n_axes(&self) -> usize {
        self.axes.len()
    }

    /// Marginal mean along every axis.
    pub fn mean(&self) -> Vec<f64> {
        match self.axes.len() {
            1 => {
                let m = self
                    .axes[0]
                    .iter()
                    .zip(&self.masses)
                    .map(|(&t, &m)| t * m)
                    .sum();
                vec![m]
            }
            2 => {
                let n1 = self.axes[1].len();
                let mut md = 0.0;
                let mut mo = 0.0;
                for (idx, &m) in self.masses.iter().enumerate() {
                    md += self.axes[0][idx / n1] * m;
                    mo += self.axes[1][idx % n1] * m;
                }
                vec![md, mo]
            }
            _ => unreachable!("posteriors are 1D or 2D"),
        }
    }

    /// Marginal variance along every axis.
    pub fn variance(&self) -> Vec<f64> {
        let mean = self.mean();
        match self.axes.len() {
            1 => {
                let v = self
                    .axes[0]
                    .iter()
                    .zip(&self.masses)
                    .map(|(&t, &m)| (t - mean[0]).powi(2) * m)
                    .sum();
                vec![v]
            }
            2 => {
                let n1 = self.axes[1].len();
                let mut vd = 0.0;
                let mut vo = 0.0;
                for (idx, &m) in self.masses.iter().enumerate() {
                    vd += (self.axes[0][idx / n1] - mean[0]).powi(2) * m;
                    vo += (self.axes[1][idx % n1] - mean[1]).powi(2) * m;
                }
                vec![vd, vo]
            }
            _ => unreachable!(),
        }
    }

    /// Grid point of maximal mass; the scan order breaks ties toward the
    /// smaller parameter values.
    pub fn map_point(&self) -> Vec<f64> {
        let mut best = 0;
        for (idx, &m) in self.masses.iter().enumerate() {
            if m > self.masses[best] {
                best = idx;
            }
        }
        match self.axes.len() {
            1 => vec![self.axes[0][best]],
            2 => {
                let n1 = self.axes[1].len();
                vec![self.axes[0][best / n1], self.axes[1][best % n1]]
            }
            _ => unreachable!(),
        }
    }

    /// Marginalize a 2D posterior onto one axis.
    pub fn marginal(&self, axis: usize) -> Result<Vec<f64>> {
        if self.axes.len() != 2 || axis > 1 {
            return Err(Error::ShapeMismatch(
                "marginalization applies to a 2D posterior".into(),
            ));
        }
        let n1 = self.axes[1].len();
        let n0 = self.axes[0].len();
        let mut out = vec![0.0; self.axes[axis].len()];
        for i in 0..n0 {
            for j in 0..n1 {
                let m = self.masses[i * n1 + j];
                out[if axis == 0 { i } else { j }] += m;
            }
        }
        Ok(out)
    }

    /// CSV export: `delta[,omega],mass` with a header row.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        match self.axes.len() {
            1 => {
                writeln!(out, "delta,mass")?;
                for (t, m) in self.axes[0].iter().zip(&self.masses) {
                    writeln!(out, "{t},{m}")?;
                }
            }
            2 => {
                writeln!(out, "delta,omega,mass")?;
                let n1 = self.axes[1].len();
                for (idx, m) in self.masses.iter().enumerate() {
                    writeln!(out, "{},{},{m}", self.axes[0][idx / n1], self.axes[1][idx % n1])?;
                }
            }
            _ => unreachable!(),
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::waiting_time_density;
    use crate::seed::child_rng;
    use crate::sim::{generate_record, DelaySampler, NoiseConfig};
    use approx::assert_abs_diff_eq;

    fn p(delta: f64, omega: f64) -> SystemParams {
        SystemParams::unit_gamma(delta, omega).unwrap()
    }

    fn record(delays: &[f64]) -> DelayRecord {
        DelayRecord { delays: delays.to_vec(), truth: None }
    }

    #[test]
    fn single_delay_log_likelihood_matches_density() {
        let params = p(0.0, 1.0);
        let ll = log_likelihood(&record(&[2.0]), &params);
        let w = waiting_time_density(2.0, &params).unwrap();
        assert_abs_diff_eq!(ll, w.ln(), epsilon = 1e-14);
        // Frozen from the analytic reduction at tau = 2/gamma.
        assert_abs_diff_eq!(ll, -1.072286133255622, epsilon = 1e-12);
    }

    #[test]
    fn zero_delay_is_impossible() {
        let params = p(0.8, 1.0);
        assert_eq!(log_likelihood(&record(&[1.0, 0.0, 2.0]), &params), f64::NEG_INFINITY);
    }

    #[test]
    fn log_likelihood_is_additive() {
        let params = p(1.3, 0.9);
        let mut rng = child_rng(5, 0);
        let sampler = DelaySampler::new(&params).unwrap();
        let rec = generate_record(&sampler, 48, &NoiseConfig::default(), &mut rng);
        let total = log_likelihood(&rec, &params);
        let sum: f64 = rec
            .delays
            .iter()
            .map(|&t| log_likelihood(&record(&[t]), &params))
            .sum();
        assert_abs_diff_eq!(total, sum, epsilon = 1e-12);
    }

    #[test]
    fn empty_record_gives_uniform_posterior() {
        let post = posterior_1d(&record(&[]), (0.0, 5.0), 200, 1.0).unwrap();
        for &m in &post.masses {
            assert_abs_diff_eq!(m, 1.0 / 200.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(post.mean()[0], 2.5, epsilon = 1e-12);
        let post2 = posterior_2d(&record(&[]), (0.0, 3.0), (0.25, 5.0), (50, 40)).unwrap();
        for &m in &post2.masses {
            assert_abs_diff_eq!(m, 1.0 / 2000.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn masses_sum_to_one() {
        let params = p(0.8, 1.0);
        let sampler = DelaySampler::new(&params).unwrap();
        let mut rng = child_rng(21, 0);
        let rec = generate_record(&sampler, 48, &NoiseConfig::default(), &mut rng);
        for post in [
            posterior_1d(&rec, (0.0, 5.0), 777, 1.0).unwrap(),
            classical_posterior(&rec, (0.0, 5.0), 777, 1.0).unwrap(),
        ] {
            let total: f64 = post.masses.iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn posterior_concentrates_near_truth() {
        // Posterior-mean RMSE at this point is ~0.186, so |error| < 0.3 is a
        // ~1.6 sigma event: the measured coverage is 893/1000 (the spec's
        // sketched 95% would require saturating the unbiased CRB exactly).
        let truth = p(0.8, 1.0);
        let sampler = DelaySampler::new(&truth).unwrap();
        let mut hits = 0;
        let reps = 1000;
        for i in 0..reps {
            let mut rng = child_rng(1000, i);
            let rec = generate_record(&sampler, 48, &NoiseConfig::default(), &mut rng);
            let post = posterior_1d(&rec, (0.0, 5.0), 1000, 1.0).unwrap();
            if (post.mean()[0] - 0.8).abs() < 0.3 {
                hits += 1;
            }
        }
        assert!(hits >= 870, "only {hits}/{reps} runs within 0.3 of truth");
    }

    #[test]
    fn posterior_2d_concentrates_near_truth() {
        // Measured coverage 343/400 within (0.4, 0.4) of the truth.
        let truth = p(0.8, 1.2);
        let sampler = DelaySampler::new(&truth).unwrap();
        let mut hits = 0;
        let reps = 400;
        for i in 0..reps {
            let mut rng = child_rng(2000, i);
            let rec = generate_record(&sampler, 48, &NoiseConfig::default(), &mut rng);
            let post = posterior_2d(&rec, (0.0, 3.0), (0.25, 5.0), (150, 150)).unwrap();
            let m = post.mean();
            if (m[0] - 0.8).abs() < 0.4 && (m[1] - 1.2).abs() < 0.4 {
                hits += 1;
            }
        }
        assert!(hits >= 330, "only {hits}/{reps} runs within (0.4, 0.4) of truth");
    }

    #[test]
    fn thin_omega_slab_marginal_converges_to_1d() {
        // Marginalizing over a thin Rabi slab reproduces the fixed-omega
        // posterior as the slab shrinks; at half-width 0.01 the residual
        // likelihood variation across the slab leaves a ~2% peak-relative
        // deviation, falling quadratically with the width.
        let truth = p(0.8, 1.0);
        let sampler = DelaySampler::new(&truth).unwrap();
        let mut rng = child_rng(3000, 0);
        let rec = generate_record(&sampler, 48, &NoiseConfig::default(), &mut rng);
        let n = 400;
        let post1 = posterior_1d(&rec, (0.0, 3.0), n, 1.0).unwrap();
        let peak = post1.masses.iter().cloned().fold(0.0, f64::max);
        let deviation = |eps: f64| {
            let post2 =
                posterior_2d(&rec, (0.0, 3.0), (1.0 - eps, 1.0 + eps), (n, 21)).unwrap();
            post2
                .marginal(0)
                .unwrap()
                .iter()
                .zip(&post1.masses)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / peak
        };
        let coarse = deviation(0.01);
        let fine = deviation(0.002);
        assert!(coarse < 0.025, "deviation {coarse} at eps = 0.01");
        assert!(fine < 0.0025, "deviation {fine} at eps = 0.002");
        assert!(fine < 0.2 * coarse, "no convergence: {coarse} -> {fine}");
    }

    #[test]
    fn mean_and_map_on_synthetic_posteriors() {
        // Two equal spikes: mean halfway, MAP at the smaller detuning.
        let axis = linspace(0.0, 5.0, 501);
        let mut masses = vec![0.0; 501];
        masses[100] = 0.5; // delta = 1
        masses[200] = 0.5; // delta = 2
        let grid = PosteriorGrid { axes: vec![axis], masses, log_evidence: 0.0 };
        assert_abs_diff_eq!(estimate_mean(&grid).values[0], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(estimate_map(&grid).values[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn classical_likelihood_peaks_near_matching_mean() {
        // tau_bar equal to mu(delta*): the posterior mass concentrates near
        // delta* up to the sigma(theta) prefactor variation.
        let delta_star = 1.2;
        let mu = classical_moments(&p(delta_star, 1.0), 48).unwrap().mu;
        let n = 48;
        let rec = record(&vec![mu; n]);
        let post = classical_posterior(&rec, (0.0, 5.0), 2001, 1.0).unwrap();
        let map = post.map_point()[0];
        assert!((map - delta_star).abs() < 0.1, "MAP {map} vs {delta_star}");
    }

    #[test]
    fn max_stabilization_shift_invariance() {
        let logw: Vec<f64> = (0..50).map(|k| -0.1 * k as f64).collect();
        let (m0, _) = normalize_log_weights(logw.clone()).unwrap();
        let shifted: Vec<f64> = logw.iter().map(|l| l + 1234.5).collect();
        let (m1, _) = normalize_log_weights(shifted).unwrap();
        for (a, b) in m0.iter().zip(&m1) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn grid_refinement_is_stable() {
        let truth = p(0.9, 1.0);
        let sampler = DelaySampler::new(&truth).unwrap();
        let mut rng = child_rng(4000, 0);
        let rec = generate_record(&sampler, 48, &NoiseConfig::default(), &mut rng);
        let coarse = posterior_1d(&rec, (0.0, 5.0), 1000, 1.0).unwrap().mean()[0];
        let fine = posterior_1d(&rec, (0.0, 5.0), 2000, 1.0).unwrap().mean()[0];
        assert!((coarse - fine).abs() < 0.005 * 5.0, "coarse {coarse} fine {fine}");
    }

    #[test]
    fn classical_posterior_variance_approaches_sigma_scaling() {
        // At large N the posterior variance approaches the linearized
        // prediction Var[tau] / (N mu'(delta)^2); the skew of mu(delta)
        // inflates it at small N (measured ratios 1.27 at N=48, 1.05 at 192).
        let delta_star = 0.8;
        let mu_bar = classical_moments(&p(delta_star, 1.0), 48).unwrap().mu;
        let var_click = 8.1321; // Var[tau] at (0.8, 1), verified by quadrature
        let mu_prime = 2.0 * delta_star;
        let ratio = |n: usize| {
            let rec = record(&vec![mu_bar; n]);
            let v = classical_posterior(&rec, (0.0, 5.0), 4001, 1.0).unwrap().variance()[0];
            v / (var_click / (n as f64 * mu_prime * mu_prime))
        };
        let r48 = ratio(48);
        let r192 = ratio(192);
        assert!((r192 - 1.0).abs() < 0.08, "ratio at N=192 is {r192}");
        assert!((r192 - 1.0).abs() < (r48 - 1.0).abs(), "{r48} -> {r192}");
    }

    #[test]
    fn impossible_record_reports_all_impossible() {
        let rec = record(&[0.0; 48]);
        assert!(matches!(
            posterior_1d(&rec, (0.0, 5.0), 200, 1.0),
            Err(Error::AllImpossible)
        ));
    }

    #[test]
    fn degenerate_supports_are_rejected() {
        let rec = record(&[1.0]);
        assert!(posterior_1d(&rec, (2.0, 2.0), 100, 1.0).is_err());
        assert!(posterior_1d(&rec, (3.0, 1.0), 100, 1.0).is_err());
        assert!(posterior_2d(&rec, (0.0, 3.0), (1.0, 1.0), (100, 100)).is_err());
        assert!(classical_posterior(&rec, (-1.0, 2.0), 100, 1.0).is_err());
    }

    #[test]
    fn identifiability_posterior_even_in_internal_detuning() {
        // Internal evaluation at -delta equals +delta.
        for tau in [0.4, 1.1, 3.3] {
            let a = log_likelihood_raw(&[tau], 0.7, 1.0, 1.0);
            let b = log_likelihood_raw(&[tau], -0.7, 1.0, 1.0);
            assert_eq!(a, b);
        }
    }
}
