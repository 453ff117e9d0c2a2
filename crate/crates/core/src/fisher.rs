//! Fisher information, quantum Fisher information and biased Cramér-Rao
//! RMSE bounds for detuning estimation from photon-counting records.
//!
//! The per-trajectory Fisher information uses the independence of the
//! delays: `F_N = N * int w (d ln w / d delta)^2 dtau`, with the parameter
//! derivative taken by central finite differences. The quantum Fisher
//! information comes from the parameter curvature of the leading eigenvalue
//! of the generalized Liouvillian.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;

use crate::bayes::log_likelihood_raw;
use crate::error::{Error, Result};
use crate::physics::liouvillian::{eigenvalues4, liouvillian_raw};
use crate::physics::{classical_moments, tail_decay_rate, wtd_raw, SystemParams};
use crate::quad::adaptive_simpson;
use crate::sim::DelaySampler;

/// Default finite-difference step for detuning derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-3;
/// Default stencil half-width for the QFI mixed derivative.
pub const DEFAULT_QFI_STEP: f64 = 1e-3;

fn check_fd_step(d_theta: f64, gamma: f64) -> Result<()> {
    if !(d_theta >= 1e-5 * gamma && d_theta <= 1e-2 * gamma) {
        return Err(Error::Domain(format!(
            "finite-difference step {d_theta} outside [1e-5, 1e-2] gamma"
        )));
    }
    Ok(())
}

/// Fisher information about the detuning carried by one trajectory of
/// `n_clicks` delays, by adaptive quadrature of the per-click integral.
pub fn fisher_per_trajectory(
    params: &SystemParams,
    n_clicks: usize,
    d_theta: f64,
) -> Result<f64> {
    if params.omega <= 0.0 {
        return Err(Error::Domain("omega must be positive".into()));
    }
    check_fd_step(d_theta, params.gamma)?;
    let (d, o, g) = (params.delta, params.omega, params.gamma);
    let integrand = move |tau: f64| {
        let w = wtd_raw(tau, d, o, g);
        let wp = wtd_raw(tau, d + d_theta, o, g);
        let wm = wtd_raw(tau, d - d_theta, o, g);
        if w <= 0.0 || wp <= 0.0 || wm <= 0.0 {
            return 0.0;
        }
        let dlnw = (wp.ln() - wm.ln()) / (2.0 * d_theta);
        w * dlnw * dlnw
    };
    // Integrate far enough into the exponential tail to be exhaustive.
    let cutoff = (46.0 / tail_decay_rate(d, o, g)).min(2.0e5);
    let per_click = adaptive_simpson(&integrand, 0.0, cutoff, 1e-10)?;
    Ok(n_clicks as f64 * per_click)
}

/// Monte Carlo estimate of the same Fisher information from sampled
/// trajectories: the mean of the squared score.
pub fn fisher_sampled<R: Rng + ?Sized>(
    params: &SystemParams,
    n_traj: usize,
    n_clicks: usize,
    d_theta: f64,
    rng: &mut R,
) -> Result<f64> {
    if n_traj < 100 {
        return Err(Error::InsufficientSamples(format!(
            "need at least 100 trajectories, got {n_traj}"
        )));
    }
    check_fd_step(d_theta, params.gamma)?;
    let sampler = DelaySampler::new(params)?;
    let (d, o, g) = (params.delta, params.omega, params.gamma);
    let mut acc = 0.0;
    let mut delays = vec![0.0; n_clicks];
    for _ in 0..n_traj {
        for t in &mut delays {
            *t = sampler.sample(rng);
        }
        let lp = log_likelihood_raw(&delays, d + d_theta, o, g);
        let lm = log_likelihood_raw(&delays, d - d_theta, o, g);
        let score = (lp - lm) / (2.0 * d_theta);
        acc += score * score;
    }
    Ok(acc / n_traj as f64)
}

/// Quantum Fisher information for the detuning over one trajectory of
/// `n_clicks` clicks (average duration `T = n_clicks / (gamma <n>_ss)`).
///
/// Evaluates `4 T d^2/d theta1 d theta2 Re lambda_s` on a 2x2 stencil, where
/// `lambda_s` is the eigenvalue of the generalized Liouvillian continuously
/// connected to the zero mode, selected as the eigenvalue of maximal real
/// part. Selection is refused when the two leading real parts are closer
/// than 1e-8.
pub fn qfi(params: &SystemParams, n_clicks: usize, h: f64) -> Result<f64> {
    if !(h >= 1e-4 * params.gamma && h <= 1e-2 * params.gamma) {
        return Err(Error::Domain(format!(
            "stencil step {h} outside [1e-4, 1e-2] gamma"
        )));
    }
    if params.omega <= 0.0 {
        return Err(Error::Domain("omega must be positive".into()));
    }
    let d = params.delta;
    let lead = |d1: f64, d2: f64| -> Result<f64> {
        let m = liouvillian_raw(d1, d2, params.omega, params.omega, params.gamma);
        let eig = eigenvalues4(&m)?;
        let gap = eig[0].re - eig[1].re;
        if gap.abs() < 1e-8 {
            return Err(Error::EigenvalueTracking(format!(
                "leading eigenvalues separated by only {gap:.3e} at ({d1}, {d2})"
            )));
        }
        Ok(eig[0].re)
    };
    let pp = lead(d + h, d + h)?;
    let pm = lead(d + h, d - h)?;
    let mp = lead(d - h, d + h)?;
    let mm = lead(d - h, d - h)?;
    let mixed = (pp - pm - mp + mm) / (4.0 * h * h);
    let t_total = n_clicks as f64 * classical_moments(params, 1)?.mu;
    Ok(4.0 * t_total * mixed)
}

/// Empirical bias curve of an estimator over a truth grid.
#[derive(Debug, Clone)]
pub struct BiasCurve {
    pub grid: Vec<f64>,
    /// Mean of (estimate - truth) per grid point.
    pub bias: Vec<f64>,
    /// d bias / d theta from a 3-point moving average of the bias.
    pub slope: Vec<f64>,
}

/// Per-grid-point estimator bias and its smoothed derivative.
pub fn empirical_bias(grid: &[f64], estimates_per_point: &[Vec<f64>]) -> Result<BiasCurve> {
    if grid.len() != estimates_per_point.len() || grid.len() < 2 {
        return Err(Error::GridMismatch(format!(
            "{} grid points vs {} estimate groups",
            grid.len(),
            estimates_per_point.len()
        )));
    }
    for (k, ests) in estimates_per_point.iter().enumerate() {
        if ests.len() < 100 {
            return Err(Error::InsufficientSamples(format!(
                "grid point {k} has {} estimates, need at least 100",
                ests.len()
            )));
        }
    }
    let bias: Vec<f64> = grid
        .iter()
        .zip(estimates_per_point)
        .map(|(&truth, ests)| ests.iter().map(|e| e - truth).sum::<f64>() / ests.len() as f64)
        .collect();

    // Moving-average smoothing before differencing; raw Monte Carlo bias
    // curves are too noisy to difference directly. The shrunken edge windows
    // shift the effective abscissa, so slopes are taken against the window
    // centers (exact for affine bias curves everywhere, edges included).
    let n = bias.len();
    let mut smooth = Vec::with_capacity(n);
    let mut center = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(n - 1);
        let len = (hi - lo + 1) as f64;
        smooth.push(bias[lo..=hi].iter().sum::<f64>() / len);
        center.push(grid[lo..=hi].iter().sum::<f64>() / len);
    }
    let slope: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (smooth[b] - smooth[a]) / (center[b] - center[a])
        })
        .collect();
    Ok(BiasCurve { grid: grid.to_vec(), bias, slope })
}

/// Variance lower bound of the biased Cramér-Rao inequality:
/// `(1 + d bias/d theta)^2 / (eta F)`.
pub fn crb_variance_bound(fisher: f64, bias_slope: f64, eta: usize) -> Result<f64> {
    if fisher <= 0.0 {
        return Err(Error::Domain(format!(
            "Fisher information must be positive, got {fisher}"
        )));
    }
    if eta == 0 {
        return Err(Error::Domain("eta must be at least 1".into()));
    }
    let s = 1.0 + bias_slope;
    Ok(s * s / (eta as f64 * fisher))
}

/// RMSE lower bound from the biased Cramér-Rao inequality: the variance
/// bound plus the squared bias.
pub fn biased_crb(fisher: f64, bias_slope: f64, bias: f64, eta: usize) -> Result<f64> {
    Ok((crb_variance_bound(fisher, bias_slope, eta)? + bias * bias).sqrt())
}

/// Precision-bound summary along a detuning grid.
#[derive(Debug, Clone)]
pub struct FisherReport {
    pub theta_grid: Vec<f64>,
    pub fisher: Vec<f64>,
    pub qfi: Vec<f64>,
    pub bias: Vec<f64>,
    pub bias_slope: Vec<f64>,
    /// RMSE bounds (NaN where the Fisher information vanishes).
    pub crb_rmse: Vec<f64>,
    pub qcrb_rmse: Vec<f64>,
    /// Pure-variance bounds, without the squared-bias contribution.
    pub crb_std: Vec<f64>,
    pub qcrb_std: Vec<f64>,
    pub eta: usize,
}

impl FisherReport {
    /// Assemble the report from an estimator's empirical bias curve.
    pub fn build(
        omega: f64,
        n_clicks: usize,
        bias_curve: &BiasCurve,
        d_theta: f64,
        h: f64,
        eta: usize,
    ) -> Result<FisherReport> {
        let grid = &bias_curve.grid;
        let mut fisher = Vec::with_capacity(grid.len());
        let mut qfi_v = Vec::with_capacity(grid.len());
        for &delta in grid {
            let params = SystemParams::unit_gamma(delta, omega)?;
            fisher.push(fisher_per_trajectory(&params, n_clicks, d_theta)?);
            qfi_v.push(qfi(&params, n_clicks, h)?);
        }
        let bound = |info: f64, slope: f64, b: f64| -> f64 {
            biased_crb(info, slope, b, eta).unwrap_or(f64::NAN)
        };
        let std_bound = |info: f64, slope: f64| -> f64 {
            crb_variance_bound(info, slope, eta).map(f64::sqrt).unwrap_or(f64::NAN)
        };
        let crb_rmse: Vec<f64> = (0..grid.len())
            .map(|i| bound(fisher[i], bias_curve.slope[i], bias_curve.bias[i]))
            .collect();
        let qcrb_rmse: Vec<f64> = (0..grid.len())
            .map(|i| bound(qfi_v[i], bias_curve.slope[i], bias_curve.bias[i]))
            .collect();
        let crb_std: Vec<f64> =
            (0..grid.len()).map(|i| std_bound(fisher[i], bias_curve.slope[i])).collect();
        let qcrb_std: Vec<f64> =
            (0..grid.len()).map(|i| std_bound(qfi_v[i], bias_curve.slope[i])).collect();
        Ok(FisherReport {
            theta_grid: grid.clone(),
            fisher,
            qfi: qfi_v,
            bias: bias_curve.bias.clone(),
            bias_slope: bias_curve.slope.clone(),
            crb_rmse,
            qcrb_rmse,
            crb_std,
            qcrb_std,
            eta,
        })
    }

    /// Convert into a unit system where gamma has numerical value `g`:
    /// detunings and biases scale with `g`, informations with `1/g^2`.
    pub fn scaled(&self, g: f64) -> FisherReport {
        let mul = |v: &[f64], s: f64| v.iter().map(|x| x * s).collect::<Vec<f64>>();
        FisherReport {
            theta_grid: mul(&self.theta_grid, g),
            fisher: mul(&self.fisher, 1.0 / (g * g)),
            qfi: mul(&self.qfi, 1.0 / (g * g)),
            bias: mul(&self.bias, g),
            bias_slope: self.bias_slope.clone(),
            crb_rmse: mul(&self.crb_rmse, g),
            qcrb_rmse: mul(&self.qcrb_rmse, g),
            crb_std: mul(&self.crb_std, g),
            qcrb_std: mul(&self.qcrb_std, g),
            eta: self.eta,
        }
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(
            out,
            "theta,fisher,qfi,bias,bias_slope,crb_rmse,qcrb_rmse,crb_std,qcrb_std"
        )?;
        for i in 0..self.theta_grid.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.theta_grid[i],
                self.fisher[i],
                self.qfi[i],
                self.bias[i],
                self.bias_slope[i],
                self.crb_rmse[i],
                self.qcrb_rmse[i],
                self.crb_std[i],
                self.qcrb_std[i]
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::child_rng;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand_distr::{Distribution, Normal};

    fn p(delta: f64, omega: f64) -> SystemParams {
        SystemParams::unit_gamma(delta, omega).unwrap()
    }

    #[test]
    fn fisher_is_even_in_detuning() {
        // Via the raw kernel: the +/- detuning integrands coincide exactly.
        let f_pos = fisher_per_trajectory(&p(0.6, 1.0), 48, 1e-3).unwrap();
        let params_neg = SystemParams { delta: -0.6, omega: 1.0, gamma: 1.0 };
        let f_neg = fisher_per_trajectory(&params_neg, 48, 1e-3).unwrap();
        assert_relative_eq!(f_pos, f_neg, max_relative = 1e-12);
    }

    #[test]
    fn fisher_scales_linearly_in_clicks() {
        let f1 = fisher_per_trajectory(&p(0.8, 1.0), 48, 1e-3).unwrap();
        let f2 = fisher_per_trajectory(&p(0.8, 1.0), 96, 1e-3).unwrap();
        assert_relative_eq!(f2 / f1, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn fd_step_refinement_converges() {
        let f1 = fisher_per_trajectory(&p(0.8, 1.0), 48, 1e-3).unwrap();
        let f2 = fisher_per_trajectory(&p(0.8, 1.0), 48, 5e-4).unwrap();
        assert!((f1 - f2).abs() / f1 < 1e-3, "f1 {f1} f2 {f2}");
    }

    #[test]
    fn sampled_fisher_matches_quadrature() {
        let params = p(0.8, 1.0);
        let f_quad = fisher_per_trajectory(&params, 48, 1e-3).unwrap();
        let mut rng = child_rng(77, 0);
        let f_mc = fisher_sampled(&params, 4000, 48, 1e-3, &mut rng).unwrap();
        assert!(
            (f_mc - f_quad).abs() / f_quad < 0.08,
            "quadrature {f_quad} vs sampled {f_mc}"
        );
    }

    #[test]
    fn sampled_fisher_error_shrinks_with_sqrt_n() {
        let params = p(0.8, 1.0);
        let spread = |n_traj: usize, salt: u64| -> f64 {
            let reps = 16;
            let vals: Vec<f64> = (0..reps)
                .map(|i| {
                    let mut rng = child_rng(900 + salt, i);
                    fisher_sampled(&params, n_traj, 48, 1e-3, &mut rng).unwrap()
                })
                .collect();
            let mean = vals.iter().sum::<f64>() / reps as f64;
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt()
        };
        let ratio = spread(400, 0) / spread(1600, 1);
        assert!((ratio - 2.0).abs() < 0.8, "spread ratio {ratio}");
    }

    #[test]
    fn qfi_dominates_fisher() {
        for delta in [0.4, 0.8, 1.6] {
            let params = p(delta, 1.0);
            let f = fisher_per_trajectory(&params, 48, 1e-3).unwrap();
            let h = qfi(&params, 48, 1e-3).unwrap();
            assert!(
                h >= f * (1.0 - 1e-6),
                "H {h} must dominate F {f} at delta {delta}"
            );
        }
    }

    #[test]
    fn generalized_liouvillian_zero_mode_at_coincidence() {
        let m = liouvillian_raw(0.8, 0.8, 1.0, 1.0, 1.0);
        let eig = eigenvalues4(&m).unwrap();
        assert_abs_diff_eq!(eig[0].re, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn stencil_eigenvalues_stay_on_branch() {
        // The tracked eigenvalue moves by at most O(h * ||dL||) across the
        // stencil; the derivative matrix has Frobenius norm sqrt(2).
        let h = 1e-3;
        let d = 0.8;
        let vals: Vec<f64> = [(d + h, d + h), (d + h, d - h), (d - h, d + h), (d - h, d - h)]
            .iter()
            .map(|&(a, b)| {
                let m = liouvillian_raw(a, b, 1.0, 1.0, 1.0);
                eigenvalues4(&m).unwrap()[0].norm()
            })
            .collect();
        for v in vals {
            assert!(v < 10.0 * h * 2f64.sqrt(), "eigenvalue drift {v}");
        }
    }

    #[test]
    fn bias_of_unbiased_estimator_is_small() {
        let grid: Vec<f64> = (0..8).map(|k| 0.2 + 0.2 * k as f64).collect();
        let noise_sd = 0.05;
        let n = 400;
        let estimates: Vec<Vec<f64>> = grid
            .iter()
            .enumerate()
            .map(|(k, &truth)| {
                let mut rng = child_rng(31, k as u64);
                let normal = Normal::new(0.0, noise_sd).unwrap();
                (0..n).map(|_| truth + normal.sample(&mut rng)).collect()
            })
            .collect();
        let curve = empirical_bias(&grid, &estimates).unwrap();
        let se = noise_sd / (n as f64).sqrt();
        for b in &curve.bias {
            assert!(b.abs() < 3.0 * se, "bias {b} exceeds 3 SE {se}");
        }
    }

    #[test]
    fn bias_slope_of_affine_estimator() {
        // Estimator 0.9 theta: bias = -0.1 theta, slope -0.1.
        let grid: Vec<f64> = (0..10).map(|k| 0.2 + 0.2 * k as f64).collect();
        let estimates: Vec<Vec<f64>> = grid
            .iter()
            .enumerate()
            .map(|(k, &truth)| {
                let mut rng = child_rng(32, k as u64);
                let normal = Normal::new(0.0, 0.01).unwrap();
                (0..500).map(|_| 0.9 * truth + normal.sample(&mut rng)).collect()
            })
            .collect();
        let curve = empirical_bias(&grid, &estimates).unwrap();
        for (i, s) in curve.slope.iter().enumerate() {
            assert!((s + 0.1).abs() < 0.02, "slope[{i}] = {s}");
        }
    }

    #[test]
    fn bias_requires_enough_samples() {
        let grid = vec![0.1, 0.2];
        let estimates = vec![vec![0.1; 50], vec![0.2; 500]];
        assert!(matches!(
            empirical_bias(&grid, &estimates),
            Err(Error::InsufficientSamples(_))
        ));
    }

    #[test]
    fn crb_reductions() {
        let f = 25.0;
        assert_relative_eq!(biased_crb(f, 0.0, 0.0, 1).unwrap(), 0.2, max_relative = 1e-12);
        assert_abs_diff_eq!(biased_crb(f, -1.0, 0.0, 1).unwrap(), 0.0, epsilon = 1e-15);
        assert!(biased_crb(0.0, 0.0, 0.0, 1).is_err());
        assert!(biased_crb(-1.0, 0.0, 0.0, 1).is_err());
        assert!(biased_crb(1.0, 0.0, 0.0, 0).is_err());
        // Monotone decreasing in F.
        let a = biased_crb(10.0, -0.2, 0.05, 1).unwrap();
        let b = biased_crb(20.0, -0.2, 0.05, 1).unwrap();
        assert!(b < a);
        // eta spreads the bound.
        let c = biased_crb(10.0, -0.2, 0.0, 4).unwrap();
        assert_relative_eq!(c, biased_crb(10.0, -0.2, 0.0, 1).unwrap() / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_fd_steps() {
        assert!(fisher_per_trajectory(&p(0.8, 1.0), 48, 1e-6).is_err());
        assert!(fisher_per_trajectory(&p(0.8, 1.0), 48, 0.1).is_err());
        assert!(qfi(&p(0.8, 1.0), 48, 1e-5).is_err());
        let mut rng = child_rng(0, 0);
        assert!(fisher_sampled(&p(0.8, 1.0), 50, 48, 1e-3, &mut rng).is_err());
    }
}
