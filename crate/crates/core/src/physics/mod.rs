//! Closed-form physics of the continuously driven two-level emitter.
//!
//! Everything here is a pure function of the physical parameters: the
//! waiting-time distribution between photodetections, steady-state
//! quantities, the moments of the classical (mean-delay) signal, and the
//! Liouvillian superoperator. Time is measured in units of `1/gamma`; all
//! operations are safe to call concurrently.

pub(crate) mod liouvillian;

pub use liouvillian::{liouvillian, Liouvillian};

use crate::error::{Error, Result};

/// Physical parameters of the driven two-level system.
///
/// `delta` is the drive-emitter detuning, `omega` the Rabi frequency of the
/// coherent drive and `gamma` the spontaneous decay rate fixing the unit of
/// time. The waiting-time distribution depends on the detuning only through
/// its square, so the sign of `delta` is unidentifiable and the public
/// support is restricted to `delta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub delta: f64,
    pub omega: f64,
    pub gamma: f64,
}

impl SystemParams {
    pub fn new(delta: f64, omega: f64, gamma: f64) -> Result<Self> {
        if !(delta.is_finite() && omega.is_finite() && gamma.is_finite()) {
            return Err(Error::Domain("parameters must be finite".into()));
        }
        if gamma <= 0.0 {
            return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
        }
        if omega < 0.0 {
            return Err(Error::Domain(format!("omega must be nonnegative, got {omega}")));
        }
        if delta < 0.0 {
            return Err(Error::Domain(format!("delta must be nonnegative, got {delta}")));
        }
        Ok(Self { delta, omega, gamma })
    }

    /// Parameters in the `gamma = 1` unit system used throughout.
    pub fn unit_gamma(delta: f64, omega: f64) -> Result<Self> {
        Self::new(delta, omega, 1.0)
    }
}

/// Moments of the classical signal: the sample mean of `n_clicks` delays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalMoments {
    /// Expected delay E[tau].
    pub mu: f64,
    /// Standard deviation of the sample mean of `n_clicks` delays.
    pub sigma: f64,
    pub n_clicks: usize,
}

/// Steady-state excited population `<sigma^dag sigma>_ss`.
pub fn steady_state_population(params: &SystemParams) -> f64 {
    let (d, o, g) = (params.delta, params.omega, params.gamma);
    4.0 * o * o / (g * g + 4.0 * d * d + 8.0 * o * o)
}

/// Waiting-time distribution w(tau) between consecutive photodetections.
///
/// Evaluates the analytic distribution of the delay between two quantum
/// jumps of the driven two-level system. The inner square roots are handled
/// on their real-analytic branches (`cosh` of an imaginary argument becomes
/// `cos`), and the exponentially growing branch is folded into the damping
/// factor so no intermediate overflows for large `tau`.
pub fn waiting_time_density(tau: f64, params: &SystemParams) -> Result<f64> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("tau must be finite and >= 0, got {tau}")));
    }
    if params.omega <= 0.0 {
        return Err(Error::Domain(
            "omega must be positive: an undriven emitter never emits".into(),
        ));
    }
    Ok(wtd_raw(tau, params.delta, params.omega, params.gamma))
}

/// Unchecked density kernel. Accepts negative `delta` (the density is even in
/// the detuning), used internally for finite-difference derivatives.
pub(crate) fn wtd_raw(tau: f64, delta: f64, omega: f64, gamma: f64) -> f64 {
    let a = delta * delta + 4.0 * omega * omega;
    let s = gamma * gamma + 4.0 * a;
    let u = gamma * gamma - 4.0 * a;
    // R^2 = u^2 + 16 gamma^2 delta^2 >= 0, so c+ = u + R >= 0 and c- = u - R <= 0.
    let r = (s * s - 64.0 * gamma * gamma * omega * omega).max(0.0).sqrt();

    if r < 1e-7 * s {
        // Degenerate branch point (delta -> 0, 4 omega -> gamma): take the
        // R -> 0 limit of the difference quotient.
        let x = tau * tau * u / 8.0;
        return (gamma * omega * omega * tau * tau * (-0.5 * gamma * tau).exp() * sinhc(x))
            .max(0.0);
    }

    let kappa = ((u + r).max(0.0)).sqrt() / (2.0 * std::f64::consts::SQRT_2);
    let nu = ((r - u).max(0.0)).sqrt() / (2.0 * std::f64::consts::SQRT_2);
    let half_g = 0.5 * gamma;
    let grow = 0.5 * ((kappa - half_g) * tau).exp();
    let decay = 0.5 * (-(kappa + half_g) * tau).exp();
    let osc = (-half_g * tau).exp() * (nu * tau).cos();
    let w = 8.0 * gamma * omega * omega / r * (grow + decay - osc);
    // The exact expression is nonnegative; clamp roundoff at tiny tau.
    w.max(0.0)
}

/// sinh(sqrt(x))/sqrt(x) continued through x = 0 (sin(sqrt(-x))/sqrt(-x) for
/// negative arguments).
fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 + x / 6.0 + x * x / 120.0
    } else if x > 0.0 {
        let a = x.sqrt();
        a.sinh() / a
    } else {
        let a = (-x).sqrt();
        a.sin() / a
    }
}

/// Asymptotic decay rate of w(tau): the density falls off as
/// `exp(-(gamma/2 - kappa) tau)`. Used to choose quadrature cutoffs.
pub(crate) fn tail_decay_rate(delta: f64, omega: f64, gamma: f64) -> f64 {
    let a = delta * delta + 4.0 * omega * omega;
    let s = gamma * gamma + 4.0 * a;
    let u = gamma * gamma - 4.0 * a;
    let r = (s * s - 64.0 * gamma * gamma * omega * omega).max(0.0).sqrt();
    let kappa = ((u + r).max(0.0)).sqrt() / (2.0 * std::f64::consts::SQRT_2);
    (0.5 * gamma - kappa).max(1e-12)
}

/// Mean and sample-mean deviation of the delay distribution.
///
/// `mu` equals `1 / (gamma <sigma^dag sigma>_ss)`; `sigma` is the standard
/// deviation of the average of `n_clicks` independent delays.
pub fn classical_moments(params: &SystemParams, n_clicks: usize) -> Result<ClassicalMoments> {
    if params.omega <= 0.0 {
        return Err(Error::Domain(
            "omega must be positive: the mean delay diverges without drive".into(),
        ));
    }
    if n_clicks == 0 {
        return Err(Error::Domain("n_clicks must be at least 1".into()));
    }
    let (d, o, g) = (params.delta, params.omega, params.gamma);
    let (d2, o2, g2) = (d * d, o * o, g * g);
    let mu = (g2 + 4.0 * d2 + 8.0 * o2) / (4.0 * g * o2);
    let var_tau = ((g2 + 4.0 * d2).powi(2) - 8.0 * (g2 - 12.0 * d2) * o2 + 64.0 * o2 * o2)
        / (16.0 * g2 * o2 * o2);
    let sigma = (var_tau / n_clicks as f64).sqrt();
    Ok(ClassicalMoments { mu, sigma, n_clicks })
}


#[cfg(test)]
mod tests {
    use super::test_oracles::simpson_fine;
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn p(delta: f64, omega: f64) -> SystemParams {
        SystemParams::unit_gamma(delta, omega).unwrap()
    }

    #[test]
    fn vanishes_at_zero_delay() {
        for (d, o) in [(0.0, 1.0), (0.8, 1.0), (2.5, 0.3), (5.0, 5.0)] {
            assert_eq!(waiting_time_density(0.0, &p(d, o)).unwrap(), 0.0);
        }
    }

    #[test]
    fn matches_resonant_reduction() {
        // At delta = 0, omega = gamma the distribution reduces to
        // (8/15) e^{-tau/2} (1 - cos(sqrt(15) tau / 2)).
        let params = p(0.0, 1.0);
        for k in 0..100 {
            let tau = 0.17 * k as f64;
            let reduced = 8.0 / 15.0 * (-tau / 2.0).exp() * (1.0 - (15f64.sqrt() * tau / 2.0).cos());
            let w = waiting_time_density(tau, &params).unwrap();
            assert_abs_diff_eq!(w, reduced, epsilon = 1e-12);
        }
        // Frozen value at tau = 2/gamma (computed from the reduction above).
        let w2 = waiting_time_density(2.0, &params).unwrap();
        assert_abs_diff_eq!(w2, 0.342225249908165451, epsilon = 1e-15);
    }

    #[test]
    fn normalizes_and_reproduces_mean() {
        let params = p(0.8, 1.0);
        let f = |t: f64| wtd_raw(t, 0.8, 1.0, 1.0);
        let norm = simpson_fine(f, 0.0, 200.0, 1 << 19);
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-8);
        let mean = simpson_fine(|t| t * f(t), 0.0, 200.0, 1 << 19);
        let mu = classical_moments(&params, 1).unwrap().mu;
        assert_relative_eq!(mean, mu, max_relative = 1e-8);
        assert_relative_eq!(mu, 2.89, max_relative = 1e-12);
    }

    #[test]
    fn tail_mass_beyond_cutoff_is_negligible() {
        // Honest value: ~2.5e-14 at (0.8, 1), dominated by the slow branch
        // exp(-(gamma/2 - kappa) tau).
        let f = |t: f64| wtd_raw(t, 0.8, 1.0, 1.0);
        let tail = simpson_fine(f, 100.0, 400.0, 1 << 18);
        assert!(tail < 1e-13, "tail = {tail}");
        assert!(tail > 1e-15, "tail = {tail}");
    }

    #[test]
    fn even_in_detuning() {
        for tau in [0.3, 1.7, 9.2] {
            for (d, o) in [(0.4, 1.0), (2.0, 0.7)] {
                assert_eq!(wtd_raw(tau, d, o, 1.0), wtd_raw(tau, -d, o, 1.0));
            }
        }
    }

    #[test]
    fn critical_damping_corner() {
        // R -> 0 at delta = 0, omega = gamma/4: w = gamma^3 tau^2 e^{-gamma tau/2} / 16.
        let params = p(0.0, 0.25);
        for tau in [0.5, 2.0, 10.0] {
            let w = waiting_time_density(tau, &params).unwrap();
            let lim = tau * tau * (-tau / 2.0).exp() / 16.0;
            assert_relative_eq!(w, lim, max_relative = 1e-9);
        }
        // The two evaluation paths agree just off the branch point.
        for tau in [0.5, 2.0, 10.0] {
            let near = wtd_raw(tau, 1e-5, 0.2500001, 1.0);
            let lim = waiting_time_density(tau, &params).unwrap();
            assert_relative_eq!(near, lim, max_relative = 1e-3);
        }
    }

    #[test]
    fn moments_at_resonance() {
        let m = classical_moments(&p(0.0, 1.0), 48).unwrap();
        assert_relative_eq!(m.mu, 2.25, max_relative = 1e-15);
        assert_relative_eq!(m.sigma * m.sigma, 57.0 / 768.0, max_relative = 1e-12);
    }

    #[test]
    fn mean_delay_diverges_without_drive() {
        let mut last = classical_moments(&p(0.5, 0.01), 1).unwrap().mu;
        for &o in &[0.005, 0.002, 0.001, 0.0005, 0.0001] {
            let mu = classical_moments(&p(0.5, o), 1).unwrap().mu;
            assert!(mu > last, "mu must grow as omega -> 0");
            last = mu;
        }
    }

    #[test]
    fn rejects_undriven_and_negative_delay() {
        assert!(matches!(
            waiting_time_density(1.0, &p(0.5, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(waiting_time_density(-0.1, &p(0.5, 1.0)).is_err());
        assert!(classical_moments(&p(0.5, 0.0), 48).is_err());
        assert!(SystemParams::unit_gamma(-0.1, 1.0).is_err());
        assert!(SystemParams::new(0.1, 1.0, 0.0).is_err());
    }

    #[test]
    fn decay_rate_bounds_the_tail() {
        // Integrating w from T on is close to the exp(-r tau) prediction scale.
        let r = tail_decay_rate(0.8, 1.0, 1.0);
        assert!(r > 0.2 && r < 0.5, "r = {r}");
    }
}
