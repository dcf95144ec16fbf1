//! The dispersion oscillator family `τ̈ = 2λ/τ + [cubic]/τ³ − Ωτ`.
//!
//! With the cubic term this is the width equation of the Gaussian ansatz
//! (`a = 1/τ² − iτ̇/τ`); without it, it is the universal dispersion rate used
//! to build the rescaled frames. Trajectories carry the first-integral
//! constant `C0` of `(τ̇)² = C0 + 4λ ln τ − [cubic]/τ² − Ωτ²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{step_count, Rk4};

/// Beyond this value repulsive trajectories are advanced in the variable
/// `μ = τ e^{-ωt}`, which stays bounded.
pub const MU_SWITCH_THRESHOLD: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauParams {
    pub lambda: f64,
    /// Signed curvature: `ω²` confining, `-ω²` repulsive, `0` free.
    pub omega_sq: f64,
    pub include_cubic: bool,
    pub tau0: f64,
    pub tau1: f64,
}

impl TauParams {
    /// `τ̈ = 2λ/τ`, `τ(0) = 1`, `τ̇(0) = 0`.
    pub fn free(lambda: f64) -> Self {
        TauParams {
            lambda,
            omega_sq: 0.0,
            include_cubic: false,
            tau0: 1.0,
            tau1: 0.0,
        }
    }

    /// `τ̈ = ω²τ + 2λ/τ`, `τ(0) = 1`, `τ̇(0) = 0`: the repulsive frame rate.
    pub fn repulsive_frame(lambda: f64, omega: f64) -> Self {
        TauParams {
            lambda,
            omega_sq: -omega * omega,
            include_cubic: false,
            tau0: 1.0,
            tau1: 0.0,
        }
    }

    fn cubic(&self) -> f64 {
        if self.include_cubic {
            1.0
        } else {
            0.0
        }
    }

    pub fn acceleration(&self, tau: f64) -> f64 {
        2.0 * self.lambda / tau + self.cubic() / (tau * tau * tau) - self.omega_sq * tau
    }

    /// `C0` such that `(τ̇)² − 4λ ln τ + [cubic]/τ² + Ωτ²` equals it along
    /// the flow.
    pub fn first_integral(&self) -> f64 {
        let t0 = self.tau0;
        self.tau1 * self.tau1 - 4.0 * self.lambda * t0.ln()
            + self.cubic() / (t0 * t0)
            + self.omega_sq * t0 * t0
    }

    /// `ω` of a repulsive curvature `Ω = -ω²`.
    pub fn repulsive_omega(&self) -> Result<f64> {
        if self.omega_sq < 0.0 {
            Ok((-self.omega_sq).sqrt())
        } else {
            Err(Error::invalid(format!(
                "expected a repulsive curvature, got Omega = {}",
                self.omega_sq
            )))
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.lambda, self.omega_sq, self.tau0, self.tau1]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("tau parameters must be finite"));
        }
        if self.tau0 <= 0.0 {
            return Err(Error::invalid(format!("tau0 must be > 0, got {}", self.tau0)));
        }
        Ok(())
    }
}

/// Sampled solution of the τ oscillator on a uniform time grid.
#[derive(Debug, Clone)]
pub struct TauTrajectory {
    pub times: Vec<f64>,
    pub tau: Vec<f64>,
    pub tau_dot: Vec<f64>,
    pub c0: f64,
    pub params: TauParams,
    spacing: f64,
    cum_ln_tau: Vec<f64>,
}

/// Integrate with every step recorded.
pub fn integrate_tau(params: TauParams, t_end: f64, dt: f64) -> Result<TauTrajectory> {
    integrate_tau_strided(params, t_end, dt, 1)
}

/// Integrate with step `dt`, recording every `stride`-th state.
pub fn integrate_tau_strided(
    params: TauParams,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<TauTrajectory> {
    params.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::invalid(format!("t_end must be > 0, got {t_end}")));
    }
    if stride == 0 {
        return Err(Error::invalid("stride must be >= 1"));
    }
    let n = step_count(t_end, dt);
    let h = t_end / n as f64;
    let threshold = h.min(1e-3);
    let cap = n / stride + 2;
    let mut times = Vec::with_capacity(cap);
    let mut tau = Vec::with_capacity(cap);
    let mut tau_dot = Vec::with_capacity(cap);
    times.push(0.0);
    tau.push(params.tau0);
    tau_dot.push(params.tau1);

    let mut rk = Rk4::new(2);
    let mut y = [params.tau0, params.tau1];
    // Some(ω) once the μ representation is active.
    let mut mu_omega: Option<f64> = None;
    let cubic = params.cubic();
    let lambda = params.lambda;

    for i in 0..n {
        let t = i as f64 * h;
        match mu_omega {
            None => {
                rk.step(
                    &mut |_, y: &[f64], d: &mut [f64]| {
                        d[0] = y[1];
                        d[1] = params.acceleration(y[0]);
                    },
                    t,
                    &mut y,
                    h,
                );
            }
            Some(w) => {
                rk.step(
                    &mut |s, y: &[f64], d: &mut [f64]| {
                        let mu = y[0];
                        let e2 = (-2.0 * w * s).exp();
                        d[0] = y[1];
                        d[1] = -2.0 * w * y[1] + 2.0 * lambda * e2 / mu + cubic * e2 * e2 / (mu * mu * mu);
                    },
                    t,
                    &mut y,
                    h,
                );
            }
        }
        let t_next = (i + 1) as f64 * h;
        let (tau_now, tau_dot_now) = match mu_omega {
            None => (y[0], y[1]),
            Some(w) => {
                let g = (w * t_next).exp();
                (y[0] * g, (y[1] + w * y[0]) * g)
            }
        };
        if !tau_now.is_finite() || !tau_dot_now.is_finite() {
            return Err(Error::invalid(format!(
                "tau overflowed f64 at t = {t_next}; shorten t_end"
            )));
        }
        if tau_now <= threshold {
            return Err(Error::Singularity {
                t: t_next,
                tau: tau_now,
            });
        }
        if mu_omega.is_none() && params.omega_sq < 0.0 && tau_now > MU_SWITCH_THRESHOLD {
            let w = (-params.omega_sq).sqrt();
            let g = (-w * t_next).exp();
            y = [tau_now * g, (tau_dot_now - w * tau_now) * g];
            mu_omega = Some(w);
        }
        if (i + 1) % stride == 0 || i + 1 == n {
            times.push(t_next);
            tau.push(tau_now);
            tau_dot.push(tau_dot_now);
        }
    }
    Ok(TauTrajectory::from_samples(times, tau, tau_dot, params))
}

impl TauTrajectory {
    fn from_samples(times: Vec<f64>, tau: Vec<f64>, tau_dot: Vec<f64>, params: TauParams) -> Self {
        let spacing = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        // Trapezoid with the Euler–Maclaurin end correction; (ln τ)' = τ̇/τ.
        let mut cum = Vec::with_capacity(times.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 1..times.len() {
            let h = times[i] - times[i - 1];
            let (a, b) = (tau[i - 1], tau[i]);
            acc += 0.5 * h * (a.ln() + b.ln());
            acc -= h * h / 12.0 * (tau_dot[i] / b - tau_dot[i - 1] / a);
            cum.push(acc);
        }
        TauTrajectory {
            times,
            tau,
            tau_dot,
            c0: params.first_integral(),
            params,
            spacing,
            cum_ln_tau: cum,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let start = self.times[0];
        let end = self.t_end();
        let slack = 1e-9 * self.spacing.max(1e-300);
        if !(t >= start - slack && t <= end + slack) || self.len() < 2 {
            return Err(Error::TrajectoryCoverage { t, start, end });
        }
        let s = ((t - start) / self.spacing).clamp(0.0, (self.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.len() - 2);
        // The last interval may be shorter than `spacing` when the stride does
        // not divide the step count.
        let h = self.times[i + 1] - self.times[i];
        let theta = ((t - self.times[i]) / h).clamp(0.0, 1.0);
        Ok((i, theta))
    }

    /// Cubic Hermite interpolation of `(τ, τ̇)` using the stored derivative.
    pub fn interpolate(&self, t: f64) -> Result<(f64, f64)> {
        let (i, s) = self.locate(t)?;
        let h = self.times[i + 1] - self.times[i];
        let (p0, p1) = (self.tau[i], self.tau[i + 1]);
        let (m0, m1) = (self.tau_dot[i] * h, self.tau_dot[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let tau = (2.0 * s3 - 3.0 * s2 + 1.0) * p0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * p1
            + (s3 - s2) * m1;
        let dtau = ((6.0 * s2 - 6.0 * s) * p0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * p1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h;
        Ok((tau, dtau))
    }

    /// `∫_0^t ln τ(s) ds`; the rescaled frames drop a phase built from it.
    pub fn integral_ln_tau(&self, t: f64) -> Result<f64> {
        let (i, s) = self.locate(t)?;
        if s == 0.0 {
            return Ok(self.cum_ln_tau[i]);
        }
        let t0 = self.times[i];
        let tm = 0.5 * (t0 + t);
        let (tau_m, _) = self.interpolate(tm)?;
        let (tau_e, _) = self.interpolate(t)?;
        let part = (t - t0) / 6.0 * (self.tau[i].ln() + 4.0 * tau_m.ln() + tau_e.ln());
        Ok(self.cum_ln_tau[i] + part)
    }
}

/// Pointwise `(τ̇)² − (C0 + 4λ ln τ − [cubic]/τ² − Ωτ²)`.
pub fn first_integral_residual(traj: &TauTrajectory) -> Vec<f64> {
    let p = &traj.params;
    let cubic = p.cubic();
    traj.tau
        .iter()
        .zip(&traj.tau_dot)
        .map(|(&tau, &td)| {
            let rhs = traj.c0 + 4.0 * p.lambda * tau.ln() - cubic / (tau * tau) - p.omega_sq * tau * tau;
            td * td - rhs
        })
        .collect()
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Ratios against the free asymptotics `τ ~ 2t√(λ ln t)`, `τ̇ ~ 2√(λ ln t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeRateSample {
    pub t: f64,
    pub tau_ratio: f64,
    pub tau_dot_ratio: f64,
}

/// Free-rate ratios for every stored `t > e`.
pub fn free_rate_check(traj: &TauTrajectory) -> Result<Vec<FreeRateSample>> {
    let p = &traj.params;
    if p.omega_sq != 0.0 || p.include_cubic {
        return Err(Error::invalid("free rate needs Omega = 0 and no cubic term"));
    }
    if p.lambda <= 0.0 {
        return Err(Error::invalid("free rate needs lambda > 0"));
    }
    if p.tau0 != 1.0 || p.tau1 != 0.0 {
        return Err(Error::invalid("free rate needs tau(0) = 1, tau'(0) = 0"));
    }
    let e = std::f64::consts::E;
    Ok(traj
        .times
        .iter()
        .zip(traj.tau.iter().zip(&traj.tau_dot))
        .filter(|(&t, _)| t > e)
        .map(|(&t, (&tau, &td))| {
            let g = (p.lambda * t.ln()).sqrt();
            FreeRateSample {
                t,
                tau_ratio: tau / (2.0 * t * g),
                tau_dot_ratio: td / (2.0 * g),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuLimit {
    pub mu_inf: f64,
    /// `|μ(T) − μ(T/2)|`.
    pub tolerance: f64,
}

/// `μ∞ ≈ μ(T)` with `μ(t) = τ(t)e^{-ωt}`, accepted once `|μ(T) − μ(T/2)| ≤ tol`.
pub fn mu_infinity_limit(traj: &TauTrajectory, tol: f64) -> Result<MuLimit> {
    let w = traj.params.repulsive_omega()?;
    let mu = |t: f64, tau: f64| tau * (-w * t).exp();
    let last = traj.len() - 1;
    let t_end = traj.times[last];
    let mu_end = mu(t_end, traj.tau[last]);
    let (tau_half, _) = traj.interpolate(0.5 * t_end)?;
    let mu_half = mu(0.5 * t_end, tau_half);
    let residual = (mu_end - mu_half).abs();
    if residual > tol {
        return Err(Error::ToleranceNotMet {
            what: "mu(t) has not converged",
            residual,
            tolerance: tol,
        });
    }
    Ok(MuLimit {
        mu_inf: mu_end,
        tolerance: residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuIntegral {
    pub mu_inf: f64,
    /// Bound on the discarded `∫_T^∞` contribution.
    pub tail_bound: f64,
    /// Richardson estimate of the quadrature error.
    pub quadrature_error: f64,
}

impl MuIntegral {
    pub fn tolerance(&self) -> f64 {
        self.tail_bound + self.quadrature_error
    }
}

/// `μ∞ = (τ0 + τ1/ω)/2 + (1/2ω) ∫_0^∞ e^{-ωr}(2λ/τ + [cubic]/τ³) dr`.
///
/// The integral over the stored grid uses the trapezoid rule with its
/// Euler–Maclaurin end correction; the tail beyond `T` is bounded by
/// `F(T)e^{-ωT}/ω` (τ increasing past `T`).
pub fn mu_infinity_integral(traj: &TauTrajectory, tol: f64) -> Result<MuIntegral> {
    let p = traj.params;
    let w = p.repulsive_omega()?;
    let cubic = p.cubic();
    let last = traj.len() - 1;
    if last < 2 {
        return Err(Error::invalid("trajectory too short for quadrature"));
    }
    let force = |tau: f64| 2.0 * p.lambda / tau + cubic / (tau * tau * tau);
    let integrand = |i: usize| (-w * traj.times[i]).exp() * force(traj.tau[i]);
    let derivative = |i: usize| {
        let (tau, td) = (traj.tau[i], traj.tau_dot[i]);
        let e = (-w * traj.times[i]).exp();
        -w * e * force(tau) + e * (-2.0 * p.lambda * td / (tau * tau) - 3.0 * cubic * td / tau.powi(4))
    };
    let corrected = |step: usize, end: usize| {
        let mut acc = 0.0;
        let mut i = 0;
        while i + step <= end {
            let h = traj.times[i + step] - traj.times[i];
            acc += 0.5 * h * (integrand(i) + integrand(i + step));
            acc -= h * h / 12.0 * (derivative(i + step) - derivative(i));
            i += step;
        }
        acc
    };
    let integral = corrected(1, last);
    let even_end = last - last % 2;
    let quadrature_error = (corrected(1, even_end) - corrected(2, even_end)).abs() / 15.0;

    if traj.tau_dot[last] <= 0.0 {
        return Err(Error::invalid("tau must be increasing at the end of the trajectory"));
    }
    let t_end = traj.times[last];
    let tail = force(traj.tau[last]) * (-w * t_end).exp() / w;
    let tail_bound = tail / (2.0 * w);
    let mu_inf = 0.5 * (p.tau0 + p.tau1 / w) + (integral + 0.5 * tail) / (2.0 * w);
    if tail_bound > tol {
        return Err(Error::ToleranceNotMet {
            what: "tail of the mu_inf integral",
            residual: tail_bound,
            tolerance: tol,
        });
    }
    Ok(MuIntegral {
        mu_inf,
        tail_bound,
        quadrature_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64, omega_sq: f64, cubic: bool, tau0: f64, tau1: f64) -> TauParams {
        TauParams {
            lambda,
            omega_sq,
            include_cubic: cubic,
            tau0,
            tau1,
        }
    }

    #[test]
    fn fixed_point_is_exact() {
        let traj = integrate_tau(params(1.0, 3.0, true, 1.0, 0.0), 10.0, 1e-3).unwrap();
        assert!(traj.tau.iter().all(|&t| t == 1.0));
        assert!(traj.tau_dot.iter().all(|&t| t == 0.0));
        assert_eq!(max_abs(&first_integral_residual(&traj)), 0.0);
    }

    #[test]
    fn linear_repulsive_is_cosh() {
        let w = 0.8;
        let traj = integrate_tau(params(0.0, -w * w, false, 1.0, 0.0), 5.0, 1e-3).unwrap();
        for (t, tau) in traj.times.iter().zip(&traj.tau) {
            let exact = (w * t).cosh();
            assert!((tau - exact).abs() <= 1e-11 * exact, "t={t}");
        }
        assert!(max_abs(&first_integral_residual(&traj)) < 1e-10);
    }

    #[test]
    fn initial_acceleration() {
        assert_eq!(params(1.0, 0.0, false, 1.0, 0.0).acceleration(1.0), 2.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(integrate_tau(params(1.0, 0.0, false, 0.0, 0.0), 1.0, 1e-2).is_err());
        assert!(integrate_tau(params(1.0, 0.0, false, 1.0, 0.0), 1.0, 0.0).is_err());
        assert!(integrate_tau(params(1.0, 0.0, false, 1.0, 0.0), -1.0, 1e-2).is_err());
    }

    #[test]
    fn negative_lambda_hits_singularity() {
        // τ̈ = -2/τ from (1, 0) collapses in finite time.
        let err = integrate_tau(params(-1.0, 0.0, false, 1.0, 0.0), 5.0, 1e-3).unwrap_err();
        assert!(matches!(err, Error::Singularity { .. }), "{err}");
    }

    #[test]
    fn free_first_integral_tight() {
        let traj = integrate_tau(TauParams::free(1.0), 10.0, 1e-3).unwrap();
        assert!(max_abs(&first_integral_residual(&traj)) <= 1e-8);
    }

    #[test]
    fn residual_converges_at_fourth_order() {
        let p = params(1.0, 1.0, true, 1.0, 0.5);
        let r1 = max_abs(&first_integral_residual(&integrate_tau(p, 10.0, 0.04).unwrap()));
        let r2 = max_abs(&first_integral_residual(&integrate_tau(p, 10.0, 0.02).unwrap()));
        assert!(r1 / r2 >= 8.0, "{r1:e} / {r2:e}");
    }

    #[test]
    fn repulsive_tau_dot_stays_positive() {
        let traj = integrate_tau(params(1.0, -1.0, true, 1.0, 0.0), 10.0, 1e-3).unwrap();
        assert!(traj.tau_dot[1..].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn mu_limit_linear_cases() {
        let w = 1.0;
        let cosh = integrate_tau(params(0.0, -w * w, false, 1.0, 0.0), 30.0, 1e-3).unwrap();
        let lim = mu_infinity_limit(&cosh, 1e-9).unwrap();
        assert!((lim.mu_inf - 0.5).abs() < 1e-10);

        let exp = integrate_tau(params(0.0, -w * w, false, 1.0, w), 30.0, 1e-3).unwrap();
        let lim = mu_infinity_limit(&exp, 1e-9).unwrap();
        assert!((lim.mu_inf - 1.0).abs() < 1e-10);

        let int = mu_infinity_integral(&exp, 1e-9).unwrap();
        assert_eq!(int.mu_inf, 1.0);
    }

    #[test]
    fn mu_limit_reports_non_convergence() {
        let traj = integrate_tau(params(1.0, -1.0, true, 1.0, 0.0), 4.0, 1e-3).unwrap();
        assert!(matches!(
            mu_infinity_limit(&traj, 1e-9),
            Err(Error::ToleranceNotMet { .. })
        ));
    }

    #[test]
    fn mu_routes_agree() {
        for tau1 in [0.0, 10.0] {
            let traj = integrate_tau(params(1.0, -1.0, true, 1.0, tau1), 40.0, 1e-3).unwrap();
            let lim = mu_infinity_limit(&traj, 1e-9).unwrap();
            let int = mu_infinity_integral(&traj, 1e-9).unwrap();
            assert!(
                (lim.mu_inf - int.mu_inf).abs() <= 1e-6,
                "{} vs {}",
                lim.mu_inf,
                int.mu_inf
            );
        }
    }

    #[test]
    fn mu_switch_keeps_trajectory_continuous() {
        let w = 2.0;
        let p = params(1.0, -w * w, true, 1.0, 0.0);
        let traj = integrate_tau_strided(p, 130.0, 1e-3, 1000).unwrap();
        assert!(traj.tau.last().unwrap() > &MU_SWITCH_THRESHOLD);
        let mu: Vec<f64> = traj
            .times
            .iter()
            .zip(&traj.tau)
            .map(|(t, tau)| tau * (-w * t).exp())
            .collect();
        let tail = &mu[mu.len() - 30..];
        let spread = tail.iter().fold(0.0f64, |m, v| m.max((v - tail[0]).abs()));
        assert!(spread < 1e-10 * tail[0], "spread {spread:e}");
    }

    #[test]
    fn hermite_interpolation_and_ln_integral() {
        let w = 0.5;
        let traj = integrate_tau(params(0.0, -w * w, false, 1.0, 0.0), 4.0, 1e-2).unwrap();
        for &t in &[0.0, 0.123, 1.005, 3.999, 4.0] {
            let (tau, td) = traj.interpolate(t).unwrap();
            assert!((tau - (w * t).cosh()).abs() < 1e-10);
            assert!((td - w * (w * t).sinh()).abs() < 1e-7);
        }
        assert!(matches!(
            traj.interpolate(4.5),
            Err(Error::TrajectoryCoverage { .. })
        ));
        // ∫ ln cosh(ws) ds against a fine midpoint sum.
        let t = 3.3;
        let n = 200_000;
        let h = t / n as f64;
        let oracle: f64 = (0..n).map(|i| ((w * (i as f64 + 0.5) * h).cosh()).ln() * h).sum();
        assert!((traj.integral_ln_tau(t).unwrap() - oracle).abs() < 1e-8);
    }
}
