//! ODE-only checks of the τ family: first integrals, the free dispersion
//! rate, and the two μ∞ oracles with the large-`τ1` expansion.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Check, Outcome, Series};
use crate::error::Result;
use crate::tau::{
    first_integral_residual, free_rate_check, integrate_tau, integrate_tau_strided, max_abs, mu_infinity_integral,
    mu_infinity_limit, TauParams,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub name: String,
    pub omega_sq: f64,
    pub include_cubic: bool,
    pub tau0: f64,
    pub tau1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub lambda: f64,
    pub residual_dt: f64,
    pub residual_t_end: f64,
    pub residual_tolerance: f64,
    pub variants: Vec<Variant>,
    /// `Ω` at which `τ ≡ 1` solves the cubic-on equation (`Ω = 2λ + 1`).
    pub fixed_point_omega_sq: f64,
    pub fixed_point_tolerance: f64,
    pub free_t_end: f64,
    pub free_dt: f64,
    pub free_ratio_band: [f64; 2],
    pub mu_omega: f64,
    pub mu_tau0: f64,
    pub mu_tau1: Vec<f64>,
    pub mu_t_end: f64,
    pub mu_dt: f64,
    pub mu_tolerance: f64,
    pub expansion_tau1: Vec<f64>,
}

fn repulsive(p: &Params, tau1: f64) -> TauParams {
    TauParams {
        lambda: p.lambda,
        omega_sq: -p.mu_omega * p.mu_omega,
        include_cubic: true,
        tau0: p.mu_tau0,
        tau1,
    }
}

/// Largest increase between consecutive entries; `≤ 0` means non-increasing.
fn max_increase(v: &[f64]) -> f64 {
    v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

pub fn run(p: &Params) -> Result<Outcome> {
    let mut checks = Vec::new();

    let mut residuals = serde_json::Map::new();
    for v in &p.variants {
        let tp = TauParams {
            lambda: p.lambda,
            omega_sq: v.omega_sq,
            include_cubic: v.include_cubic,
            tau0: v.tau0,
            tau1: v.tau1,
        };
        let traj = integrate_tau(tp, p.residual_t_end, p.residual_dt)?;
        let r = max_abs(&first_integral_residual(&traj));
        checks.push(Check::le(format!("first_integral_residual_{}", v.name), r, p.residual_tolerance));
        residuals.insert(v.name.clone(), json!(r));
    }

    let fixed = TauParams {
        lambda: p.lambda,
        omega_sq: p.fixed_point_omega_sq,
        include_cubic: true,
        tau0: 1.0,
        tau1: 0.0,
    };
    let traj = integrate_tau(fixed, p.residual_t_end, p.residual_dt)?;
    let fixed_dev = traj.tau.iter().fold(0.0f64, |m, t| m.max((t - 1.0).abs()));
    checks.push(Check::le("fixed_point_deviation", fixed_dev, p.fixed_point_tolerance));

    let stride = ((p.free_t_end / p.free_dt) / 2000.0).ceil().max(1.0) as usize;
    let free = integrate_tau_strided(TauParams::free(p.lambda), p.free_t_end, p.free_dt, stride)?;
    let rate = free_rate_check(&free)?;
    let last = *rate.last().expect("free trajectory past t = e");
    checks.push(Check::ge("free_rate_ratio_low", last.tau_ratio, p.free_ratio_band[0]));
    checks.push(Check::le("free_rate_ratio_high", last.tau_ratio, p.free_ratio_band[1]));

    let mut mu_rows = Vec::new();
    for &tau1 in &p.mu_tau1 {
        let traj = integrate_tau(repulsive(p, tau1), p.mu_t_end, p.mu_dt)?;
        let lim = mu_infinity_limit(&traj, f64::INFINITY)?;
        let int = mu_infinity_integral(&traj, f64::INFINITY)?;
        let gap = (lim.mu_inf - int.mu_inf).abs();
        checks.push(Check::le(format!("mu_cross_oracle_tau1_{tau1}"), gap, p.mu_tolerance));
        mu_rows.push(json!({
            "tau1": tau1,
            "mu_limit": lim.mu_inf,
            "mu_limit_convergence": lim.tolerance,
            "mu_integral": int.mu_inf,
            "mu_integral_tail_bound": int.tail_bound,
            "mu_integral_quadrature_error": int.quadrature_error,
            "gap": gap,
        }));
    }

    let w = p.mu_omega;
    let mut literal = Vec::new();
    let mut centred = Vec::new();
    let mut exp_rows = Vec::new();
    for &tau1 in &p.expansion_tau1 {
        let traj = integrate_tau(repulsive(p, tau1), p.mu_t_end, p.mu_dt)?;
        let mu = mu_infinity_integral(&traj, f64::INFINITY)?.mu_inf;
        let scale = tau1 / tau1.ln();
        let a = (mu - tau1 / w - p.mu_tau0).abs() * scale;
        let b = (mu - 0.5 * (tau1 / w + p.mu_tau0)).abs() * scale;
        literal.push(a);
        centred.push(b);
        exp_rows.push(vec![tau1, mu, a, b]);
    }
    let literal_increase = max_increase(&literal);
    checks.push(Check::le("expansion_remainder_max_increase", literal_increase, 0.0));

    let results = json!({
        "first_integral_residuals": residuals,
        "fixed_point_deviation": fixed_dev,
        "free_rate": {
            "t": last.t,
            "tau_ratio": last.tau_ratio,
            "tau_dot_ratio": last.tau_dot_ratio,
        },
        "mu_infinity": mu_rows,
        "expansion": {
            "tau1": p.expansion_tau1,
            "remainder_scaled": literal,
            "remainder_scaled_half_centring": centred,
            "half_centring_max_increase": max_increase(&centred),
        },
    });

    let rate_rows: Vec<Vec<f64>> = rate.iter().map(|s| vec![s.t, s.tau_ratio, s.tau_dot_ratio]).collect();
    Ok(Outcome {
        checks,
        results,
        series: vec![
            Series::from_rows("free_rate", &["t", "tau_ratio", "tau_dot_ratio"], &rate_rows)?,
            Series::from_rows(
                "mu_expansion",
                &["tau1", "mu_inf", "remainder_scaled", "remainder_scaled_half_centring"],
                &exp_rows,
            )?,
        ],
    })
}
