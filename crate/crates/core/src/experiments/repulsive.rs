//! Repulsive harmonic potential in the frame `τ̈ = ω²τ + 2λ/τ`: bounded
//! Σ-type quantities, the limit of the centre of mass, and the dependence
//! of the limiting profile on the data.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Check, Outcome, Series};
use crate::error::Result;
use crate::field::{Frame, RescaledFrame, WaveField};
use crate::gaussian::GaussianState;
use crate::grid::Grid;
use crate::potentials::PotentialSpec;
use crate::solver::{run, RunOptions};
use crate::tau::{integrate_tau, mu_infinity_integral, TauParams};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateParams {
    pub lambda: f64,
    pub omega: f64,
    pub n: usize,
    pub l: f64,
    pub dt: f64,
    pub t_end: f64,
    pub save_every: usize,
    pub center: f64,
    pub velocity: f64,
    /// Horizon and step of the τ run that yields `μ∞`.
    pub mu_t_end: f64,
    pub mu_dt: f64,
    pub bound_factor: f64,
    pub limit_tolerance: f64,
    pub oracle_tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonuniversalityParams {
    pub lambda: f64,
    pub omega: f64,
    /// Chirps: the data are `e^{-(1 − iβ)x²/2}`.
    pub betas: [f64; 2],
    pub mu_t_end: f64,
    pub mu_dt: f64,
    pub min_relative_difference: f64,
    pub n: usize,
    pub l: f64,
    pub dt: f64,
    pub t_end: f64,
    pub save_every: usize,
    pub pde_tolerance: f64,
}

fn mu_inf(p: TauParams, t_end: f64, dt: f64) -> Result<(f64, f64)> {
    let traj = integrate_tau(p, t_end, dt)?;
    let m = mu_infinity_integral(&traj, 1e-9)?;
    Ok((m.mu_inf, m.tolerance()))
}

fn frame_field(spec: &PotentialSpec, grid: Grid, state: &GaussianState, lambda: f64, t_end: f64, dt: f64) -> Result<WaveField> {
    let u0 = WaveField::from_gaussian(grid, state, spec.clone(), lambda, 0.0)?;
    let frame = RescaledFrame::for_potential(spec, lambda, t_end, dt, 1.0)?;
    let mut v = u0.with_frame(Frame::Rescaled(frame))?;
    v.epsilon = v.default_epsilon();
    Ok(v)
}

pub fn run_rate(p: &RateParams) -> Result<Outcome> {
    let spec = PotentialSpec::isotropic_repulsive(1, p.omega)?;
    let grid = Grid::new(vec![p.n], vec![p.l])?;
    let mut state = GaussianState::centered(vec![Complex64::new(1.0, 0.0)], Complex64::new(1.0, 0.0));
    state.centers[0] = p.center;
    state.velocities[0] = p.velocity;
    let v = frame_field(&spec, grid, &state, p.lambda, p.t_end, p.dt)?;
    let tau = v.rescaled_frame().map(|f| f.tau.clone()).expect("rescaled");
    let out = run(v, &RunOptions::new(p.dt, p.t_end, p.save_every))?;
    let recs = &out.records;
    let r0 = &recs[0];

    let growth = |f: &dyn Fn(&crate::diagnostics::DiagnosticsRecord) -> f64| {
        let first = f(r0);
        recs.iter().map(|r| f(r)).fold(0.0f64, f64::max) / first
    };
    let mass_ratio = growth(&|r| r.mass);
    let m2_ratio = growth(&|r| r.second_moment);
    let llogl_ratio = growth(&|r| r.llogl);

    let (mu, mu_tol) = mu_inf(TauParams::repulsive_frame(p.lambda, p.omega), p.mu_t_end, p.mu_dt)?;
    let (i2_0, i1_0) = (r0.center[0], r0.momentum[0]);
    let w = p.omega;
    let limit = (i2_0 + i1_0 / w) / (2.0 * mu);
    let last = recs.last().expect("records");
    let limit_gap = (last.center[0] / limit - 1.0).abs();

    // τ I₂ solves y'' = ω² y exactly.
    let mut oracle_gap = 0.0f64;
    let mut rows = Vec::with_capacity(recs.len());
    for r in recs {
        let (tau_t, _) = tau.interpolate(r.t)?;
        let expect = i2_0 * (w * r.t).cosh() + i1_0 * (w * r.t).sinh() / w;
        let got = tau_t * r.center[0];
        oracle_gap = oracle_gap.max((got - expect).abs() / expect.abs().max(i2_0.abs()));
        rows.push(vec![r.t, tau_t, r.mass, r.second_moment, r.llogl, r.center[0], r.momentum[0], expect / tau_t]);
    }

    let checks = vec![
        Check::le("mass_growth", mass_ratio, p.bound_factor),
        Check::le("second_moment_growth", m2_ratio, p.bound_factor),
        Check::le("llogl_growth", llogl_ratio, p.bound_factor),
        Check::le("center_limit_rel_error", limit_gap, p.limit_tolerance),
        Check::le("center_vs_hyperbolic_oracle", oracle_gap, p.oracle_tolerance),
    ];
    let results = json!({
        "mu_inf": mu,
        "mu_inf_tolerance": mu_tol,
        "i2_initial": i2_0,
        "i1_initial": i1_0,
        "i2_final": last.center[0],
        "i2_limit": limit,
        "max_ratio": {"mass": mass_ratio, "second_moment": m2_ratio, "llogl": llogl_ratio},
    });
    Ok(Outcome {
        checks,
        results,
        series: vec![Series::from_rows(
            "repulsive_rate",
            &["t", "tau", "mass", "second_moment", "llogl", "i2", "i1", "i2_oracle"],
            &rows,
        )?],
    })
}

pub fn run_nonuniversality(p: &NonuniversalityParams) -> Result<Outcome> {
    let w = p.omega;
    let (mu_frame, _) = mu_inf(TauParams::repulsive_frame(p.lambda, w), p.mu_t_end, p.mu_dt)?;
    let spec = PotentialSpec::isotropic_repulsive(1, w)?;
    let grid = Grid::new(vec![p.n], vec![p.l])?;

    let mut limits = Vec::new();
    let mut pde_widths = Vec::new();
    let mut per_beta = Vec::new();
    let mut pde_gap = 0.0f64;
    let mut rows = Vec::new();
    for (b, &beta) in p.betas.iter().enumerate() {
        let tp = TauParams {
            lambda: p.lambda,
            omega_sq: -w * w,
            include_cubic: true,
            tau0: 1.0,
            tau1: beta,
        };
        let (mu_u, mu_tol) = mu_inf(tp, p.mu_t_end, p.mu_dt)?;
        let tau_u = integrate_tau(tp, p.t_end + p.dt, p.dt / 10.0)?;
        limits.push(mu_u / mu_frame);

        let state = GaussianState::centered(vec![Complex64::new(1.0, -beta)], Complex64::new(1.0, 0.0));
        let v = frame_field(&spec, grid.clone(), &state, p.lambda, p.t_end, p.dt)?;
        let tau_f = v.rescaled_frame().map(|f| f.tau.clone()).expect("rescaled");
        let out = run(v, &RunOptions::new(p.dt, p.t_end, p.save_every))?;
        let mut width = f64::NAN;
        for r in &out.records {
            width = (2.0 * r.second_moment / r.mass).sqrt();
            let expect = tau_u.interpolate(r.t)?.0 / tau_f.interpolate(r.t)?.0;
            pde_gap = pde_gap.max((width / expect - 1.0).abs());
            rows.push(vec![b as f64, beta, r.t, width, expect]);
        }
        pde_widths.push(width);
        per_beta.push(json!({
            "beta": beta,
            "mu_inf": mu_u,
            "mu_inf_tolerance": mu_tol,
            "limiting_width": mu_u / mu_frame,
            "pde_width_at_t_end": width,
        }));
    }

    let rel = |a: f64, b: f64| (a - b).abs() / a.max(b);
    let limit_diff = rel(limits[0], limits[1]);
    let pde_diff = rel(pde_widths[0], pde_widths[1]);
    let checks = vec![
        Check::ge("limiting_width_relative_difference", limit_diff, p.min_relative_difference),
        Check::ge("pde_width_relative_difference", pde_diff, p.min_relative_difference),
        Check::le("pde_width_vs_gaussian_ode", pde_gap, p.pde_tolerance),
    ];
    let results = json!({
        "mu_inf_frame": mu_frame,
        "data": per_beta,
        "limiting_width_relative_difference": limit_diff,
        "pde_width_relative_difference": pde_diff,
        "pde_width_oracle_gap": pde_gap,
    });
    Ok(Outcome {
        checks,
        results,
        series: vec![Series::from_rows(
            "repulsive_widths",
            &["case", "beta", "t", "pde_width", "ode_width"],
            &rows,
        )?],
    })
}
