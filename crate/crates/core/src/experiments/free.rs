//! Free-universality: with no potential the rescaled density `|v|²`
//! approaches `γ² = e^{-|y|²}` (in moments and in W₁ at rate `(ln t)^{-1/2}`).

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{data::mixture_1d, slope, Check, Outcome, Series};
use crate::diagnostics::{marginal_density, normalize_density, norm_factor_for, wasserstein1_1d};
use crate::error::Result;
use crate::field::{Frame, FrameKind, RescaledFrame, WaveField};
use crate::grid::Grid;
use crate::potentials::PotentialSpec;
use crate::solver::{run_with, RunOptions};
use num_complex::Complex64;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub lambda: f64,
    pub n: usize,
    pub l: f64,
    pub dt: f64,
    pub t_end: f64,
    pub save_every: usize,
    pub components: usize,
    /// Start of the window in which trends are judged.
    pub decade_start: f64,
    pub m2_tolerance: f64,
    /// Allowed ratio of `W₁√ln t` at `t_end` to its value at `decade_start`.
    pub w1_growth_tolerance: f64,
    pub mass_tolerance: f64,
    /// Largest allowed step-to-step increase of the frame energy, relative.
    pub energy_rise_tolerance: f64,
}

/// Moments and distance of a 1-D marginal against `γ²`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MarginalStats {
    pub mass: f64,
    pub center: f64,
    pub m2: f64,
    pub w1: f64,
}

pub(crate) fn marginal_stats(y: &[f64], h: f64, rho: &[f64]) -> Result<MarginalStats> {
    let mass: f64 = rho.iter().sum::<f64>() * h;
    let center: f64 = y.iter().zip(rho).map(|(y, r)| y * r).sum::<f64>() * h;
    let m2: f64 = y.iter().zip(rho).map(|(y, r)| y * y * r).sum::<f64>() * h;
    let gamma: Vec<f64> = y.iter().map(|y| (-y * y).exp()).collect();
    let p = normalize_density(rho, h)?;
    let q = normalize_density(&gamma, h)?;
    Ok(MarginalStats {
        mass,
        center,
        m2,
        w1: wasserstein1_1d(&p, &q, h)?,
    })
}

/// Trend and growth checks shared with the partially confined case.
pub(crate) fn universality_checks(
    prefix: &str,
    rows: &[(f64, MarginalStats)],
    decade_start: f64,
    m2_tolerance: f64,
    w1_growth_tolerance: f64,
) -> (Vec<Check>, serde_json::Value) {
    let target = 0.5 * std::f64::consts::PI.sqrt();
    let last = rows.last().map(|r| r.1).expect("at least one sample");
    let t_end = rows.last().map_or(0.0, |r| r.0);
    let window: Vec<&(f64, MarginalStats)> = rows.iter().filter(|r| r.0 >= decade_start).collect();
    let ln_t: Vec<f64> = window.iter().map(|r| r.0.ln()).collect();
    let dev: Vec<f64> = window.iter().map(|r| (r.1.m2 - target).abs()).collect();
    let trend = slope(&ln_t, &dev);
    let w1s = |r: &(f64, MarginalStats)| r.1.w1 * r.0.ln().sqrt();
    let w1_start = window.first().map_or(f64::NAN, |r| w1s(r));
    let w1_end = window.last().map_or(f64::NAN, |r| w1s(r));
    let w1_max = window.iter().fold(0.0f64, |m, r| m.max(w1s(r)));
    let i2_max = window
        .iter()
        .fold(0.0f64, |m, r| m.max(r.1.center.abs() * r.0.ln().sqrt()));
    let rel = (last.m2 / target - 1.0).abs();
    let checks = vec![
        Check::le(format!("{prefix}second_moment_rel_error"), rel, m2_tolerance),
        Check::le(format!("{prefix}second_moment_deviation_trend"), trend, 0.0),
        Check::le(format!("{prefix}w1_sqrt_log_growth"), w1_end / w1_start, w1_growth_tolerance),
    ];
    let results = json!({
        "t_end": t_end,
        "second_moment": last.m2,
        "second_moment_target": target,
        "second_moment_rel_error": rel,
        "deviation_trend_per_log_t": trend,
        "w1_final": last.w1,
        "w1_sqrt_log_t_start": w1_start,
        "w1_sqrt_log_t_end": w1_end,
        "w1_sqrt_log_t_max": w1_max,
        "center_sqrt_log_t_max": i2_max,
    });
    (checks, results)
}

pub fn run(p: &Params, seed: u64) -> Result<Outcome> {
    let spec = PotentialSpec::free(1);
    let grid = Grid::new(vec![p.n], vec![p.l])?;
    let x = grid.coords(0);
    let u0 = WaveField::new(grid.clone(), mixture_1d(&x, seed, p.components), spec.clone(), p.lambda, 0.0)?;
    let n = norm_factor_for(FrameKind::Free, u0.mass(), 1);
    let frame = RescaledFrame::for_potential(&spec, p.lambda, p.t_end, p.dt, n)?;
    let tau = frame.tau.clone();
    let mut v = u0;
    v.scale(Complex64::new(1.0 / n, 0.0));
    let mut v = v.with_frame(Frame::Rescaled(frame))?;
    v.epsilon = v.default_epsilon();

    let h = grid.spacing(0);
    let mut rows = Vec::new();
    let mut energy = Vec::new();
    let opts = RunOptions::new(p.dt, p.t_end, p.save_every);
    run_with(v, &opts, |f, rec| {
        let (_, rho) = marginal_density(f, &[0])?;
        let s = marginal_stats(&x, h, &rho)?;
        rec.w1 = Some(vec![s.w1]);
        rows.push((f.t, s));
        energy.push(rec.energy_eps);
        Ok(())
    })?;

    let mass0 = rows[0].1.mass;
    let mass_drift = rows
        .iter()
        .fold(0.0f64, |m, r| m.max((r.1.mass / mass0 - 1.0).abs()));
    let gm = crate::field::gamma_mass(1);
    let (mut checks, mut results) =
        universality_checks("", &rows, p.decade_start, p.m2_tolerance, p.w1_growth_tolerance);
    checks.insert(0, Check::le("mass_drift", mass_drift, p.mass_tolerance));
    checks.insert(1, Check::le("initial_mass_vs_gamma", (mass0 / gm - 1.0).abs(), 1e-12));
    let e_rise = energy
        .windows(2)
        .fold(0.0f64, |m, w| m.max(w[1] - w[0]))
        / energy[0].abs().max(1.0);
    checks.push(Check::le("dissipated_energy_max_rise", e_rise, p.energy_rise_tolerance));
    results["dissipated_energy_max_rise"] = json!(e_rise);

    let series_rows: Vec<Vec<f64>> = rows
        .iter()
        .zip(&energy)
        .map(|((t, s), e)| {
            let (tau_t, _) = tau.interpolate(*t).unwrap_or((f64::NAN, f64::NAN));
            vec![*t, tau_t, s.mass, s.center, s.m2, s.w1, s.w1 * t.ln().max(0.0).sqrt(), *e]
        })
        .collect();
    let series = Series::from_rows(
        "free_universality",
        &["t", "tau", "mass", "center", "second_moment", "w1", "w1_sqrt_log_t", "energy_eps"],
        &series_rows,
    )?;
    Ok(Outcome {
        checks,
        results,
        series: vec![series],
    })
}
