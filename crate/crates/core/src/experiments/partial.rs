//! Partial confinement: harmonic confinement along `x'`, free along `y`.
//! The `y`-marginal of `|v|²` disperses universally while the `x'`-factor
//! keeps breathing, undisturbed by the `y` dynamics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::free::{marginal_stats, universality_checks};
use super::{data::mixture_1d, Check, Outcome, Series};
use crate::diagnostics::{marginal_density, norm_factor_for};
use crate::error::Result;
use crate::field::{gamma_mass, Frame, FrameKind, RescaledFrame, WaveField};
use crate::gaussian::{integrate_gaussian_strided, GaussianState};
use crate::grid::Grid;
use crate::potentials::{AxisPotential, PotentialSpec};
use crate::solver::{self, run_with, RunOptions};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub lambda: f64,
    pub omega: f64,
    /// `Re a(0)` of the `x'` Gaussian; a breather unless `a² + 2λa = ω²`.
    pub breather_a: f64,
    pub n: [usize; 2],
    pub l: [f64; 2],
    pub dt: f64,
    pub t_end: f64,
    pub save_every: usize,
    pub components: usize,
    pub decade_start: f64,
    pub m2_tolerance: f64,
    pub w1_growth_tolerance: f64,
    /// Minimum `(max − min)/mean` of `⟨x'²⟩` over the last decade.
    pub min_breathing: f64,
    /// Allowed relative gap between `⟨x'²⟩` and the Gaussian ODE for
    /// `t ≤ oracle_window`; Strang phase error builds up beyond it.
    pub oracle_window: f64,
    pub oracle_tolerance: f64,
    /// Allowed relative gap between `⟨x'²⟩` and a 1-D run of the `x'` factor
    /// alone with the same step.
    pub decoupling_tolerance: f64,
    pub mass_tolerance: f64,
}

pub fn run(p: &Params, seed: u64) -> Result<Outcome> {
    let spec = PotentialSpec::new(vec![AxisPotential::confining(p.omega), AxisPotential::free()])?;
    let grid = Grid::new(p.n.to_vec(), p.l.to_vec())?;
    let xp = grid.coords(0);
    let y = grid.coords(1);
    let g_y = mixture_1d(&y, seed, p.components);
    let f_x: Vec<Complex64> = xp
        .iter()
        .map(|&x| Complex64::new((-0.5 * p.breather_a * x * x).exp(), 0.0))
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for fx in &f_x {
        for gy in &g_y {
            values.push(fx * gy);
        }
    }
    let u0 = WaveField::new(grid.clone(), values, spec.clone(), p.lambda, 0.0)?;
    let n = norm_factor_for(FrameKind::Partial, u0.mass(), 1);
    let frame = RescaledFrame::for_potential(&spec, p.lambda, p.t_end, p.dt, n)?;
    let mut v = u0;
    v.scale(Complex64::new(1.0 / n, 0.0));
    // ε = 0 keeps the product structure exact, so the x' factor can be
    // compared with its own 1-D run.
    let v = v.with_frame(Frame::Rescaled(frame))?;

    let (hx, hy) = (grid.spacing(0), grid.spacing(1));
    let mut rows = Vec::new();
    let mut widths = Vec::new();
    let opts = RunOptions::new(p.dt, p.t_end, p.save_every);
    run_with(v, &opts, |f, _| {
        let (_, rho) = marginal_density(f, &[1])?;
        let s = marginal_stats(&y, hy, &rho)?;
        rows.push((f.t, s));
        let (_, rx) = marginal_density(f, &[0])?;
        let m: f64 = rx.iter().sum::<f64>() * hx;
        let x2: f64 = xp.iter().zip(&rx).map(|(x, r)| x * x * r).sum::<f64>() * hx;
        widths.push(x2 / m);
        Ok(())
    })?;

    // The x' factor alone, stepped identically.
    let sub = PotentialSpec::isotropic_confining(1, p.omega)?;
    let gx = Grid::new(vec![p.n[0]], vec![p.l[0]])?;
    let alone = WaveField::new(gx, f_x, sub.clone(), p.lambda, 0.0)?;
    let alone = solver::run(alone, &opts)?.records;
    let decoupling_gap = alone
        .iter()
        .zip(&widths)
        .fold(0.0f64, |m, (r, w)| m.max((w / (r.second_moment / r.mass) - 1.0).abs()));

    let init = GaussianState::centered(vec![Complex64::new(p.breather_a, 0.0)], Complex64::new(1.0, 0.0));
    let refine = 10;
    let states = integrate_gaussian_strided(&init, &sub, p.lambda, p.t_end, p.dt / refine as f64, refine * p.save_every)?;
    let mut oracle_gap = 0.0f64;
    for ((t, _), (w, s)) in rows.iter().zip(widths.iter().zip(&states)) {
        if *t <= p.oracle_window && (s.t - t).abs() < 1e-6 * p.dt {
            oracle_gap = oracle_gap.max((w / (0.5 / s.widths[0].re) - 1.0).abs());
        }
    }

    let last: Vec<f64> = rows
        .iter()
        .zip(&widths)
        .filter(|((t, _), _)| *t >= p.decade_start)
        .map(|(_, w)| *w)
        .collect();
    let (lo, hi) = last.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &w| (a.min(w), b.max(w)));
    let mean = last.iter().sum::<f64>() / last.len().max(1) as f64;
    let breathing = (hi - lo) / mean;

    let mass0 = rows[0].1.mass;
    let mass_drift = rows
        .iter()
        .fold(0.0f64, |m, r| m.max((r.1.mass / mass0 - 1.0).abs()));
    let (mut checks, mut results) =
        universality_checks("y_", &rows, p.decade_start, p.m2_tolerance, p.w1_growth_tolerance);
    checks.insert(0, Check::le("marginal_mass_drift", mass_drift, p.mass_tolerance));
    checks.insert(1, Check::le("marginal_mass_vs_gamma", (mass0 / gamma_mass(1) - 1.0).abs(), 1e-12));
    checks.push(Check::ge("x_prime_breathing_amplitude", breathing, p.min_breathing));
    checks.push(Check::le("x_prime_width_vs_gaussian_ode", oracle_gap, p.oracle_tolerance));
    checks.push(Check::le("x_prime_width_vs_1d_run", decoupling_gap, p.decoupling_tolerance));
    results["x_prime_breathing_amplitude"] = json!(breathing);
    results["x_prime_width_oracle_gap"] = json!(oracle_gap);
    results["x_prime_width_decoupling_gap"] = json!(decoupling_gap);

    let series_rows: Vec<Vec<f64>> = rows
        .iter()
        .zip(&widths)
        .map(|((t, s), w)| vec![*t, s.mass, s.center, s.m2, s.w1, *w])
        .collect();
    let series = Series::from_rows(
        "partial_confinement",
        &["t", "y_mass", "y_center", "y_second_moment", "y_w1", "x_prime_second_moment"],
        &series_rows,
    )?;
    Ok(Outcome {
        checks,
        results,
        series: vec![series],
    })
}
