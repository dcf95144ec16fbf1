//! Scaling and Galilean invariances, and the L² Gronwall bound.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{data::mixture_1d, Check, Outcome, Series};
use crate::error::Result;
use crate::field::WaveField;
use crate::gaussian::{galilean_boost, BoostRegime, GaussianState};
use crate::grid::Grid;
use crate::potentials::{gausson_profile, gausson_width, PotentialSpec};
use crate::solver::{self, l2_stability_probe, RunOptions};
use crate::variational::random_sigma_perturbation;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub lambda: f64,
    pub n: usize,
    pub l: f64,
    pub dt: f64,
    pub components: usize,
    pub scaling_k: Vec<f64>,
    pub scaling_t_end: f64,
    pub scaling_tolerance: f64,
    /// Confining frequency of the boosted Gausson.
    pub boost_omega: f64,
    pub boost_velocity: f64,
    pub boost_t_end: f64,
    /// The free packet spreads like `t√ln t`, so it gets its own box and horizon.
    pub boost_free_l: f64,
    pub boost_free_t_end: f64,
    pub boost_tolerance: f64,
    pub gronwall_t_end: f64,
    pub gronwall_noise: f64,
    pub gronwall_tolerance: f64,
}

fn scaling_gap(p: &Params, u0: &WaveField, k: f64) -> Result<f64> {
    let opts = RunOptions::new(p.dt, p.scaling_t_end, usize::MAX);
    let mut uk = u0.clone();
    uk.scale(Complex64::new(k, 0.0));
    uk.epsilon = uk.default_epsilon();
    let mut base = u0.clone();
    base.epsilon = base.default_epsilon();
    let a = solver::run(base, &opts)?.field;
    let b = solver::run(uk, &opts)?.field;
    let t = a.t;
    let mut expect = a;
    expect.scale(Complex64::from_polar(k, -p.lambda * t * (k * k).ln()));
    Ok(b.l2_distance(&expect)? / b.mass().sqrt())
}

/// Max over samples of `|⟨x⟩(t) − shift(t)|` for a boosted datum whose
/// unboosted centre stays at 0.
fn boost_gap(p: &Params, t_end: f64, spec: PotentialSpec, grid: Grid, state: &GaussianState, regime: BoostRegime) -> Result<(f64, Vec<Vec<f64>>)> {
    let boosted = galilean_boost(state, 0, p.boost_velocity, regime)?;
    let mut u = WaveField::from_gaussian(grid, &boosted, spec, p.lambda, 0.0)?;
    u.epsilon = u.default_epsilon();
    let save = ((t_end / p.dt) / 100.0).round().max(1.0) as usize;
    let out = solver::run(u, &RunOptions::new(p.dt, t_end, save))?;
    let mut gap = 0.0f64;
    let mut rows = Vec::new();
    for r in &out.records {
        let c = r.center[0] / r.mass;
        let expect = regime.map(p.boost_velocity, r.t)?.shift;
        gap = gap.max((c - expect).abs());
        rows.push(vec![r.t, c, expect]);
    }
    Ok((gap, rows))
}

pub fn run(p: &Params, seed: u64) -> Result<Outcome> {
    let mut checks = Vec::new();
    let grid = Grid::new(vec![p.n], vec![p.l])?;
    let x = grid.coords(0);
    let u0 = WaveField::new(grid.clone(), mixture_1d(&x, seed, p.components), PotentialSpec::free(1), p.lambda, 0.0)?;
    let mut scaling = Vec::new();
    for &k in &p.scaling_k {
        let gap = scaling_gap(p, &u0, k)?;
        // k = 1 is the identity and must reproduce bit for bit.
        let tol = if k == 1.0 { 0.0 } else { p.scaling_tolerance };
        checks.push(Check::le(format!("scaling_k_{k}_l2_gap"), gap, tol));
        scaling.push(json!({"k": k, "l2_gap": gap}));
    }

    let w = p.boost_omega;
    let kappa = gausson_width(p.lambda, w)?;
    let phi = gausson_profile(0.0, p.lambda, kappa, 1)?;
    let (conf_gap, conf_rows) = boost_gap(
        p,
        p.boost_t_end,
        PotentialSpec::isotropic_confining(1, w)?,
        grid.clone(),
        &phi,
        BoostRegime::Confining { omega: w },
    )?;
    checks.push(Check::le("boost_confining_center_error", conf_gap, p.boost_tolerance));
    let wide_n = (p.n as f64 * p.boost_free_l / p.l).ceil() as usize;
    let wide = Grid::new(vec![wide_n.next_power_of_two()], vec![p.boost_free_l])?;
    let g = GaussianState::centered(vec![Complex64::new(1.0, 0.0)], Complex64::new(1.0, 0.0));
    let (free_gap, free_rows) = boost_gap(p, p.boost_free_t_end, PotentialSpec::free(1), wide, &g, BoostRegime::Free)?;
    checks.push(Check::le("boost_free_center_error", free_gap, p.boost_tolerance));

    let mut gausson = WaveField::from_gaussian(grid.clone(), &phi, PotentialSpec::isotropic_confining(1, w)?, p.lambda, 0.0)?;
    gausson.epsilon = gausson.default_epsilon();
    let mut noise = random_sigma_perturbation(&grid, seed, 4.0, 2.0)?;
    for z in &mut noise {
        *z *= p.gronwall_noise;
    }
    let probe = l2_stability_probe(&gausson, &noise, p.gronwall_t_end, p.dt, 10)?;
    checks.push(Check::le("gronwall_ratio_over_bound", probe.max_ratio_over_bound, p.gronwall_tolerance));

    let mut rows: Vec<Vec<f64>> = conf_rows.into_iter().map(|mut r| {
        r.insert(0, 0.0);
        r
    }).collect();
    rows.extend(free_rows.into_iter().map(|mut r| {
        r.insert(0, 1.0);
        r
    }));
    let probe_rows: Vec<Vec<f64>> = probe
        .times
        .iter()
        .zip(probe.ratios.iter().zip(&probe.bounds))
        .map(|(t, (r, b))| vec![*t, *r, *b])
        .collect();
    Ok(Outcome {
        checks,
        results: json!({
            "scaling": scaling,
            "boost_confining_center_error": conf_gap,
            "boost_free_center_error": free_gap,
            "gausson_kappa": kappa,
            "gronwall_max_ratio_over_bound": probe.max_ratio_over_bound,
            "gronwall_max_ratio": probe.ratios.iter().cloned().fold(0.0f64, f64::max),
        }),
        series: vec![
            Series::from_rows("boost_centers", &["case", "t", "center", "expected"], &rows)?,
            Series::from_rows("gronwall", &["t", "ratio", "bound"], &probe_rows)?,
        ],
    })
}

