//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the output.
//! The process fails if any criterion fails, except those listed in
//! `KNOWN_UNATTAINABLE`, which must fail (a silent fix would go unnoticed
//! otherwise).

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lognls::diagnostics::{dual_logsob_residual, relative_entropy_and_ck};
use lognls::experiments::{run_experiment, ExperimentName, Report};
use lognls::field::WaveField;
use lognls::gaussian::{integrate_gaussian, GaussianState};
use lognls::grid::Grid;
use lognls::potentials::PotentialSpec;
use lognls::solver::{run, RunOptions};
use lognls::tau::{free_rate_check, integrate_tau_strided, TauParams};
use lognls::variational::{
    action_and_nehari, random_sigma_perturbation, spectral_floor_check, VariationalContext,
};
use lognls::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const MASS_DRIFT: f64 = 1e-10;
const ENERGY_DRIFT: f64 = 1e-6;
const CONSERVATION_RUNTIME: Duration = Duration::from_secs(60);
const STATIONARITY: f64 = 1e-4;
const GAUSSIAN_ORACLE: f64 = 1e-4;
const STRANG_RATIO: f64 = 3.0;
const FIRST_INTEGRAL: f64 = 1e-8;
const FIXED_POINT: f64 = 1e-12;
const FREE_RATE_BAND: (f64, f64) = (0.9, 1.1);
const FREE_RATE_RUNTIME: Duration = Duration::from_secs(10);
const MU_CROSS: f64 = 1e-6;
const DUAL_LOGSOB_FLOOR: f64 = -1e-8;
const EQUALITY_RESIDUAL: f64 = 1e-8;
const CK_FLOOR: f64 = -1e-9;
const GROUND_ENERGY_REL: f64 = 1e-8;
const NEHARI_REL: f64 = 1e-8;
const FLOOR_GAP: f64 = -1e-8;
const EXCITED_GAP: f64 = 1e-6;
const ORBIT_DISTANCE: f64 = 0.1;
const ORBITAL_RUNTIME: Duration = Duration::from_secs(600);
const MOMENT_REL: f64 = 0.15;
const W1_GROWTH: f64 = 1.0;
const BREATHING_MIN: f64 = 0.1;
const DECOUPLING: f64 = 1e-6;
const BOUND_FACTOR: f64 = 2.0;
const CENTER_LIMIT: f64 = 0.1;
const WIDTH_DIFFERENCE: f64 = 0.2;
const TENSORIZATION: f64 = 1e-6;
const SCALING: f64 = 1e-8;
const BOOST_CENTER: f64 = 1e-4;
const GRONWALL: f64 = 1.0;

/// Criteria that cannot be met as stated, with the reason.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    6,
    "the scaled remainder |mu_inf - tau1/omega - tau0| tau1/ln tau1 grows with tau1",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn experiment(name: ExperimentName) -> Report {
    run_experiment(name, None, 0)
        .unwrap_or_else(|e| panic!("{name}: {e}"))
        .report
}

fn value(r: &Report, check: &str) -> f64 {
    r.checks
        .iter()
        .find(|c| c.name == check)
        .unwrap_or_else(|| panic!("{}: no check `{check}`", r.meta.experiment))
        .value
        .unwrap_or(f64::NAN)
}

fn le(x: f64, tol: f64) -> bool {
    x.is_finite() && x <= tol
}

fn gausson_run(dt: f64) -> (WaveField, WaveField, Vec<lognls::diagnostics::DiagnosticsRecord>, Duration) {
    let ctx = VariationalContext::new(1.0, 1.0, -0.5, 1).unwrap();
    let phi = ctx.gausson(Grid::new(vec![512], vec![24.0]).unwrap()).unwrap();
    let mut u = phi.clone();
    u.epsilon = u.default_epsilon();
    let start = Instant::now();
    let out = run(u, &RunOptions::new(dt, 10.0, 100)).unwrap();
    (phi, out.field, out.records, start.elapsed())
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn criteria_1_2() -> (Outcome, Outcome) {
    let (phi, end, recs, elapsed) = gausson_run(1e-3);
    let (m0, e0) = (recs[0].mass, recs[0].energy_eps);
    let mass = recs.iter().fold(0.0f64, |m, r| m.max((r.mass / m0 - 1.0).abs()));
    let energy = recs.iter().fold(0.0f64, |m, r| m.max((r.energy_eps / e0 - 1.0).abs()));
    let c1 = outcome(
        le(mass, MASS_DRIFT) && le(energy, ENERGY_DRIFT) && elapsed <= CONSERVATION_RUNTIME,
        format!("mass drift {mass:.2e}, E_eps drift {energy:.2e}, runtime {:.1}s", elapsed.as_secs_f64()),
    );
    let modulus: Vec<Complex64> = end.values.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect();
    let dev = rel_l2(&modulus, &phi.values);
    (c1, outcome(le(dev, STATIONARITY), format!("|| |u(T)| - phi || / ||phi|| = {dev:.2e}")))
}

fn criterion_3() -> Outcome {
    let w = 3f64.sqrt();
    let spec = PotentialSpec::isotropic_confining(1, w).unwrap();
    let grid = Grid::new(vec![512], vec![24.0]).unwrap();
    let init = GaussianState::centered(vec![Complex64::new(2.0, 0.0)], Complex64::new(1.0, 0.0));
    let t_end = 5.0;
    let exact = integrate_gaussian(&init, &spec, 1.0, t_end, 1e-4).unwrap();
    let oracle = WaveField::from_gaussian(grid.clone(), exact.last().unwrap(), spec.clone(), 1.0, 0.0).unwrap();
    let err = |dt: f64| {
        let u = WaveField::from_gaussian(grid.clone(), &init, spec.clone(), 1.0, 0.0).unwrap();
        let out = run(u, &RunOptions::new(dt, t_end, usize::MAX)).unwrap();
        rel_l2(&out.field.values, &oracle.values)
    };
    let (fine, coarse) = (err(1e-3), err(2e-3));
    let ratio = coarse / fine;
    outcome(
        le(fine, GAUSSIAN_ORACLE) && ratio >= STRANG_RATIO,
        format!("L2 gap {fine:.2e} at dt=1e-3, ratio {ratio:.2} on doubling dt"),
    )
}

fn criteria_4_5_6() -> (Outcome, Outcome, Outcome) {
    let r = experiment(ExperimentName::TauAsymptotics);
    let residuals: Vec<f64> = ["free", "confining", "repulsive"]
        .iter()
        .map(|v| value(&r, &format!("first_integral_residual_{v}")))
        .collect();
    let fixed = value(&r, "fixed_point_deviation");
    let worst = residuals.iter().cloned().fold(0.0f64, f64::max);
    let c4 = outcome(
        residuals.iter().all(|&x| le(x, FIRST_INTEGRAL)) && le(fixed, FIXED_POINT),
        format!("max first-integral residual {worst:.2e}, fixed point deviation {fixed:.1e}"),
    );

    let start = Instant::now();
    let traj = integrate_tau_strided(TauParams::free(1.0), 1e6, 0.05, 1000).unwrap();
    let elapsed = start.elapsed();
    let last = *free_rate_check(&traj).unwrap().last().unwrap();
    // Independent form of the same ratio.
    let ratio = traj.tau.last().unwrap() / (2e6 * 1e6f64.ln().sqrt());
    let c5 = outcome(
        (last.t - 1e6).abs() < 1e-6
            && (FREE_RATE_BAND.0..=FREE_RATE_BAND.1).contains(&ratio)
            && elapsed <= FREE_RATE_RUNTIME,
        format!("tau(1e6)/(2e6 sqrt(ln 1e6)) = {ratio:.4}, {:.2}s", elapsed.as_secs_f64()),
    );

    let cross: Vec<f64> = ["0", "10", "100"]
        .iter()
        .map(|t| value(&r, &format!("mu_cross_oracle_tau1_{t}")))
        .collect();
    let increase = value(&r, "expansion_remainder_max_increase");
    let scaled = &r.results["expansion"]["remainder_scaled"];
    let half = &r.results["expansion"]["remainder_scaled_half_centring"];
    let c6 = outcome(
        cross.iter().all(|&x| le(x, MU_CROSS)) && le(increase, 0.0),
        format!(
            "mu cross-oracle gaps {:.1e} {:.1e} {:.1e}; scaled remainder {scaled} (max increase {increase:.3e}); \
             with (tau0 + tau1/omega)/2 centring: {half}",
            cross[0], cross[1], cross[2]
        ),
    );
    (c4, c5, c6)
}

/// Seeded 1-D Gaussian-mixture densities on a fixed grid.
fn mixture_density(rng: &mut ChaCha8Rng, x: &[f64]) -> Vec<f64> {
    let k = rng.random_range(1..=4);
    let parts: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| {
            (
                rng.random_range(0.1..1.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(0.4..2.0),
            )
        })
        .collect();
    x.iter()
        .map(|&x| parts.iter().map(|&(w, c, s)| w * (-((x - c) / s).powi(2)).exp()).sum())
        .collect()
}

fn criterion_7() -> Outcome {
    let n = 2048;
    let l = 30.0;
    let h = l / n as f64;
    let x: Vec<f64> = (0..n).map(|k| -l / 2.0 + k as f64 * h).collect();
    let r2: Vec<f64> = x.iter().map(|x| x * x).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut min_res, mut min_slack) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..1000 {
        let rho = mixture_density(&mut rng, &x);
        let a = rng.random_range(0.2..3.0);
        min_res = min_res.min(dual_logsob_residual(&rho, &r2, h, 1, a).unwrap().residual);
        let m: f64 = rho.iter().sum::<f64>() * h;
        let mu: Vec<f64> = rho.iter().map(|p| p / m).collect();
        let nu: Vec<f64> = x.iter().map(|x| (a / PI).sqrt() * (-a * x * x).exp()).collect();
        min_slack = min_slack.min(relative_entropy_and_ck(&mu, &nu, h).unwrap().slack);
    }
    let mut eq = 0.0f64;
    for a in [0.5, 1.0, 2.0] {
        let rho: Vec<f64> = r2.iter().map(|r| 3.0 * (-a * r).exp()).collect();
        eq = eq.max(dual_logsob_residual(&rho, &r2, h, 1, a).unwrap().residual.abs());
    }
    outcome(
        min_res >= DUAL_LOGSOB_FLOOR && le(eq, EQUALITY_RESIDUAL) && min_slack >= CK_FLOOR,
        format!("min residual {min_res:.3e}, equality residual {eq:.1e}, min CK slack {min_slack:.3e}"),
    )
}

fn criterion_8() -> Outcome {
    let mut worst_s = 0.0f64;
    let mut worst_i = 0.0f64;
    for (lambda, kappa, nu, d, n) in [(1.0, 1.0, -0.5, 1, 512), (0.7, 1.3, 0.4, 1, 512), (1.0, 2.0, -1.0, 2, 128)] {
        let ctx = VariationalContext::new(lambda, kappa, nu, d).unwrap();
        let phi = ctx.gausson(Grid::uniform(d, n, 16.0).unwrap()).unwrap();
        let an = action_and_nehari(&phi, &ctx).unwrap();
        let df = d as f64;
        let closed = -lambda * PI.powf(df / 2.0) * kappa.powf(-df / 2.0) * (-(nu + kappa * df / 2.0) / lambda).exp();
        worst_s = worst_s.max((an.action / closed - 1.0).abs());
        worst_i = worst_i.max(an.nehari.abs() / closed.abs());
    }
    let kappa = 1.0;
    let grid = Grid::new(vec![512], vec![24.0]).unwrap();
    let mut min_gap = f64::INFINITY;
    for seed in 0..100 {
        let w = random_sigma_perturbation(&grid, seed, 4.0, 2.0).unwrap();
        let u = WaveField::new(grid.clone(), w, PotentialSpec::free(1), 1.0, 0.0).unwrap();
        min_gap = min_gap.min(spectral_floor_check(&u, kappa));
    }
    let excited = WaveField::from_fn(grid, PotentialSpec::free(1), 1.0, 0.0, |x| {
        Complex64::new(x[0] * (-kappa * x[0] * x[0] / 2.0).exp(), 0.0)
    })
    .unwrap();
    let ex = (spectral_floor_check(&excited, kappa) - 2.0 * kappa * excited.mass()).abs();
    outcome(
        le(worst_s, GROUND_ENERGY_REL) && le(worst_i, NEHARI_REL) && min_gap >= FLOOR_GAP && le(ex, EXCITED_GAP),
        format!(
            "S vs D(nu) {worst_s:.1e}, |I|/|D| {worst_i:.1e}, min floor gap {min_gap:.3e}, excited-mode error {ex:.1e}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let r = experiment(ExperimentName::OrbitalStability);
    let elapsed = start.elapsed();
    let sups: Vec<f64> = r.checks.iter().filter_map(|c| c.value).collect();
    let worst = sups.iter().cloned().fold(0.0f64, f64::max);
    outcome(
        sups.len() == 5 && sups.iter().all(|&s| le(s, ORBIT_DISTANCE)) && elapsed <= ORBITAL_RUNTIME,
        format!("{} seeds, worst sup distance {worst:.3e}, {:.1}s", sups.len(), elapsed.as_secs_f64()),
    )
}

fn universality(r: &Report, prefix: &str) -> (bool, String) {
    let m2 = value(r, &format!("{prefix}second_moment_rel_error"));
    let trend = value(r, &format!("{prefix}second_moment_deviation_trend"));
    let w1 = value(r, &format!("{prefix}w1_sqrt_log_growth"));
    (
        le(m2, MOMENT_REL) && le(trend, 0.0) && le(w1, W1_GROWTH),
        format!("m2 rel error {m2:.3e}, deviation trend {trend:.2e}, W1 sqrt(ln t) end/start {w1:.4}"),
    )
}

fn criterion_10() -> Outcome {
    let r = experiment(ExperimentName::FreeUniversality);
    let (ok, detail) = universality(&r, "");
    outcome(ok, detail)
}

fn criterion_11() -> Outcome {
    let r = experiment(ExperimentName::PartialConfinement);
    let (ok, detail) = universality(&r, "y_");
    let breathing = value(&r, "x_prime_breathing_amplitude");
    let decoupling = value(&r, "x_prime_width_vs_1d_run");
    outcome(
        ok && breathing >= BREATHING_MIN && le(decoupling, DECOUPLING),
        format!("{detail}; x' breathing {breathing:.3}, x' vs 1-D run {decoupling:.1e}"),
    )
}

fn criterion_12() -> Outcome {
    let rate = experiment(ExperimentName::RepulsiveRate);
    let growth: Vec<f64> = ["mass_growth", "second_moment_growth", "llogl_growth"]
        .iter()
        .map(|n| value(&rate, n))
        .collect();
    let limit = value(&rate, "center_limit_rel_error");
    let nonu = experiment(ExperimentName::RepulsiveNonuniversality);
    let diff = value(&nonu, "limiting_width_relative_difference");
    let pde = value(&nonu, "pde_width_relative_difference");
    outcome(
        growth.iter().all(|&g| le(g, BOUND_FACTOR))
            && le(limit, CENTER_LIMIT)
            && diff >= WIDTH_DIFFERENCE
            && pde >= WIDTH_DIFFERENCE,
        format!(
            "max/initial {:.3} {:.3} {:.3}; I2 limit error {limit:.2e}; width difference {diff:.3} (PDE {pde:.3})",
            growth[0], growth[1], growth[2]
        ),
    )
}

fn criterion_13() -> Outcome {
    let t = experiment(ExperimentName::Tensorization);
    let tens = value(&t, "gaussian_product_l2_discrepancy").max(value(&t, "mixture_product_l2_discrepancy"));
    let inv = experiment(ExperimentName::InvarianceSuite);
    let identity = value(&inv, "scaling_k_1_l2_gap");
    let scaling = value(&inv, "scaling_k_2_l2_gap").max(value(&inv, "scaling_k_0.5_l2_gap"));
    let boost = value(&inv, "boost_confining_center_error").max(value(&inv, "boost_free_center_error"));
    let gronwall = value(&inv, "gronwall_ratio_over_bound");
    outcome(
        le(tens, TENSORIZATION) && identity == 0.0 && le(scaling, SCALING) && le(boost, BOOST_CENTER) && le(gronwall, GRONWALL),
        format!(
            "tensorization {tens:.1e}, scaling {scaling:.1e} (k=1: {identity:e}), boost centre {boost:.1e}, \
             Gronwall ratio/bound {gronwall:.3}"
        ),
    )
}

fn criterion_14() -> Outcome {
    let overrides = serde_json::json!({"t_end": 2.0});
    let once = || {
        let o = run_experiment(ExperimentName::OrbitalStability, Some(&overrides), 11).unwrap();
        let inv = run_experiment(ExperimentName::InvarianceSuite, None, 11).unwrap();
        let mut bytes = o.report.to_json();
        bytes += &inv.report.to_json();
        for s in o.series.iter().chain(&inv.series) {
            bytes += &s.csv;
        }
        bytes
    };
    let (a, b) = (once(), once());
    outcome(a == b, format!("{} bytes of reports and CSV compared", a.len()))
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let (c1, c2) = criteria_1_2();
    results.push((1, "conservation", c1));
    results.push((2, "gausson stationarity", c2));
    results.push((3, "gaussian oracle and Strang order", criterion_3()));
    let (c4, c5, c6) = criteria_4_5_6();
    results.push((4, "tau first integral", c4));
    results.push((5, "free dispersion rate", c5));
    results.push((6, "mu_inf oracles and expansion", c6));
    results.push((7, "dual log-Sobolev and Csiszar-Kullback", criterion_7()));
    results.push((8, "ground energy and spectral floor", criterion_8()));
    results.push((9, "orbital stability", criterion_9()));
    results.push((10, "free universality", criterion_10()));
    results.push((11, "partial confinement", criterion_11()));
    results.push((12, "repulsive regime", criterion_12()));
    results.push((13, "structural invariances", criterion_13()));
    results.push((14, "determinism", criterion_14()));

    let mut unexpected = Vec::new();
    for (id, name, o) in &results {
        let known = KNOWN_UNATTAINABLE.iter().find(|(k, _)| k == id);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:2} {tag} {name}: {}", o.detail);
        match (o.pass, known) {
            (false, Some((_, why))) => println!("             known unattainable: {why}"),
            (false, None) => unexpected.push(format!("criterion {id} failed")),
            (true, Some(_)) => unexpected.push(format!("criterion {id} passed but is listed as unattainable")),
            (true, None) => {}
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: {} criteria, all as expected", results.len());
        ExitCode::SUCCESS
    } else {
        for u in &unexpected {
            eprintln!("acceptance: {u}");
        }
        ExitCode::FAILURE
    }
}
