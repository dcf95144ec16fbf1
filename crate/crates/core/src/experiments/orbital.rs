//! Orbital stability of the generalized Gausson under seeded Σ noise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Check, Outcome, Series};
use crate::error::Result;
use crate::variational::{orbital_stability_experiment, OrbitalParams, OrbitalReport, Perturbation, VariationalContext};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub lambda: f64,
    pub kappa: f64,
    pub nu: f64,
    pub eta: f64,
    pub t_end: f64,
    pub dt: f64,
    pub save_every: usize,
    pub n: usize,
    pub l: f64,
    /// Seeds `seed, seed + 1, …`.
    pub seeds: u64,
    pub perturbation: Perturbation,
    pub max_distance: f64,
}

pub fn run(p: &Params, seed: u64) -> Result<Outcome> {
    let ctx = VariationalContext::new(p.lambda, p.kappa, p.nu, 1)?;
    let reports: Vec<OrbitalReport> = (0..p.seeds)
        .into_par_iter()
        .map(|i| {
            let op = OrbitalParams {
                eta: p.eta,
                t_end: p.t_end,
                dt: p.dt,
                save_every: p.save_every,
                seed: seed.wrapping_add(i),
                n: p.n,
                l: p.l,
                perturbation: p.perturbation,
            };
            orbital_stability_experiment(&ctx, &op)
        })
        .collect::<Result<_>>()?;

    let mut checks = Vec::new();
    let mut per_seed = Vec::new();
    let mut rows = Vec::new();
    for r in &reports {
        checks.push(Check::le(format!("sup_orbit_distance_seed_{}", r.seed), r.sup_dist, p.max_distance));
        per_seed.push(json!({
            "seed": r.seed,
            "sup_dist": r.sup_dist,
            "time_of_sup": r.time_of_sup,
            "initial_distance": r.initial_dist,
            "max_abs_nehari": r.max_abs_nehari,
        }));
        for s in &r.samples {
            rows.push(vec![r.seed as f64, s.t, s.dist, s.theta_star, s.nehari, s.rho]);
        }
    }
    let worst = reports.iter().map(|r| r.sup_dist).fold(0.0f64, f64::max);
    Ok(Outcome {
        checks,
        results: json!({
            "ground_energy": ctx.ground_energy(),
            "omega": ctx.omega_sq.sqrt(),
            "eta": p.eta,
            "worst_sup_dist": worst,
            "seeds": per_seed,
        }),
        series: vec![Series::from_rows(
            "orbital_distance",
            &["seed", "t", "distance", "theta_star", "nehari", "rho"],
            &rows,
        )?],
    })
}
