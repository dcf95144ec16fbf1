//! Product data stay products: a 2-D run from `f ⊗ g` against the outer
//! product of the two 1-D runs. Exact only without regularization, so the
//! runs use `ε = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{data::mixture_1d, Check, Outcome};
use crate::error::Result;
use crate::field::WaveField;
use crate::grid::Grid;
use crate::potentials::{AxisPotential, PotentialSpec};
use crate::solver::{self, RunOptions};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub lambda: f64,
    /// Confining frequency of the first axis; the second is free.
    pub omega: f64,
    pub n: [usize; 2],
    pub l: [f64; 2],
    pub dt: f64,
    pub t_end: f64,
    pub components: usize,
    pub tolerance: f64,
}

fn evolve(axes: Vec<AxisPotential>, grid: Grid, values: Vec<Complex64>, p: &Params) -> Result<WaveField> {
    let spec = PotentialSpec::new(axes)?;
    let u = WaveField::new(grid, values, spec, p.lambda, 0.0)?;
    let steps = (p.t_end / p.dt).round().max(1.0) as usize;
    Ok(solver::run(u, &RunOptions::new(p.dt, p.t_end, steps))?.field)
}

/// Relative L² gap between the 2-D run from `f ⊗ g` and `f(T) ⊗ g(T)`.
fn discrepancy(p: &Params, f: Vec<Complex64>, g: Vec<Complex64>) -> Result<f64> {
    let ax = [AxisPotential::confining(p.omega), AxisPotential::free()];
    let gx = Grid::new(vec![p.n[0]], vec![p.l[0]])?;
    let gy = Grid::new(vec![p.n[1]], vec![p.l[1]])?;
    let g2 = Grid::new(p.n.to_vec(), p.l.to_vec())?;
    let outer = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> {
        a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
    };
    let joint = evolve(ax.to_vec(), g2, outer(&f, &g), p)?;
    let fx = evolve(vec![ax[0]], gx, f, p)?;
    let gy = evolve(vec![ax[1]], gy, g, p)?;
    let mut prod = joint.clone();
    prod.values = outer(&fx.values, &gy.values);
    Ok(joint.l2_distance(&prod)? / joint.mass().sqrt())
}

pub fn run(p: &Params, seed: u64) -> Result<Outcome> {
    let x = Grid::new(vec![p.n[0]], vec![p.l[0]])?.coords(0);
    let y = Grid::new(vec![p.n[1]], vec![p.l[1]])?.coords(0);
    let gamma = |c: &[f64]| -> Vec<Complex64> { c.iter().map(|&t| Complex64::new((-0.5 * t * t).exp(), 0.0)).collect() };

    let gauss = discrepancy(p, gamma(&x), gamma(&y))?;
    let mixed = discrepancy(p, mixture_1d(&x, seed, p.components), gamma(&y))?;
    let checks = vec![
        Check::le("gaussian_product_l2_discrepancy", gauss, p.tolerance),
        Check::le("mixture_product_l2_discrepancy", mixed, p.tolerance),
    ];
    Ok(Outcome {
        checks,
        results: json!({
            "gaussian_product_l2_discrepancy": gauss,
            "mixture_product_l2_discrepancy": mixed,
        }),
        series: Vec::new(),
    })
}

