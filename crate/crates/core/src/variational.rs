//! Action, Nehari functional and ground energy for the confined equation
//! with `V = κ(κ+2λ)|x|²/2`, and an orbital-stability experiment for the
//! Gausson.
//!
//! ```text
//! S_ν(u) = E(u) + ν‖u‖²
//! I_ν(u) = ‖∇u‖² + ω²‖xu‖² + 2λ∫|u|² ln|u|² + 2ν‖u‖² = 2S_ν(u) + 2λ‖u‖²
//! D(ν)   = −λ π^{d/2} κ^{−d/2} e^{−(ν + κd/2)/λ}
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{WaveField, DENSITY_FLOOR};
use crate::grid::{Grid, Spectral};
use crate::potentials::{gausson_frequency, gausson_profile, PotentialSpec};
use crate::solver::{run_with, RunOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalContext {
    pub lambda: f64,
    pub kappa: f64,
    pub omega_sq: f64,
    pub nu: f64,
    pub d: usize,
}

impl VariationalContext {
    pub fn new(lambda: f64, kappa: f64, nu: f64, d: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::invalid(format!("kappa must be > 0, got {kappa}")));
        }
        if !nu.is_finite() || d == 0 {
            return Err(Error::invalid("nu must be finite and d >= 1"));
        }
        Ok(VariationalContext {
            lambda,
            kappa,
            omega_sq: kappa * (kappa + 2.0 * lambda),
            nu,
            d,
        })
    }

    pub fn potential(&self) -> PotentialSpec {
        let w = gausson_frequency(self.lambda, self.kappa).unwrap_or(self.omega_sq.sqrt());
        PotentialSpec::isotropic_confining(self.d, w).unwrap_or_else(|_| PotentialSpec::free(self.d))
    }

    /// `φ_ν` sampled on `grid`, with `ε = 0`.
    pub fn gausson(&self, grid: Grid) -> Result<WaveField> {
        let s = gausson_profile(self.nu, self.lambda, self.kappa, self.d)?;
        WaveField::from_gaussian(grid, &s, self.potential(), self.lambda, 0.0)
    }

    pub fn ground_energy(&self) -> f64 {
        ground_energy(self)
    }
}

pub fn ground_energy(ctx: &VariationalContext) -> f64 {
    let d = ctx.d as f64;
    -ctx.lambda * (PI / ctx.kappa).powf(d / 2.0) * (-(ctx.nu + ctx.kappa * d / 2.0) / ctx.lambda).exp()
}

/// The quadratures entering the functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadratures {
    pub mass: f64,
    /// `‖∇u‖²`.
    pub gradient_sq: f64,
    /// `‖xu‖²`.
    pub second_moment: f64,
    /// `∫|u|² ln|u|²`.
    pub entropy: f64,
}

pub fn quadratures(u: &WaveField) -> Quadratures {
    let mut sp = Spectral::new(&u.grid);
    quadratures_with(u, &mut sp)
}

fn grad_sq_spectral(grid: &Grid, hat: &[Complex64], other: &[Complex64]) -> Complex64 {
    let d = grid.dim();
    let ks: Vec<Vec<f64>> = (0..d).map(|j| grid.wavenumbers(j)).collect();
    let mut s = Complex64::new(0.0, 0.0);
    for (i, (a, b)) in hat.iter().zip(other).enumerate() {
        let mut k2 = 0.0;
        for (j, k) in ks.iter().enumerate() {
            let kk = k[grid.axis_index(i, j)];
            k2 += kk * kk;
        }
        s += k2 * a * b.conj();
    }
    s * grid.cell_volume() / grid.len() as f64
}

fn r2_field(grid: &Grid) -> Vec<f64> {
    let mut r2 = vec![0.0; grid.len()];
    grid.for_each_point(|i, x| r2[i] = x.iter().map(|v| v * v).sum());
    r2
}

fn quadratures_with(u: &WaveField, sp: &mut Spectral) -> Quadratures {
    let g = &u.grid;
    let dv = g.cell_volume();
    let mut hat = u.values.clone();
    sp.forward(&mut hat);
    let gradient_sq = grad_sq_spectral(g, &hat, &hat).re;
    let r2 = r2_field(g);
    let (mut m, mut x2, mut ent) = (0.0, 0.0, 0.0);
    for (v, r) in u.values.iter().zip(&r2) {
        let rho = v.norm_sqr();
        m += rho;
        x2 += r * rho;
        if rho > 0.0 {
            ent += rho * rho.max(DENSITY_FLOOR).ln();
        }
    }
    Quadratures {
        mass: m * dv,
        gradient_sq,
        second_moment: x2 * dv,
        entropy: ent * dv,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionNehari {
    pub action: f64,
    pub nehari: f64,
    /// `I_ν − 2S_ν − 2λ‖u‖²`.
    pub residual: f64,
    pub mass: f64,
}

pub fn action_and_nehari(u: &WaveField, ctx: &VariationalContext) -> Result<ActionNehari> {
    if u.dim() != ctx.d {
        return Err(Error::DimensionMismatch {
            expected: ctx.d,
            got: u.dim(),
        });
    }
    let q = quadratures(u);
    from_quadratures(&q, ctx)
}

fn from_quadratures(q: &Quadratures, ctx: &VariationalContext) -> Result<ActionNehari> {
    if !(q.mass > 0.0) {
        return Err(Error::invalid("the functionals need a nonzero field"));
    }
    let (lam, w2, nu) = (ctx.lambda, ctx.omega_sq, ctx.nu);
    let energy = 0.5 * q.gradient_sq + 0.5 * w2 * q.second_moment + lam * (q.entropy - q.mass);
    let action = energy + nu * q.mass;
    let nehari = q.gradient_sq + w2 * q.second_moment + 2.0 * lam * q.entropy + 2.0 * nu * q.mass;
    Ok(ActionNehari {
        action,
        nehari,
        residual: nehari - 2.0 * action - 2.0 * lam * q.mass,
        mass: q.mass,
    })
}

/// Factor `ρ` with `I_ν(ρu) = 0`. From `I_ν(ku) = k²(I_ν(u) + 2λ‖u‖² ln k²)`,
/// `ρ = exp(−I_ν(u) / (4λ‖u‖²))`.
pub fn nehari_factor(u: &WaveField, ctx: &VariationalContext) -> Result<f64> {
    let an = action_and_nehari(u, ctx)?;
    Ok((-an.nehari / (4.0 * ctx.lambda * an.mass)).exp())
}

/// `‖∇u‖² + κ²‖xu‖² − κd‖u‖²`, nonnegative with equality exactly on
/// multiples of `e^{−κ|x|²/2}`.
pub fn spectral_floor_check(u: &WaveField, kappa: f64) -> f64 {
    let q = quadratures(u);
    q.gradient_sq + kappa * kappa * q.second_moment - kappa * u.dim() as f64 * q.mass
}

/// `⟨u, w⟩_Σ = ∫ u w̄ + ∫ ∇u·∇w̄ + ∫ |x|² u w̄`.
pub fn sigma_inner(u: &WaveField, w: &WaveField) -> Result<Complex64> {
    u.check_same_grid(w)?;
    let mut sp = Spectral::new(&u.grid);
    Ok(sigma_inner_values(&u.grid, &mut sp, &u.values, &w.values))
}

fn sigma_inner_values(grid: &Grid, sp: &mut Spectral, u: &[Complex64], w: &[Complex64]) -> Complex64 {
    let mut uh = u.to_vec();
    let mut wh = w.to_vec();
    sp.forward(&mut uh);
    sp.forward(&mut wh);
    let grad = grad_sq_spectral(grid, &uh, &wh);
    let r2 = r2_field(grid);
    let direct: Complex64 = u
        .iter()
        .zip(w)
        .zip(&r2)
        .map(|((a, b), r)| (1.0 + r) * a * b.conj())
        .sum();
    direct * grid.cell_volume() + grad
}

pub fn sigma_norm(u: &WaveField) -> f64 {
    let mut sp = Spectral::new(&u.grid);
    sigma_inner_values(&u.grid, &mut sp, &u.values, &u.values).re.max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitDistance {
    pub dist: f64,
    pub theta_star: f64,
}

/// `inf_θ ‖u − e^{iθ}φ‖_Σ`, attained at `θ* = arg⟨u, φ⟩_Σ`.
pub fn sigma_distance_to_orbit(u: &WaveField, phi: &WaveField) -> Result<OrbitDistance> {
    u.check_same_grid(phi)?;
    let mut sp = Spectral::new(&u.grid);
    Ok(orbit_distance_with(&mut sp, u, phi))
}

fn orbit_distance_with(sp: &mut Spectral, u: &WaveField, phi: &WaveField) -> OrbitDistance {
    let g = &u.grid;
    let ip = sigma_inner_values(g, sp, &u.values, &phi.values);
    let theta = ip.arg();
    let rot = Complex64::from_polar(1.0, theta);
    let diff: Vec<Complex64> = u.values.iter().zip(&phi.values).map(|(a, b)| a - rot * b).collect();
    let dist = sigma_inner_values(g, sp, &diff, &diff).re.max(0.0).sqrt();
    OrbitDistance {
        dist,
        theta_star: theta.rem_euclid(2.0 * PI),
    }
}

/// Seeded complex Gaussian noise restricted to `|k_j| ≤ k_max`, localized by
/// `e^{−|x|²/(2 s²)}` and normalized to unit Σ norm.
pub fn random_sigma_perturbation(grid: &Grid, seed: u64, k_max: f64, envelope: f64) -> Result<Vec<Complex64>> {
    if !(k_max > 0.0 && envelope > 0.0) {
        return Err(Error::invalid("k_max and envelope must be > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ks: Vec<Vec<f64>> = (0..grid.dim()).map(|j| grid.wavenumbers(j)).collect();
    let mut hat = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (i, h) in hat.iter_mut().enumerate() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let inside = ks.iter().enumerate().all(|(j, k)| k[grid.axis_index(i, j)].abs() <= k_max);
        if inside {
            *h = Complex64::new(re, im);
        }
    }
    let mut sp = Spectral::new(grid);
    sp.inverse(&mut hat);
    let s2 = envelope * envelope;
    grid.for_each_point(|i, x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        hat[i] *= (-r2 / (2.0 * s2)).exp();
    });
    let n = sigma_inner_values(grid, &mut sp, &hat, &hat).re.sqrt();
    if !(n > 0.0) {
        return Err(Error::invalid("perturbation vanished"));
    }
    for v in &mut hat {
        *v /= n;
    }
    Ok(hat)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Perturbation {
    /// `φ + η w` with `w` seeded Σ-normalized noise.
    Random { k_max: f64, envelope: f64 },
    /// `e^{iη} φ`.
    Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitalParams {
    pub eta: f64,
    pub t_end: f64,
    pub dt: f64,
    pub save_every: usize,
    pub seed: u64,
    pub n: usize,
    pub l: f64,
    pub perturbation: Perturbation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitalSample {
    pub t: f64,
    pub dist: f64,
    pub theta_star: f64,
    pub nehari: f64,
    /// `exp(−I_ν/(4λ‖u‖²))`.
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitalReport {
    pub eta: f64,
    pub seed: u64,
    pub sup_dist: f64,
    pub time_of_sup: f64,
    pub initial_dist: f64,
    pub max_abs_nehari: f64,
    pub samples: Vec<OrbitalSample>,
}

/// Perturb `φ_ν`, evolve in `V = κ(κ+2λ)|x|²/2`, and track the Σ distance
/// to the orbit `{e^{iθ}φ_ν}` on saved samples.
pub fn orbital_stability_experiment(ctx: &VariationalContext, p: &OrbitalParams) -> Result<OrbitalReport> {
    if !(p.eta >= 0.0 && p.eta.is_finite()) {
        return Err(Error::invalid(format!("eta must be >= 0, got {}", p.eta)));
    }
    let grid = Grid::uniform(ctx.d, p.n, p.l)?;
    let phi = ctx.gausson(grid.clone())?;
    let mut u0 = phi.clone();
    match p.perturbation {
        Perturbation::Random { k_max, envelope } => {
            if p.eta > 0.0 {
                let w = random_sigma_perturbation(&grid, p.seed, k_max, envelope)?;
                for (v, wi) in u0.values.iter_mut().zip(&w) {
                    *v += p.eta * wi;
                }
            }
        }
        Perturbation::Phase => u0.scale(Complex64::from_polar(1.0, p.eta)),
    }
    u0.epsilon = u0.default_epsilon();
    let mut sp = Spectral::new(&grid);
    let mut samples = Vec::new();
    let opts = RunOptions::new(p.dt, p.t_end, p.save_every);
    run_with(u0, &opts, |f, _| {
        let od = orbit_distance_with(&mut sp, f, &phi);
        let an = from_quadratures(&quadratures_with(f, &mut sp), ctx)?;
        samples.push(OrbitalSample {
            t: f.t,
            dist: od.dist,
            theta_star: od.theta_star,
            nehari: an.nehari,
            rho: (-an.nehari / (4.0 * ctx.lambda * an.mass)).exp(),
        });
        Ok(())
    })?;
    let (mut sup, mut t_sup) = (0.0, 0.0);
    for s in &samples {
        if s.dist > sup {
            sup = s.dist;
            t_sup = s.t;
        }
    }
    Ok(OrbitalReport {
        eta: p.eta,
        seed: p.seed,
        sup_dist: sup,
        time_of_sup: t_sup,
        initial_dist: samples.first().map_or(0.0, |s| s.dist),
        max_abs_nehari: samples.iter().fold(0.0f64, |m, s| m.max(s.nehari.abs())),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianState;
    use proptest::prelude::*;

    fn ctx() -> VariationalContext {
        VariationalContext::new(1.0, 1.0, -0.5, 1).unwrap()
    }

    fn grid() -> Grid {
        Grid::uniform(1, 512, 24.0).unwrap()
    }

    #[test]
    fn ground_energy_values() {
        assert!((ground_energy(&ctx()) + PI.sqrt()).abs() < 1e-15);
        let mut prev = f64::NEG_INFINITY;
        for nu in [-3.0, -1.0, 0.0, 2.0] {
            let c = VariationalContext::new(0.7, 1.3, nu, 2).unwrap();
            let dn = c.ground_energy();
            assert!(dn < 0.0 && dn > prev);
            prev = dn;
        }
        assert_eq!(ctx().omega_sq, 3.0);
    }

    #[test]
    fn gausson_is_on_the_constraint() {
        for c in [ctx(), VariationalContext::new(0.5, 2.0, 0.3, 1).unwrap()] {
            let phi = c.gausson(grid()).unwrap();
            let an = action_and_nehari(&phi, &c).unwrap();
            let dn = c.ground_energy();
            assert!(an.nehari.abs() <= 1e-8 * dn.abs(), "{}", an.nehari);
            assert!((an.action - dn).abs() <= 1e-8 * dn.abs());
            assert!((nehari_factor(&phi, &c).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn floor_gap_cases() {
        let kappa = 1.5;
        let g = grid();
        let pot = PotentialSpec::free(1);
        let ground = WaveField::from_fn(g.clone(), pot.clone(), 1.0, 0.0, |x| {
            Complex64::new((-kappa * x[0] * x[0] / 2.0).exp(), 0.0)
        })
        .unwrap();
        assert!(spectral_floor_check(&ground, kappa).abs() < 1e-8);
        let excited = WaveField::from_fn(g, pot, 1.0, 0.0, |x| {
            Complex64::new(x[0] * (-kappa * x[0] * x[0] / 2.0).exp(), 0.0)
        })
        .unwrap();
        let gap = spectral_floor_check(&excited, kappa);
        assert!((gap - 2.0 * kappa * excited.mass()).abs() < 1e-10);
    }

    #[test]
    fn orbit_distance_trivial_cases() {
        let phi = ctx().gausson(grid()).unwrap();
        let mut u = phi.clone();
        u.scale(Complex64::from_polar(1.0, 0.7));
        let od = sigma_distance_to_orbit(&u, &phi).unwrap();
        assert!(od.dist < 1e-12 && (od.theta_star - 0.7).abs() < 1e-12);
        let mut m = phi.clone();
        m.scale(Complex64::new(-1.0, 0.0));
        let od = sigma_distance_to_orbit(&m, &phi).unwrap();
        assert!(od.dist < 1e-12 && (od.theta_star - PI).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_perturbation_distance() {
        let g = grid();
        let phi = ctx().gausson(g.clone()).unwrap();
        let w = random_sigma_perturbation(&g, 7, 4.0, 2.0).unwrap();
        let mut psi = phi.clone();
        psi.values = w;
        // Project out φ in Σ so ψ ⊥ φ.
        let c = sigma_inner(&psi, &phi).unwrap() / sigma_inner(&phi, &phi).unwrap();
        for (a, b) in psi.values.iter_mut().zip(&phi.values) {
            *a -= c * b;
        }
        let eps = 1e-3;
        let mut u = phi.clone();
        for (a, b) in u.values.iter_mut().zip(&psi.values) {
            *a += eps * b;
        }
        let od = sigma_distance_to_orbit(&u, &phi).unwrap();
        let expect = eps * sigma_norm(&psi);
        assert!((od.dist - expect).abs() < 1e-10, "{} vs {expect}", od.dist);
    }

    #[test]
    fn perturbation_is_seeded_and_normalized() {
        let g = grid();
        let a = random_sigma_perturbation(&g, 3, 4.0, 2.0).unwrap();
        let b = random_sigma_perturbation(&g, 3, 4.0, 2.0).unwrap();
        let c = random_sigma_perturbation(&g, 4, 4.0, 2.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let f = WaveField::new(g, a, PotentialSpec::free(1), 1.0, 0.0).unwrap();
        assert!((sigma_norm(&f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unperturbed_orbit_stays_close() {
        let p = OrbitalParams {
            eta: 0.0,
            t_end: 2.0,
            dt: 1e-3,
            save_every: 200,
            seed: 0,
            n: 256,
            l: 24.0,
            perturbation: Perturbation::Random {
                k_max: 4.0,
                envelope: 2.0,
            },
        };
        let r = orbital_stability_experiment(&ctx(), &p).unwrap();
        assert!(r.sup_dist < 1e-4, "{}", r.sup_dist);
        let phase = OrbitalParams {
            eta: 0.01,
            perturbation: Perturbation::Phase,
            ..p
        };
        assert!(orbital_stability_experiment(&ctx(), &phase).unwrap().sup_dist < 1e-4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn identity_and_nehari_scaling(
            a_re in 0.3f64..3.0, a_im in -2.0f64..2.0, amp in 0.2f64..3.0, q in -1.0f64..1.0
        ) {
            let c = ctx();
            let mut s = GaussianState::centered(vec![Complex64::new(a_re, a_im)], Complex64::new(amp, 0.0));
            s.centers[0] = q;
            let u = WaveField::from_gaussian(grid(), &s, c.potential(), 1.0, 0.0).unwrap();
            let an = action_and_nehari(&u, &c).unwrap();
            prop_assert!(an.residual.abs() <= 1e-10 * (1.0 + an.nehari.abs()));
            let rho = nehari_factor(&u, &c).unwrap();
            let mut f = u.clone();
            f.scale(Complex64::new(rho, 0.0));
            let fn_ = action_and_nehari(&f, &c).unwrap();
            let scale = f.mass() * (1.0 + an.nehari.abs() / an.mass);
            prop_assert!(fn_.nehari.abs() <= 1e-8 * scale, "{} {}", fn_.nehari, scale);
            prop_assert!(f.mass() <= c.ground_energy().abs() / c.lambda + 1e-6);
        }
    }
}
