//! Observables of a field: conserved quantities, moments, entropies,
//! rescalings, marginals, transport distances and inequality residuals.

mod entropy;
mod frames;
mod io;
mod transport;

pub use entropy::{
    dual_logsob_residual, gaussian_kl, relative_entropy_and_ck, DualLogSob, EntropyGap, SUPPORT_CUTOFF,
};
pub use frames::{marginal_current, marginal_density, norm_factor_for, rescale_u_to_v};
pub use io::{
    parse_density_csv, read_density_csv, write_density_csv, write_records_csv, DensitySamples,
};
pub use transport::{normalize_density, trapezoid_cdf, wasserstein1_1d, MASS_TOLERANCE};

use num_complex::Complex64;
use serde::Serialize;

use crate::field::{WaveField, DENSITY_FLOOR};
use crate::grid::Spectral;

/// Observables of one saved sample.
///
/// In a rescaled frame the energies use the frame's effective potential and
/// kinetic coefficients, so `energy` is the dissipated energy of that frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub energy_eps: f64,
    /// `J = Im ∫ conj(u) ∇u`; also the momentum `I₁`.
    pub momentum: Vec<f64>,
    /// `I₂ = ∫ x |u|²`.
    pub center: Vec<f64>,
    pub second_moment: f64,
    /// `∫ |u|² |ln |u|²|`.
    pub llogl: f64,
    /// `½ ‖∂_j u‖²` per axis.
    pub kinetic: Vec<f64>,
    pub w1: Option<Vec<f64>>,
    pub dual_logsob: Option<f64>,
    pub relative_entropy: Option<f64>,
}

impl DiagnosticsRecord {
    /// `‖∇u‖²`.
    pub fn gradient_sq(&self) -> f64 {
        2.0 * self.kinetic.iter().sum::<f64>()
    }
}

/// Quadrature of every observable, with gradients taken spectrally.
pub fn moments(field: &WaveField) -> crate::Result<DiagnosticsRecord> {
    let mut sp = Spectral::new(&field.grid);
    moments_with(field, &mut sp)
}

pub fn moments_with(field: &WaveField, sp: &mut Spectral) -> crate::Result<DiagnosticsRecord> {
    let g = &field.grid;
    let d = g.dim();
    let dv = g.cell_volume();
    let n_total = g.len() as f64;

    let mut hat = field.values.clone();
    sp.forward(&mut hat);
    // Parseval: ∫|∂_j u|² = (dv/N) Σ k_j² |û|²; odd moments drop Nyquist.
    let mut kinetic = vec![0.0; d];
    let mut momentum = vec![0.0; d];
    for j in 0..d {
        let k = g.wavenumbers(j);
        let nyq = g.shape()[j] / 2;
        let s = g.stride(j);
        let n = g.shape()[j];
        let (mut e, mut p) = (0.0, 0.0);
        for (i, v) in hat.iter().enumerate() {
            let kk = (i / s) % n;
            let a = v.norm_sqr();
            e += k[kk] * k[kk] * a;
            if kk != nyq {
                p += k[kk] * a;
            }
        }
        kinetic[j] = 0.5 * e * dv / n_total;
        momentum[j] = p * dv / n_total;
    }

    let coeffs = field.kinetic_coefficients(field.t)?;
    let kin_energy: f64 = kinetic.iter().zip(&coeffs).map(|(k, c)| 2.0 * c * k).sum();
    let pot = field.effective_potential();
    let eps = field.epsilon;
    let lam = field.lambda;
    let coords: Vec<Vec<f64>> = (0..d).map(|j| g.coords(j)).collect();

    let mut mass = 0.0;
    let mut pot_e = 0.0;
    let mut log_e = 0.0;
    let mut log_eps = 0.0;
    let mut center = vec![0.0; d];
    let mut second = 0.0;
    let mut llogl = 0.0;
    let mut idx = vec![0usize; d];
    for (i, v) in field.values.iter().enumerate() {
        let rho = v.norm_sqr();
        mass += rho;
        pot_e += pot[i] * rho;
        let ln_rho = rho.max(DENSITY_FLOOR).ln();
        let rl = if rho > 0.0 { rho * ln_rho } else { 0.0 };
        log_e += rl - rho;
        log_eps += if eps > 0.0 {
            eps * (rho / eps).ln_1p() + rho * (eps + rho).ln() - rho
        } else {
            rl - rho
        };
        llogl += rl.abs();
        let mut r2 = 0.0;
        for j in 0..d {
            let x = coords[j][idx[j]];
            center[j] += x * rho;
            r2 += x * x;
        }
        second += r2 * rho;
        for j in (0..d).rev() {
            idx[j] += 1;
            if idx[j] < g.shape()[j] {
                break;
            }
            idx[j] = 0;
        }
    }
    for c in &mut center {
        *c *= dv;
    }
    Ok(DiagnosticsRecord {
        t: field.t,
        mass: mass * dv,
        energy: kin_energy + pot_e * dv + lam * log_e * dv,
        energy_eps: kin_energy + pot_e * dv + lam * log_eps * dv,
        momentum,
        center,
        second_moment: second * dv,
        llogl: llogl * dv,
        kinetic,
        w1: None,
        dual_logsob: None,
        relative_entropy: None,
    })
}

/// Spectral gradient of a field, one component per axis.
pub fn gradient(field: &WaveField, sp: &mut Spectral) -> Vec<Vec<Complex64>> {
    (0..field.dim()).map(|j| sp.derivative(&field.values, j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianState;
    use crate::grid::Grid;
    use crate::potentials::{gausson_profile, PotentialSpec};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_squared_moments() {
        let grid = Grid::new(vec![256], vec![24.0]).unwrap();
        let s = GaussianState::centered(vec![c(1.0, 0.0)], c(1.0, 0.0));
        let f = WaveField::from_gaussian(grid, &s, PotentialSpec::free(1), 1.0, 0.0).unwrap();
        let r = moments(&f).unwrap();
        assert!((r.mass - PI.sqrt()).abs() < 1e-13);
        assert!(r.center[0].abs() < 1e-13);
        assert!((r.second_moment - PI.sqrt() / 2.0).abs() < 1e-13);
        assert!(r.momentum[0].abs() < 1e-13);
        // ½‖u'‖² = ½ ∫ x² e^{-x²} = √π/4.
        assert!((r.kinetic[0] - PI.sqrt() / 4.0).abs() < 1e-13);
        assert!(r.llogl >= 0.0);
    }

    #[test]
    fn gausson_mass_and_symmetry() {
        let grid = Grid::new(vec![64, 64], vec![16.0, 16.0]).unwrap();
        let g = gausson_profile(-1.0, 1.0, 1.0, 2).unwrap();
        let f = WaveField::from_gaussian(grid, &g, PotentialSpec::free(2), 1.0, 0.0).unwrap();
        let r = moments(&f).unwrap();
        assert!((r.mass - PI).abs() < 1e-12);
        for j in 0..2 {
            assert!(r.center[j].abs() < 1e-13);
            assert!(r.momentum[j].abs() < 1e-13);
        }
    }

    #[test]
    fn boosted_gaussian_momentum() {
        let grid = Grid::new(vec![256], vec![30.0]).unwrap();
        let mut s = GaussianState::centered(vec![c(1.0, 0.0)], c(1.0, 0.0));
        s.velocities[0] = 1.5;
        s.centers[0] = 2.0;
        let f = WaveField::from_gaussian(grid, &s, PotentialSpec::free(1), 1.0, 0.0).unwrap();
        let r = moments(&f).unwrap();
        assert!((r.momentum[0] - 1.5 * r.mass).abs() < 1e-11);
        assert!((r.center[0] - 2.0 * r.mass).abs() < 1e-11);
    }

    #[test]
    fn energy_of_regularized_equation_reduces_at_zero_epsilon() {
        let grid = Grid::new(vec![128], vec![20.0]).unwrap();
        let s = GaussianState::centered(vec![c(0.8, 0.3)], c(1.2, 0.0));
        let spec = PotentialSpec::isotropic_confining(1, 1.0).unwrap();
        let f0 = WaveField::from_gaussian(grid.clone(), &s, spec.clone(), 1.0, 0.0).unwrap();
        let r0 = moments(&f0).unwrap();
        assert_eq!(r0.energy, r0.energy_eps);
        let f1 = WaveField::from_gaussian(grid, &s, spec, 1.0, 1e-12).unwrap();
        let r1 = moments(&f1).unwrap();
        assert!((r1.energy_eps - r0.energy).abs() < 1e-9);
    }

    #[test]
    fn closed_form_energy_of_real_gaussian() {
        // u = e^{-a x²/2}: M = √(π/a), ½‖u'‖² = (a/4)M, ∫ω²x²/2 |u|² = ω²M/(4a),
        // ∫|u|² ln|u|² = -M/2.
        let (a, w, lam) = (1.7, 1.3, 0.6);
        let grid = Grid::new(vec![256], vec![24.0]).unwrap();
        let s = GaussianState::centered(vec![c(a, 0.0)], c(1.0, 0.0));
        let spec = PotentialSpec::isotropic_confining(1, w).unwrap();
        let f = WaveField::from_gaussian(grid, &s, spec, lam, 0.0).unwrap();
        let r = moments(&f).unwrap();
        let m = (PI / a).sqrt();
        let e = a / 4.0 * m + w * w * m / (4.0 * a) + lam * (-0.5 * m - m);
        assert!((r.energy - e).abs() < 1e-12, "{} vs {e}", r.energy);
    }
}
