use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::DENSITY_FLOOR;

/// `ν = 0` where `μ` exceeds this is a support violation.
pub const SUPPORT_CUTOFF: f64 = 1e-200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualLogSob {
    pub a: f64,
    pub residual: f64,
    /// Minimizing `a* = (d/2) M / ∫|x|²|f|²`.
    pub a_star: f64,
    pub residual_at_a_star: f64,
}

/// `a∫|x|²|f|² + (d/2) M ln(π/a) + ∫|f|² ln(|f|²/M)` for `rho = |f|²`
/// sampled at points with squared radii `r2` and cell volume `cell`.
pub fn dual_logsob_residual(rho: &[f64], r2: &[f64], cell: f64, d: usize, a: f64) -> Result<DualLogSob> {
    if rho.len() != r2.len() {
        return Err(Error::DimensionMismatch {
            expected: rho.len(),
            got: r2.len(),
        });
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("a must be > 0, got {a}")));
    }
    if rho.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invalid("density values must be finite and >= 0"));
    }
    let m: f64 = rho.iter().sum::<f64>() * cell;
    if !(m > 0.0) {
        return Err(Error::invalid("density has zero mass"));
    }
    let second: f64 = rho.iter().zip(r2).map(|(p, r)| p * r).sum::<f64>() * cell;
    let ent: f64 = rho
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * (p / m).ln())
        .sum::<f64>()
        * cell;
    let half_d = d as f64 / 2.0;
    let at = |a: f64| a * second + half_d * m * (std::f64::consts::PI / a).ln() + ent;
    let a_star = half_d * m / second;
    Ok(DualLogSob {
        a,
        residual: at(a),
        a_star,
        residual_at_a_star: at(a_star),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyGap {
    pub kl: f64,
    pub l1: f64,
    /// `2 KL − ‖μ − ν‖²_{L¹}`.
    pub slack: f64,
}

/// Relative entropy `∫ μ ln(μ/ν)` and the Csiszár–Kullback slack for
/// probability densities sampled with cell volume `cell`.
pub fn relative_entropy_and_ck(mu: &[f64], nu: &[f64], cell: f64) -> Result<EntropyGap> {
    if mu.len() != nu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            got: nu.len(),
        });
    }
    for p in [mu, nu] {
        if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("density values must be finite and >= 0"));
        }
        let m: f64 = p.iter().sum::<f64>() * cell;
        if (m - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!("density must be a probability, mass = {m}")));
        }
    }
    let mut kl = 0.0;
    let mut l1 = 0.0;
    for (i, (&p, &q)) in mu.iter().zip(nu).enumerate() {
        l1 += (p - q).abs();
        if p == 0.0 {
            continue;
        }
        if q == 0.0 && p > SUPPORT_CUTOFF {
            return Err(Error::invalid(format!(
                "reference vanishes at sample {i} where the density is {p:e}"
            )));
        }
        kl += p * (p.max(DENSITY_FLOOR) / q.max(DENSITY_FLOOR)).ln();
    }
    kl *= cell;
    l1 *= cell;
    Ok(EntropyGap {
        kl,
        l1,
        slack: 2.0 * kl - l1 * l1,
    })
}

/// Closed form of `KL(e^{-|x|²/σ²}/Z ‖ e^{-a|x|²}/Z')` in `d` dimensions.
pub fn gaussian_kl(sigma_sq: f64, a: f64, d: usize) -> f64 {
    let r = a * sigma_sq;
    d as f64 / 2.0 * (r - 1.0 - r.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(n: usize, l: f64) -> (Vec<f64>, f64) {
        let h = l / n as f64;
        ((0..n).map(|k| -l / 2.0 + k as f64 * h).collect(), h)
    }

    #[test]
    fn gaussian_equality_case() {
        let (x, h) = axis(1024, 30.0);
        let r2: Vec<f64> = x.iter().map(|x| x * x).collect();
        for a in [0.5, 1.0, 3.0] {
            let rho: Vec<f64> = x.iter().map(|x| (-a * x * x).exp() * 2.3).collect();
            let r = dual_logsob_residual(&rho, &r2, h, 1, a).unwrap();
            assert!(r.residual.abs() <= 1e-8, "a = {a}: {}", r.residual);
            assert!((r.a_star - a).abs() < 1e-10);
            let off = dual_logsob_residual(&rho, &r2, h, 1, 2.0 * a).unwrap();
            assert!(off.residual > 1e-3);
        }
    }

    #[test]
    fn mixture_is_strict() {
        let (x, h) = axis(1024, 30.0);
        let r2: Vec<f64> = x.iter().map(|x| x * x).collect();
        let rho: Vec<f64> = x
            .iter()
            .map(|x| (-(x - 1.5) * (x - 1.5)).exp() + 0.5 * (-(x + 2.0) * (x + 2.0) * 2.0).exp())
            .collect();
        let r = dual_logsob_residual(&rho, &r2, h, 1, 1.0).unwrap();
        assert!(r.residual_at_a_star > 1e-3);
        for a in [0.1, 0.3, 1.0, 2.0, 10.0] {
            let s = dual_logsob_residual(&rho, &r2, h, 1, a).unwrap();
            assert!(r.residual_at_a_star <= s.residual + 1e-14);
        }
    }

    #[test]
    fn kl_identity_and_closed_form() {
        let (x, h) = axis(2048, 40.0);
        let norm = |p: Vec<f64>| {
            let m: f64 = p.iter().sum::<f64>() * h;
            p.into_iter().map(|v| v / m).collect::<Vec<f64>>()
        };
        let mu = norm(x.iter().map(|x| (-x * x).exp()).collect());
        let g = relative_entropy_and_ck(&mu, &mu, h).unwrap();
        assert_eq!((g.kl, g.slack), (0.0, 0.0));
        for (sigma_sq, a) in [(1.0, 0.5), (2.0, 1.0), (0.5, 3.0)] {
            let mu = norm(x.iter().map(|x| (-x * x / sigma_sq).exp()).collect());
            let nu = norm(x.iter().map(|x| (-a * x * x).exp()).collect());
            let g = relative_entropy_and_ck(&mu, &nu, h).unwrap();
            assert!((g.kl - gaussian_kl(sigma_sq, a, 1)).abs() < 1e-10);
            assert!(g.slack >= 0.0);
        }
        let shifted = norm(x.iter().map(|x| (-(x - 1.0) * (x - 1.0)).exp()).collect());
        assert!(relative_entropy_and_ck(&mu, &shifted, h).unwrap().slack >= 0.0);
    }

    #[test]
    fn support_violation() {
        let mu = vec![0.5, 0.5];
        let nu = vec![1.0, 0.0];
        assert!(relative_entropy_and_ck(&mu, &nu, 1.0).is_err());
        assert!(relative_entropy_and_ck(&[0.5, 0.6], &[0.5, 0.5], 1.0).is_err());
    }
}
