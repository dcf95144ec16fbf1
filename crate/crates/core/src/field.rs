//! Complex fields on a periodic grid, tagged with the frame they live in.
//!
//! In a rescaled frame the stored function is `v`, related to the physical
//! unknown by
//!
//! ```text
//! u(t, x', x'') = τ^{-p/2} v(t, x', x''/τ) N exp(i τ̇/τ |x''|²/2)
//! ```
//!
//! where `x''` collects the `p` rescaled axes. `N = ‖u0‖/‖γ‖` in the free
//! and partially confined frames (`γ = e^{-|y|²/2}` on the rescaled axes) and
//! `N = 1` in the repulsive frame. The rescaled equation is stepped without
//! the purely time dependent phase `θ(t) = -λ(p ln τ − 2 ln N)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::grid::Grid;
use crate::potentials::{PotentialSpec, Regime};
use crate::tau::{integrate_tau, TauParams, TauTrajectory};

/// Relative floor used when `ε` is left to its default.
pub const DEFAULT_EPSILON_FACTOR: f64 = 1e-12;

/// Densities are clamped to this before taking logarithms.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Number of τ steps per field step in rescaled frames.
pub const TAU_REFINEMENT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameKind {
    /// No potential; every axis rescaled with `τ̈ = 2λ/τ`.
    Free,
    /// Confining axes kept, free axes rescaled with `τ̈ = 2λ/τ`.
    Partial,
    /// Isotropic repulsive potential; every axis rescaled with
    /// `τ̈ = ω²τ + 2λ/τ`.
    Repulsive,
}

#[derive(Debug, Clone)]
pub struct RescaledFrame {
    pub kind: FrameKind,
    pub rescaled: Vec<bool>,
    pub tau: Arc<TauTrajectory>,
    /// `N` in the change of unknown.
    pub norm_factor: f64,
}

impl RescaledFrame {
    /// Frame matching the sign pattern of `spec`, with τ integrated on
    /// `[0, t_end]` at step `dt / TAU_REFINEMENT`.
    pub fn for_potential(
        spec: &PotentialSpec,
        lambda: f64,
        t_end: f64,
        dt: f64,
        norm_factor: f64,
    ) -> Result<Self> {
        let (kind, params) = frame_params(spec, lambda)?;
        if !(norm_factor > 0.0 && norm_factor.is_finite()) {
            return Err(Error::invalid("frame normalization must be > 0"));
        }
        let rescaled = spec.axes().iter().map(|a| a.sign != 1).collect();
        let tau_dt = dt / TAU_REFINEMENT as f64;
        // Cover one extra step so midpoints near t_end are inside.
        let traj = integrate_tau(params, t_end + dt, tau_dt)?;
        Ok(RescaledFrame {
            kind,
            rescaled,
            tau: Arc::new(traj),
            norm_factor,
        })
    }

    pub fn rescaled_count(&self) -> usize {
        self.rescaled.iter().filter(|&&r| r).count()
    }

    /// `∫_0^t θ(s) ds`, the phase dropped by the rescaled equation: the
    /// mapped unknown equals the stepped one times `e^{-i∫θ}`.
    pub fn dropped_phase(&self, lambda: f64, t: f64) -> Result<f64> {
        let p = self.rescaled_count() as f64;
        let ln_tau = self.tau.integral_ln_tau(t)?;
        Ok(-lambda * (p * ln_tau - 2.0 * t * self.norm_factor.ln()))
    }
}

/// Frame kind and τ parameters for a potential.
pub fn frame_params(spec: &PotentialSpec, lambda: f64) -> Result<(FrameKind, TauParams)> {
    if spec.has_linear_term() {
        return Err(Error::invalid("rescaled frames need a potential without linear term"));
    }
    if !(lambda > 0.0) {
        return Err(Error::invalid("rescaled frames need lambda > 0"));
    }
    match spec.classify() {
        Regime::Free => Ok((FrameKind::Free, TauParams::free(lambda))),
        Regime::Partial => Ok((FrameKind::Partial, TauParams::free(lambda))),
        Regime::Repulsive => {
            let w = spec.axis(0).omega;
            if spec.axes().iter().any(|a| a.omega != w) {
                return Err(Error::invalid("repulsive frame needs one common omega"));
            }
            Ok((FrameKind::Repulsive, TauParams::repulsive_frame(lambda, w)))
        }
        other => Err(Error::invalid(format!("no rescaled frame for a {other:?} potential"))),
    }
}

#[derive(Debug, Clone)]
pub enum Frame {
    Physical,
    Rescaled(RescaledFrame),
}

#[derive(Debug, Clone)]
pub struct WaveField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub frame: Frame,
    pub t: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub potential: PotentialSpec,
}

impl WaveField {
    /// Physical-frame field at `t = 0`.
    pub fn new(
        grid: Grid,
        values: Vec<Complex64>,
        potential: PotentialSpec,
        lambda: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if potential.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: potential.dim(),
            });
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be >= 0, got {epsilon}")));
        }
        if !lambda.is_finite() {
            return Err(Error::invalid("lambda must be finite"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("field values must be finite"));
        }
        Ok(WaveField {
            grid,
            values,
            frame: Frame::Physical,
            t: 0.0,
            epsilon,
            lambda,
            potential,
        })
    }

    pub fn from_fn(
        grid: Grid,
        potential: PotentialSpec,
        lambda: f64,
        epsilon: f64,
        mut f: impl FnMut(&[f64]) -> Complex64,
    ) -> Result<Self> {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        grid.for_each_point(|i, x| values[i] = f(x));
        WaveField::new(grid, values, potential, lambda, epsilon)
    }

    pub fn from_gaussian(
        grid: Grid,
        state: &GaussianState,
        potential: PotentialSpec,
        lambda: f64,
        epsilon: f64,
    ) -> Result<Self> {
        state.validate()?;
        if state.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: state.dim(),
            });
        }
        let axes: Vec<Vec<Complex64>> = (0..grid.dim())
            .map(|j| grid.coords(j).iter().map(|&x| state.axis_factor(j, x)).collect())
            .collect();
        let mut values = vec![state.amplitude; grid.len()];
        for (j, factor) in axes.iter().enumerate() {
            crate::grid::scale_along_axis(&grid, &mut values, j, factor);
        }
        let mut f = WaveField::new(grid, values, potential, lambda, epsilon)?;
        f.t = state.t;
        Ok(f)
    }

    /// Move this field into `frame`; values are taken as already mapped.
    pub fn with_frame(mut self, frame: Frame) -> Result<Self> {
        if let Frame::Rescaled(r) = &frame {
            if r.rescaled.len() != self.grid.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.grid.dim(),
                    got: r.rescaled.len(),
                });
            }
        }
        self.frame = frame;
        Ok(self)
    }

    pub fn rescaled_frame(&self) -> Option<&RescaledFrame> {
        match &self.frame {
            Frame::Rescaled(r) => Some(r),
            Frame::Physical => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Potential of the stepped equation: `V` in the physical frame,
    /// `Σ_{x'} ω²x'²/2 + λ Σ_y y²` in a rescaled frame.
    pub fn effective_potential(&self) -> Vec<f64> {
        let g = &self.grid;
        let mut out = vec![0.0; g.len()];
        for j in 0..g.dim() {
            let x = g.coords(j);
            let per_axis: Vec<f64> = match &self.frame {
                Frame::Rescaled(r) if r.rescaled[j] => x.iter().map(|&y| self.lambda * y * y).collect(),
                _ => x.iter().map(|&xj| self.potential.eval_axis(j, xj)).collect(),
            };
            let s = g.stride(j);
            let n = g.shape()[j];
            for (i, o) in out.iter_mut().enumerate() {
                *o += per_axis[(i / s) % n];
            }
        }
        out
    }

    /// Coefficient `c_j` of `∂_j²` at time `t`: `1/2`, or `1/(2τ²)` on
    /// rescaled axes.
    pub fn kinetic_coefficients(&self, t: f64) -> Result<Vec<f64>> {
        match &self.frame {
            Frame::Physical => Ok(vec![0.5; self.dim()]),
            Frame::Rescaled(r) => {
                let (tau, _) = r.tau.interpolate(t)?;
                let c = 0.5 / (tau * tau);
                Ok(r.rescaled.iter().map(|&y| if y { c } else { 0.5 }).collect())
            }
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn peak_density(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm_sqr()))
    }

    /// `ε = 1e-12 × max |u|²`.
    pub fn default_epsilon(&self) -> f64 {
        DEFAULT_EPSILON_FACTOR * self.peak_density()
    }

    /// `∫ u conj(w)`.
    pub fn inner(&self, other: &WaveField) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn l2_distance(&self, other: &WaveField) -> Result<f64> {
        self.check_same_grid(other)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * self.grid.cell_volume()).sqrt())
    }

    /// `‖ |u| − |w| ‖_{L²}`.
    pub fn modulus_distance(&self, other: &WaveField) -> Result<f64> {
        self.check_same_grid(other)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a.norm() - b.norm()).powi(2))
            .sum();
        Ok((s * self.grid.cell_volume()).sqrt())
    }

    pub fn check_same_grid(&self, other: &WaveField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::invalid("fields live on different grids"));
        }
        Ok(())
    }

    pub fn scale(&mut self, k: Complex64) {
        for v in &mut self.values {
            *v *= k;
        }
    }

    /// Largest density on the outermost layer of cells relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.peak_density();
        if peak == 0.0 {
            return 0.0;
        }
        let g = &self.grid;
        let mut edge = 0.0f64;
        for (i, v) in self.values.iter().enumerate() {
            let on_edge = (0..g.dim()).any(|j| {
                let k = g.axis_index(i, j);
                k == 0 || k + 1 == g.shape()[j]
            });
            if on_edge {
                edge = edge.max(v.norm_sqr());
            }
        }
        edge / peak
    }
}

/// `‖γ‖²_{L²(ℝ^p)} = π^{p/2}` for `γ = e^{-|y|²/2}`.
pub fn gamma_mass(p: usize) -> f64 {
    PI.powf(p as f64 / 2.0)
}
