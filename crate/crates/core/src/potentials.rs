//! Diagonal quadratic-plus-linear potentials and the Gausson parameters they
//! admit.
//!
//! A potential is `V(x) = Σ_j σ_j ω_j² x_j²/2 + E·x` with `σ_j ∈ {-1, 0, 1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use num_complex::Complex64;

/// One axis of a diagonal quadratic form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisPotential {
    pub sign: i8,
    pub omega: f64,
}

impl AxisPotential {
    pub fn free() -> Self {
        AxisPotential {
            sign: 0,
            omega: 0.0,
        }
    }

    pub fn confining(omega: f64) -> Self {
        AxisPotential { sign: 1, omega }
    }

    pub fn repulsive(omega: f64) -> Self {
        AxisPotential { sign: -1, omega }
    }

    /// Signed curvature `Ω = σ ω²`.
    pub fn curvature(&self) -> f64 {
        f64::from(self.sign) * self.omega * self.omega
    }
}

/// Sign pattern of a potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// No quadratic part and no linear term.
    Free,
    /// No quadratic part but a nonzero linear term.
    Linear,
    Confining,
    /// Confining along some axes, free along the others.
    Partial,
    Repulsive,
    /// Repulsive along some axes, free along the others.
    PartialRepulsive,
    /// Both confining and repulsive axes.
    Saddle,
}

/// `V(x) = Σ_j σ_j ω_j² x_j²/2 + E·x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential", into = "RawPotential")]
pub struct PotentialSpec {
    axes: Vec<AxisPotential>,
    linear: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPotential {
    axes: Vec<AxisPotential>,
    #[serde(default)]
    linear: Vec<f64>,
}

impl TryFrom<RawPotential> for PotentialSpec {
    type Error = Error;

    fn try_from(raw: RawPotential) -> Result<Self> {
        let linear = if raw.linear.is_empty() {
            vec![0.0; raw.axes.len()]
        } else {
            raw.linear
        };
        PotentialSpec::with_linear(raw.axes, linear)
    }
}

impl From<PotentialSpec> for RawPotential {
    fn from(spec: PotentialSpec) -> Self {
        RawPotential {
            axes: spec.axes,
            linear: spec.linear,
        }
    }
}

impl PotentialSpec {
    pub fn new(axes: Vec<AxisPotential>) -> Result<Self> {
        let d = axes.len();
        Self::with_linear(axes, vec![0.0; d])
    }

    pub fn with_linear(mut axes: Vec<AxisPotential>, linear: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::invalid("potential needs at least one axis"));
        }
        if linear.len() != axes.len() {
            return Err(Error::DimensionMismatch {
                expected: axes.len(),
                got: linear.len(),
            });
        }
        for (j, axis) in axes.iter_mut().enumerate() {
            if !matches!(axis.sign, -1..=1) {
                return Err(Error::invalid(format!(
                    "axis {j}: sign must be -1, 0 or 1, got {}",
                    axis.sign
                )));
            }
            if !(axis.omega.is_finite() && axis.omega >= 0.0) {
                return Err(Error::invalid(format!(
                    "axis {j}: omega must be finite and >= 0, got {}",
                    axis.omega
                )));
            }
            if axis.sign == 0 {
                axis.omega = 0.0;
            }
        }
        if linear.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("linear term must be finite"));
        }
        Ok(PotentialSpec { axes, linear })
    }

    pub fn free(d: usize) -> Self {
        PotentialSpec {
            axes: vec![AxisPotential::free(); d],
            linear: vec![0.0; d],
        }
    }

    pub fn isotropic_confining(d: usize, omega: f64) -> Result<Self> {
        Self::new(vec![AxisPotential::confining(omega); d])
    }

    pub fn isotropic_repulsive(d: usize, omega: f64) -> Result<Self> {
        Self::new(vec![AxisPotential::repulsive(omega); d])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[AxisPotential] {
        &self.axes
    }

    pub fn axis(&self, j: usize) -> AxisPotential {
        self.axes[j]
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn has_linear_term(&self) -> bool {
        self.linear.iter().any(|&e| e != 0.0)
    }

    /// Per-axis contribution `σ_j ω_j² x²/2 + E_j x`.
    pub fn eval_axis(&self, j: usize, x: f64) -> f64 {
        0.5 * self.axes[j].curvature() * x * x + self.linear[j] * x
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut v = 0.0;
        for (j, &xj) in x.iter().enumerate() {
            v += 0.5 * self.axes[j].curvature() * xj * xj;
        }
        for (e, &xj) in self.linear.iter().zip(x) {
            v += e * xj;
        }
        Ok(v)
    }

    pub fn classify(&self) -> Regime {
        let pos = self.axes.iter().any(|a| a.sign > 0);
        let neg = self.axes.iter().any(|a| a.sign < 0);
        let zero = self.axes.iter().any(|a| a.sign == 0);
        match (pos, neg, zero) {
            (true, true, _) => Regime::Saddle,
            (true, false, false) => Regime::Confining,
            (true, false, true) => Regime::Partial,
            (false, true, false) => Regime::Repulsive,
            (false, true, true) => Regime::PartialRepulsive,
            (false, false, _) if self.has_linear_term() => Regime::Linear,
            (false, false, _) => Regime::Free,
        }
    }
}

/// Positive root `k` of `k² + 2λk = ω²`, the width of the L² Gausson.
pub fn gausson_width(lambda: f64, omega: f64) -> Result<f64> {
    if !(lambda.is_finite() && omega.is_finite() && omega >= 0.0) {
        return Err(Error::invalid("lambda and omega must be finite, omega >= 0"));
    }
    let w2 = omega * omega;
    let root = lambda.hypot(omega);
    // Rationalized form avoids cancellation when λ > 0.
    let k = if lambda > 0.0 {
        w2 / (lambda + root)
    } else {
        root - lambda
    };
    if k > 0.0 {
        Ok(k)
    } else {
        Err(Error::NoGausson { lambda, omega })
    }
}

/// The Gausson `φ_ν(x) = e^{-(ν+κd/2)/(2λ)} e^{-κ|x|²/2}` as a Gaussian state.
pub fn gausson_profile(nu: f64, lambda: f64, kappa: f64, d: usize) -> Result<GaussianState> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::invalid("gausson needs lambda != 0"));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid("gausson needs kappa > 0"));
    }
    if d == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    let amplitude = (-(nu + kappa * d as f64 / 2.0) / (2.0 * lambda)).exp();
    Ok(GaussianState::centered(
        vec![Complex64::new(kappa, 0.0); d],
        Complex64::new(amplitude, 0.0),
    ))
}

/// Confining frequency `ω = √(κ(κ+2λ))` that makes `e^{-κ|x|²/2}` a Gausson.
pub fn gausson_frequency(lambda: f64, kappa: f64) -> Result<f64> {
    let w2 = kappa * (kappa + 2.0 * lambda);
    if w2 < 0.0 || !w2.is_finite() {
        return Err(Error::invalid(format!(
            "kappa(kappa + 2 lambda) = {w2} is not a valid omega^2"
        )));
    }
    Ok(w2.sqrt())
}
