//! Gaussian data `u = b Π_j exp(-a_j (x_j - q_j)²/2 + i p_j x_j)` and their
//! exact reduction to ODEs.
//!
//! For centred data the equation closes on `(a_j, b)`:
//!
//! ```text
//! i ȧ_j = a_j² + 2λ Re a_j − Ω_j
//! i ḃ   = (Σ_j a_j / 2) b + λ b ln|b|²
//! ```
//!
//! The amplitude equation is integrated for `ℓ = ln b`, where it is linear.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{step_count, Rk4};
use crate::potentials::PotentialSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub widths: Vec<Complex64>,
    pub amplitude: Complex64,
    pub centers: Vec<f64>,
    pub velocities: Vec<f64>,
    pub t: f64,
}

impl GaussianState {
    pub fn centered(widths: Vec<Complex64>, amplitude: Complex64) -> Self {
        let d = widths.len();
        GaussianState {
            widths,
            amplitude,
            centers: vec![0.0; d],
            velocities: vec![0.0; d],
            t: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.widths.len()
    }

    pub fn is_centered(&self) -> bool {
        self.centers.iter().chain(&self.velocities).all(|&v| v == 0.0)
    }

    /// `|b|² Π_j (π / Re a_j)^{1/2}`.
    pub fn mass(&self) -> f64 {
        let pi = std::f64::consts::PI;
        self.widths
            .iter()
            .fold(self.amplitude.norm_sqr(), |m, a| m * (pi / a.re).sqrt())
    }

    /// One-dimensional factor along axis `j`, without the amplitude.
    pub fn axis_factor(&self, j: usize, x: f64) -> Complex64 {
        let y = x - self.centers[j];
        let e = -0.5 * self.widths[j] * y * y + Complex64::new(0.0, self.velocities[j] * x);
        e.exp()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x
            .iter()
            .enumerate()
            .fold(self.amplitude, |acc, (j, &xj)| acc * self.axis_factor(j, xj)))
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::invalid("gaussian state needs at least one axis"));
        }
        for len in [self.centers.len(), self.velocities.len()] {
            if len != d {
                return Err(Error::DimensionMismatch { expected: d, got: len });
            }
        }
        for (j, a) in self.widths.iter().enumerate() {
            if !(a.re > 0.0) || !a.im.is_finite() || !a.re.is_finite() {
                return Err(Error::LossOfIntegrability {
                    axis: j,
                    t: self.t,
                    re_a: a.re,
                });
            }
        }
        if !(self.amplitude.re.is_finite() && self.amplitude.im.is_finite()) {
            return Err(Error::invalid("gaussian amplitude must be finite"));
        }
        Ok(())
    }
}

/// `a = 1/τ² − iτ̇/τ`.
pub fn widths_from_tau(tau: f64, tau_dot: f64) -> Complex64 {
    Complex64::new(1.0 / (tau * tau), -tau_dot / tau)
}

/// Inverse of [`widths_from_tau`]: `τ0 = 1/√Re α`, `τ1 = −Im α/√Re α`.
pub fn tau_from_width(alpha: Complex64) -> Result<(f64, f64)> {
    if !(alpha.re > 0.0) {
        return Err(Error::invalid(format!("Re a must be > 0, got {}", alpha.re)));
    }
    let s = alpha.re.sqrt();
    Ok((1.0 / s, -alpha.im / s))
}

/// Evolve centred Gaussian data, recording every step.
pub fn integrate_gaussian(
    init: &GaussianState,
    spec: &PotentialSpec,
    lambda: f64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<GaussianState>> {
    integrate_gaussian_strided(init, spec, lambda, t_end, dt, 1)
}

pub fn integrate_gaussian_strided(
    init: &GaussianState,
    spec: &PotentialSpec,
    lambda: f64,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Vec<GaussianState>> {
    init.validate()?;
    let d = init.dim();
    if spec.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: spec.dim(),
        });
    }
    if !init.is_centered() {
        return Err(Error::invalid("gaussian ODEs need a centred state (q = p = 0)"));
    }
    if spec.has_linear_term() {
        return Err(Error::invalid("gaussian ODEs need a potential without linear term"));
    }
    if init.amplitude == Complex64::new(0.0, 0.0) {
        return Err(Error::invalid("gaussian amplitude must be nonzero"));
    }
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::invalid("need dt > 0 and t_end >= 0"));
    }
    if stride == 0 {
        return Err(Error::invalid("stride must be >= 1"));
    }
    let curv: Vec<f64> = spec.axes().iter().map(|a| a.curvature()).collect();

    let pack = |s: &GaussianState, log_b: Complex64| {
        let mut y = Vec::with_capacity(2 * d + 2);
        for a in &s.widths {
            y.push(a.re);
            y.push(a.im);
        }
        y.push(log_b.re);
        y.push(log_b.im);
        y
    };
    let mut y = pack(init, init.amplitude.ln());
    let mut out = vec![init.clone()];
    if t_end == 0.0 {
        return Ok(out);
    }
    let n = step_count(t_end, dt);
    let h = t_end / n as f64;
    let mut rk = Rk4::new(y.len());
    let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let mut half_trace = Complex64::new(0.0, 0.0);
        for j in 0..d {
            let a = Complex64::new(y[2 * j], y[2 * j + 1]);
            half_trace += 0.5 * a;
            // ȧ = -i (a² + 2λ Re a − Ω)
            let r = a * a + 2.0 * lambda * a.re - curv[j];
            dy[2 * j] = r.im;
            dy[2 * j + 1] = -r.re;
        }
        let r = half_trace + 2.0 * lambda * y[2 * d];
        dy[2 * d] = r.im;
        dy[2 * d + 1] = -r.re;
    };
    let t0 = init.t;
    for i in 0..n {
        rk.step(&mut rhs, t0 + i as f64 * h, &mut y, h);
        let t = t0 + (i + 1) as f64 * h;
        for j in 0..d {
            if !(y[2 * j] > 0.0) {
                return Err(Error::LossOfIntegrability {
                    axis: j,
                    t,
                    re_a: y[2 * j],
                });
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBlowup {
                step: i + 1,
                substep: "gaussian",
            });
        }
        if (i + 1) % stride == 0 || i + 1 == n {
            let widths = (0..d).map(|j| Complex64::new(y[2 * j], y[2 * j + 1])).collect();
            let amplitude = Complex64::new(y[2 * d], y[2 * d + 1]).exp();
            let mut s = GaussianState::centered(widths, amplitude);
            s.t = t;
            out.push(s);
        }
    }
    Ok(out)
}

/// The one-dimensional potential families that admit explicit boosts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum BoostRegime {
    Free,
    Confining { omega: f64 },
    Repulsive { omega: f64 },
}

/// A boost at time `t` as `u(x − shift) e^{i kick x + i phase}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostMap {
    pub shift: f64,
    pub kick: f64,
    pub phase: f64,
}

impl BoostRegime {
    pub fn map(&self, v: f64, t: f64) -> Result<BoostMap> {
        let m = match *self {
            BoostRegime::Free => BoostMap {
                shift: v * t,
                kick: v,
                phase: -0.5 * v * v * t,
            },
            BoostRegime::Confining { omega } => {
                check_omega(omega)?;
                let (s, c) = (omega * t).sin_cos();
                BoostMap {
                    shift: v * s / omega,
                    kick: v * c,
                    phase: -v * v * c * s / (2.0 * omega),
                }
            }
            BoostRegime::Repulsive { omega } => {
                check_omega(omega)?;
                let (s, c) = ((omega * t).sinh(), (omega * t).cosh());
                BoostMap {
                    shift: v * s / omega,
                    kick: v * c,
                    phase: -v * v * c * s / (2.0 * omega),
                }
            }
        };
        Ok(m)
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("boost needs omega > 0, got {omega}")))
    }
}

/// Boost along `axis` at the state's own time.
pub fn galilean_boost(
    state: &GaussianState,
    axis: usize,
    v: f64,
    regime: BoostRegime,
) -> Result<GaussianState> {
    if axis >= state.dim() {
        return Err(Error::invalid(format!("axis {axis} out of range")));
    }
    let m = regime.map(v, state.t)?;
    let mut out = state.clone();
    let p = state.velocities[axis];
    out.centers[axis] += m.shift;
    out.velocities[axis] += m.kick;
    out.amplitude *= Complex64::from_polar(1.0, m.phase - p * m.shift);
    Ok(out)
}

/// Tensor product of states on disjoint axis sets.
pub fn tensor_product(states: &[GaussianState]) -> Result<GaussianState> {
    let first = states
        .first()
        .ok_or_else(|| Error::invalid("tensor product of no states"))?;
    let mut out = GaussianState {
        widths: Vec::new(),
        amplitude: Complex64::new(1.0, 0.0),
        centers: Vec::new(),
        velocities: Vec::new(),
        t: first.t,
    };
    for s in states {
        out.widths.extend_from_slice(&s.widths);
        out.centers.extend_from_slice(&s.centers);
        out.velocities.extend_from_slice(&s.velocities);
        out.amplitude *= s.amplitude;
    }
    Ok(out)
}
