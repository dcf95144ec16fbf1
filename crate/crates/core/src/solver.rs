//! Strang split-step Fourier integration of
//! `i ∂t u + Σ_j c_j ∂_j² u = P(x) u + λ ln(ε + |u|²) u`.
//!
//! `P` and `c_j` come from the field's frame (see [`WaveField::effective_potential`]
//! and [`WaveField::kinetic_coefficients`]). The potential and nonlinear part
//! preserves `|u|` pointwise, so its half step is an exact phase rotation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{moments_with, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::field::{Frame, WaveField, DENSITY_FLOOR};
use crate::grid::{scale_along_axis, Spectral};
use crate::ode::step_count;

/// Fields at least this large use data-parallel pointwise substeps.
const PAR_THRESHOLD: usize = 1 << 15;
const PAR_CHUNK: usize = 1 << 12;

/// Relative boundary density that aborts physical-frame runs when the
/// potential has a repulsive axis.
pub const BOUNDARY_GUARD: f64 = 1e-10;

/// Reusable transform plans and multipliers for one field layout.
#[derive(Debug, Clone)]
pub struct Stepper {
    spectral: Spectral,
    potential: Vec<f64>,
    k2: Vec<Vec<f64>>,
    kinetic: Vec<Vec<Complex64>>,
    cached: Option<(f64, Vec<f64>)>,
    steps: usize,
}

impl Stepper {
    pub fn new(field: &WaveField) -> Self {
        let g = &field.grid;
        let k2 = (0..g.dim())
            .map(|j| g.wavenumbers(j).into_iter().map(|k| k * k).collect())
            .collect();
        Stepper {
            spectral: Spectral::new(g),
            potential: field.effective_potential(),
            k2,
            kinetic: vec![Vec::new(); g.dim()],
            cached: None,
            steps: 0,
        }
    }

    pub fn spectral(&mut self) -> &mut Spectral {
        &mut self.spectral
    }

    fn phase(&self, field: &mut WaveField, dt: f64, substep: &'static str) -> Result<()> {
        let (eps, lam) = (field.epsilon, field.lambda);
        let half = 0.5 * dt;
        let rotate = |v: &mut Complex64, p: f64| {
            let rho = v.norm_sqr();
            let l = (eps + rho).max(DENSITY_FLOOR).ln();
            *v *= Complex64::from_polar(1.0, -half * (p + lam * l));
            v.re.is_finite() && v.im.is_finite()
        };
        let ok = if field.values.len() >= PAR_THRESHOLD {
            field
                .values
                .par_chunks_mut(PAR_CHUNK)
                .zip(self.potential.par_chunks(PAR_CHUNK))
                .map(|(vs, ps)| vs.iter_mut().zip(ps).fold(true, |acc, (v, &p)| rotate(v, p) && acc))
                .reduce(|| true, |a, b| a && b)
        } else {
            field
                .values
                .iter_mut()
                .zip(&self.potential)
                .fold(true, |acc, (v, &p)| rotate(v, p) && acc)
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NumericalBlowup {
                step: self.steps + 1,
                substep,
            })
        }
    }

    fn kinetic(&mut self, field: &mut WaveField, dt: f64) -> Result<()> {
        let coeffs = field.kinetic_coefficients(field.t + 0.5 * dt)?;
        let fresh = match &self.cached {
            Some((h, c)) => *h != dt || *c != coeffs,
            None => true,
        };
        if fresh {
            for (j, c) in coeffs.iter().enumerate() {
                self.kinetic[j] = self.k2[j]
                    .iter()
                    .map(|k2| Complex64::from_polar(1.0, -dt * c * k2))
                    .collect();
            }
            self.cached = Some((dt, coeffs));
        }
        self.spectral.forward(&mut field.values);
        for (j, m) in self.kinetic.iter().enumerate() {
            scale_along_axis(&field.grid, &mut field.values, j, m);
        }
        self.spectral.inverse(&mut field.values);
        if field.values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NumericalBlowup {
                step: self.steps + 1,
                substep: "kinetic",
            })
        }
    }

    /// One Strang step `phase(dt/2) ∘ kinetic(dt) ∘ phase(dt/2)`.
    pub fn step(&mut self, field: &mut WaveField, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
        }
        self.phase(field, dt, "first phase")?;
        self.kinetic(field, dt)?;
        self.phase(field, dt, "second phase")?;
        field.t += dt;
        self.steps += 1;
        Ok(())
    }
}

/// One physical-frame step on a copy of `field`.
pub fn split_step(field: &WaveField, dt: f64) -> Result<WaveField> {
    if !matches!(field.frame, Frame::Physical) {
        return Err(Error::invalid("split_step expects a physical-frame field"));
    }
    let mut out = field.clone();
    Stepper::new(field).step(&mut out, dt)?;
    Ok(out)
}

/// One rescaled-frame step on a copy of `field`, with the `y`-axis
/// coefficient `1/(2τ²)` taken at the midpoint `t + dt/2`.
pub fn split_step_rescaled(field: &WaveField, dt: f64) -> Result<WaveField> {
    if !matches!(field.frame, Frame::Rescaled(_)) {
        return Err(Error::invalid("split_step_rescaled expects a rescaled-frame field"));
    }
    let mut out = field.clone();
    Stepper::new(field).step(&mut out, dt)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunOptions {
    pub dt: f64,
    pub t_end: f64,
    pub save_every: usize,
    /// Relative boundary density that aborts the run; `None` picks
    /// [`BOUNDARY_GUARD`] for physical fields in a repulsive potential.
    pub boundary_guard: Option<f64>,
}

impl RunOptions {
    pub fn new(dt: f64, t_end: f64, save_every: usize) -> Self {
        RunOptions {
            dt,
            t_end,
            save_every,
            boundary_guard: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub field: WaveField,
    pub records: Vec<DiagnosticsRecord>,
}

pub fn run(field: WaveField, opts: &RunOptions) -> Result<RunOutput> {
    run_with(field, opts, |_, _| Ok(()))
}

/// Step to `t_end`, evaluating diagnostics (and `hook`) at the start, every
/// `save_every` steps and at the end.
pub fn run_with<F>(mut field: WaveField, opts: &RunOptions, mut hook: F) -> Result<RunOutput>
where
    F: FnMut(&WaveField, &mut DiagnosticsRecord) -> Result<()>,
{
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be > 0, got {}", opts.dt)));
    }
    if !(opts.t_end >= 0.0 && opts.t_end.is_finite()) {
        return Err(Error::invalid(format!("t_end must be >= 0, got {}", opts.t_end)));
    }
    if opts.save_every == 0 {
        return Err(Error::invalid("save_every must be >= 1"));
    }
    let n = if opts.t_end == 0.0 {
        0
    } else {
        step_count(opts.t_end, opts.dt)
    };
    let h = if n == 0 { opts.dt } else { opts.t_end / n as f64 };
    let t0 = field.t;
    if let Frame::Rescaled(r) = &field.frame {
        let need = t0 + opts.t_end + 0.5 * h;
        if r.tau.t_end() + 1e-9 * h < need || r.tau.times[0] > t0 {
            return Err(Error::TrajectoryCoverage {
                t: need,
                start: r.tau.times[0],
                end: r.tau.t_end(),
            });
        }
    }
    let guard = match (opts.boundary_guard, &field.frame) {
        (Some(g), _) => Some(g),
        (None, Frame::Physical) if field.potential.axes().iter().any(|a| a.sign < 0) => Some(BOUNDARY_GUARD),
        _ => None,
    };

    let mut stepper = Stepper::new(&field);
    let mut records = Vec::new();
    let mut save = |field: &WaveField, stepper: &mut Stepper, records: &mut Vec<DiagnosticsRecord>| -> Result<()> {
        if let Some(g) = guard {
            let r = field.boundary_ratio();
            if r > g {
                return Err(Error::Resolution(format!(
                    "boundary density reached {r:e} of the peak at t = {}; enlarge the box",
                    field.t
                )));
            }
        }
        let mut rec = moments_with(field, stepper.spectral())?;
        hook(field, &mut rec)?;
        records.push(rec);
        Ok(())
    };
    save(&field, &mut stepper, &mut records)?;
    for i in 0..n {
        stepper.step(&mut field, h)?;
        field.t = t0 + (i + 1) as f64 * h;
        if (i + 1) % opts.save_every == 0 || i + 1 == n {
            save(&field, &mut stepper, &mut records)?;
        }
    }
    Ok(RunOutput { field, records })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    /// `‖w(t)‖ / ‖w(0)‖`, 1 when `w(0) = 0`.
    pub ratios: Vec<f64>,
    /// `e^{4λt}`.
    pub bounds: Vec<f64>,
    pub max_ratio_over_bound: f64,
}

/// Evolve `u0` and `u0 + w0` side by side and compare the difference
/// against the Gronwall bound `‖w(t)‖ ≤ e^{4λt} ‖w(0)‖`.
pub fn l2_stability_probe(
    u0: &WaveField,
    w0: &[Complex64],
    t_end: f64,
    dt: f64,
    save_every: usize,
) -> Result<StabilityReport> {
    if w0.len() != u0.values.len() {
        return Err(Error::DimensionMismatch {
            expected: u0.values.len(),
            got: w0.len(),
        });
    }
    if save_every == 0 {
        return Err(Error::invalid("save_every must be >= 1"));
    }
    let mut u = u0.clone();
    let mut v = u0.clone();
    for (a, b) in v.values.iter_mut().zip(w0) {
        *a += b;
    }
    let mut su = Stepper::new(&u);
    let mut sv = Stepper::new(&v);
    let w_init = v.l2_distance(&u)?;
    let n = step_count(t_end, dt);
    let h = t_end / n as f64;
    let lam = u0.lambda;
    let mut rep = StabilityReport {
        times: Vec::new(),
        ratios: Vec::new(),
        bounds: Vec::new(),
        max_ratio_over_bound: 0.0,
    };
    let record = |t: f64, w: f64, rep: &mut StabilityReport| {
        let ratio = if w_init == 0.0 && w == 0.0 { 1.0 } else { w / w_init };
        let bound = (4.0 * lam * t).exp();
        rep.times.push(t);
        rep.ratios.push(ratio);
        rep.bounds.push(bound);
        rep.max_ratio_over_bound = rep.max_ratio_over_bound.max(ratio / bound);
    };
    record(0.0, w_init, &mut rep);
    for i in 0..n {
        su.step(&mut u, h)?;
        sv.step(&mut v, h)?;
        if (i + 1) % save_every == 0 || i + 1 == n {
            record((i + 1) as f64 * h, v.l2_distance(&u)?, &mut rep);
        }
    }
    Ok(rep)
}
