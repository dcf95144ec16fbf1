use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::{gamma_mass, Frame, FrameKind, RescaledFrame, WaveField};
use crate::grid::{Grid, Spectral};

/// `N = ‖u0‖/‖γ‖` for the free and partial frames, 1 for the repulsive one.
pub fn norm_factor_for(kind: FrameKind, mass: f64, rescaled_axes: usize) -> f64 {
    match kind {
        FrameKind::Repulsive => 1.0,
        FrameKind::Free | FrameKind::Partial => (mass / gamma_mass(rescaled_axes)).sqrt(),
    }
}

/// Map a physical field to the rescaled unknown
/// `v(t, x', y) = τ^{p/2} u(t, x', yτ) e^{-i τ̇/τ |yτ|²/2} / N` on `target`.
///
/// Values of `u` off its grid come from trigonometric interpolation of the
/// dechirped field. `target` must agree with the field's grid on the
/// confined axes.
pub fn rescale_u_to_v(field: &WaveField, frame: &RescaledFrame, target: &Grid) -> Result<WaveField> {
    if !matches!(field.frame, Frame::Physical) {
        return Err(Error::invalid("rescale_u_to_v expects a physical-frame field"));
    }
    let g = &field.grid;
    let d = g.dim();
    if frame.rescaled.len() != d || target.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: target.dim(),
        });
    }
    for j in 0..d {
        if !frame.rescaled[j] && (target.shape()[j] != g.shape()[j] || target.lengths()[j] != g.lengths()[j]) {
            return Err(Error::invalid(format!("target grid differs on confined axis {j}")));
        }
    }
    let (tau, tau_dot) = frame.tau.interpolate(field.t)?;

    let mut w = field.values.clone();
    let chirp = tau_dot / tau;
    for j in 0..d {
        if frame.rescaled[j] {
            let f: Vec<Complex64> = g
                .coords(j)
                .iter()
                .map(|&x| Complex64::from_polar(1.0, -0.5 * chirp * x * x))
                .collect();
            crate::grid::scale_along_axis(g, &mut w, j, &f);
        }
    }

    let mut shape = g.shape().to_vec();
    let mut planner = FftPlanner::new();
    for j in 0..d {
        if !frame.rescaled[j] {
            continue;
        }
        let ns = shape[j];
        let nt = target.shape()[j];
        let half_l = 0.5 * g.lengths()[j];
        let ys = target.coords(j);
        let slack = 1e-12 * half_l;
        if let Some(y) = ys.iter().find(|&&y| (y * tau).abs() > half_l + slack) {
            return Err(Error::Resolution(format!(
                "axis {j}: y = {y} maps to x = {} outside the physical box [-{half_l}, {half_l}]",
                y * tau
            )));
        }
        let k = g.wavenumbers(j);
        let nyq = ns / 2;
        // E[t][m] = e^{i k_m (x_t − x_0)}/N, Nyquist as a cosine.
        let mut basis = vec![Complex64::new(0.0, 0.0); nt * ns];
        for (ti, &y) in ys.iter().enumerate() {
            let s = y * tau + half_l;
            for m in 0..ns {
                let e = if m == nyq {
                    Complex64::new((k[m] * s).cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, k[m] * s)
                };
                basis[ti * ns + m] = e / ns as f64;
            }
        }
        let outer: usize = shape[..j].iter().product();
        let inner: usize = shape[j + 1..].iter().product();
        let fft = planner.plan_fft_forward(ns);
        let mut next = vec![Complex64::new(0.0, 0.0); outer * nt * inner];
        let mut line = vec![Complex64::new(0.0, 0.0); ns];
        for o in 0..outer {
            for i in 0..inner {
                for m in 0..ns {
                    line[m] = w[(o * ns + m) * inner + i];
                }
                fft.process(&mut line);
                for ti in 0..nt {
                    let row = &basis[ti * ns..(ti + 1) * ns];
                    let v: Complex64 = row.iter().zip(&line).map(|(e, c)| e * c).sum();
                    next[(o * nt + ti) * inner + i] = v;
                }
            }
        }
        shape[j] = nt;
        w = next;
    }

    let p = frame.rescaled_count() as f64;
    let scale = tau.powf(p / 2.0) / frame.norm_factor;
    for v in &mut w {
        *v *= scale;
    }
    let mut out = WaveField::new(
        target.clone(),
        w,
        field.potential.clone(),
        field.lambda,
        field.epsilon,
    )?
    .with_frame(Frame::Rescaled(frame.clone()))?;
    out.t = field.t;
    Ok(out)
}

/// Integrate `values` over every axis not listed in `keep`.
fn reduce_to(grid: &Grid, values: &[f64], keep: &[usize]) -> Result<(Grid, Vec<f64>)> {
    if keep.is_empty() || keep.iter().any(|&j| j >= grid.dim()) {
        return Err(Error::invalid("marginal axes out of range"));
    }
    let sub = grid.sub_grid(keep)?;
    let dropped: f64 = (0..grid.dim())
        .filter(|j| !keep.contains(j))
        .map(|j| grid.spacing(j))
        .product();
    let mut out = vec![0.0; sub.len()];
    for (i, v) in values.iter().enumerate() {
        let mut flat = 0;
        for (sj, &j) in keep.iter().enumerate() {
            flat += grid.axis_index(i, j) * sub.stride(sj);
        }
        out[flat] += v;
    }
    for o in &mut out {
        *o *= dropped;
    }
    Ok((sub, out))
}

/// `ρ(y) = ∫ |v(x', y)|² dx'` over the axes not in `keep`.
///
/// For a field in the free or partial rescaled frame, `∫ρ = π^{p/2}`.
pub fn marginal_density(field: &WaveField, keep: &[usize]) -> Result<(Grid, Vec<f64>)> {
    reduce_to(&field.grid, &field.density(), keep)
}

/// `j_k(y) = ∫ Im(conj(v) ∂_k v) dx'` for each kept axis `k`.
pub fn marginal_current(field: &WaveField, keep: &[usize]) -> Result<(Grid, Vec<Vec<f64>>)> {
    let mut sp = Spectral::new(&field.grid);
    let mut out = Vec::with_capacity(keep.len());
    let mut sub = None;
    for &k in keep {
        if k >= field.dim() {
            return Err(Error::invalid("marginal axes out of range"));
        }
        let dv = sp.derivative(&field.values, k);
        let j: Vec<f64> = field.values.iter().zip(&dv).map(|(v, g)| (v.conj() * g).im).collect();
        let (g, r) = reduce_to(&field.grid, &j, keep)?;
        sub = Some(g);
        out.push(r);
    }
    let sub = sub.ok_or_else(|| Error::invalid("no marginal axes"))?;
    Ok((sub, out))
}
