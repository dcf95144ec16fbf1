//! Rectangular periodic grids and the N-d discrete Fourier transform on them.
//!
//! Values are stored row-major with the last axis contiguous. Axis `j` has
//! `N_j` points `x = -L_j/2 + k h_j`, `k = 0..N_j`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct Grid {
    n: Vec<usize>,
    l: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    n: Vec<usize>,
    l: Vec<f64>,
}

impl TryFrom<RawGrid> for Grid {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        Grid::new(raw.n, raw.l)
    }
}

impl From<Grid> for RawGrid {
    fn from(g: Grid) -> Self {
        RawGrid { n: g.n, l: g.l }
    }
}

impl Grid {
    pub fn new(n: Vec<usize>, l: Vec<f64>) -> Result<Self> {
        if n.is_empty() {
            return Err(Error::invalid("grid needs at least one axis"));
        }
        if n.len() != l.len() {
            return Err(Error::DimensionMismatch {
                expected: n.len(),
                got: l.len(),
            });
        }
        let mut total: usize = 1;
        for (j, (&nj, &lj)) in n.iter().zip(&l).enumerate() {
            if nj < MIN_POINTS || !nj.is_power_of_two() {
                return Err(Error::invalid(format!(
                    "axis {j}: N must be a power of two >= {MIN_POINTS}, got {nj}"
                )));
            }
            if !(lj > 0.0 && lj.is_finite()) {
                return Err(Error::invalid(format!("axis {j}: L must be > 0, got {lj}")));
            }
            total = total
                .checked_mul(nj)
                .ok_or_else(|| Error::invalid("grid size overflows"))?;
        }
        Ok(Grid { n, l })
    }

    pub fn uniform(d: usize, n: usize, l: f64) -> Result<Self> {
        Grid::new(vec![n; d], vec![l; d])
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.n
    }

    pub fn lengths(&self) -> &[f64] {
        &self.l
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, j: usize) -> f64 {
        self.l[j] / self.n[j] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|j| self.spacing(j)).product()
    }

    /// Distance between consecutive flat indices along axis `j`.
    pub fn stride(&self, j: usize) -> usize {
        self.n[j + 1..].iter().product()
    }

    /// Index along axis `j` of flat index `i`.
    pub fn axis_index(&self, i: usize, j: usize) -> usize {
        (i / self.stride(j)) % self.n[j]
    }

    pub fn coords(&self, j: usize) -> Vec<f64> {
        let h = self.spacing(j);
        let x0 = -0.5 * self.l[j];
        (0..self.n[j]).map(|k| x0 + k as f64 * h).collect()
    }

    /// Wavenumbers `2πm/L` in transform order, `m = 0..N/2-1, -N/2..-1`.
    pub fn wavenumbers(&self, j: usize) -> Vec<f64> {
        let n = self.n[j];
        let f = 2.0 * PI / self.l[j];
        (0..n)
            .map(|k| {
                let m = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                f * m
            })
            .collect()
    }

    /// Per-axis coordinate arrays expanded to one value per grid point.
    pub fn coordinate_field(&self, j: usize) -> Vec<f64> {
        let x = self.coords(j);
        let s = self.stride(j);
        let n = self.n[j];
        (0..self.len()).map(|i| x[(i / s) % n]).collect()
    }

    /// Calls `f(flat_index, point)` for every grid point in storage order.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[f64])) {
        let axes: Vec<Vec<f64>> = (0..self.dim()).map(|j| self.coords(j)).collect();
        let d = self.dim();
        let mut idx = vec![0usize; d];
        let mut x: Vec<f64> = axes.iter().map(|a| a[0]).collect();
        for i in 0..self.len() {
            f(i, &x);
            for j in (0..d).rev() {
                idx[j] += 1;
                if idx[j] < self.n[j] {
                    x[j] = axes[j][idx[j]];
                    break;
                }
                idx[j] = 0;
                x[j] = axes[j][0];
            }
        }
    }

    /// Same grid restricted to the listed axes.
    pub fn sub_grid(&self, axes: &[usize]) -> Result<Grid> {
        Grid::new(
            axes.iter().map(|&j| self.n[j]).collect(),
            axes.iter().map(|&j| self.l[j]).collect(),
        )
    }
}

/// Multiply every line along axis `j` pointwise by `factor` (length `N_j`).
pub fn scale_along_axis<T>(grid: &Grid, data: &mut [Complex64], j: usize, factor: &[T])
where
    T: Copy + std::ops::Mul<Complex64, Output = Complex64>,
{
    let s = grid.stride(j);
    let n = grid.shape()[j];
    let block = s * n;
    for chunk in data.chunks_mut(block) {
        for (k, line) in chunk.chunks_mut(s).enumerate() {
            let f = factor[k];
            for v in line {
                *v = f * *v;
            }
        }
    }
}

/// Planned forward/inverse transforms for one grid shape.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    scratch: Vec<Complex64>,
    line: Vec<Complex64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward: Vec<_> = grid.shape().iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse: Vec<_> = grid.shape().iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let scratch_len = forward
            .iter()
            .chain(&inverse)
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        let max_n = grid.shape().iter().copied().max().unwrap_or(0);
        Spectral {
            grid: grid.clone(),
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            line: vec![Complex64::new(0.0, 0.0); max_n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn transform(&mut self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.grid.len(), "buffer does not match grid");
        for j in 0..self.grid.dim() {
            let plan = if inverse {
                self.inverse[j].clone()
            } else {
                self.forward[j].clone()
            };
            let n = self.grid.shape()[j];
            let s = self.grid.stride(j);
            if s == 1 {
                plan.process_with_scratch(data, &mut self.scratch);
                continue;
            }
            let line = &mut self.line[..n];
            for block in data.chunks_mut(n * s) {
                for i in 0..s {
                    for k in 0..n {
                        line[k] = block[k * s + i];
                    }
                    plan.process_with_scratch(line, &mut self.scratch);
                    for k in 0..n {
                        block[k * s + i] = line[k];
                    }
                }
            }
        }
    }

    /// Unnormalized forward transform.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    /// Inverse transform including the `1/N` normalization.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.transform(data, true);
        let scale = 1.0 / self.grid.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Spectral derivative along axis `j`; the Nyquist mode is dropped.
    pub fn derivative(&mut self, data: &[Complex64], j: usize) -> Vec<Complex64> {
        let mut out = data.to_vec();
        self.forward(&mut out);
        let n = self.grid.shape()[j];
        let mut ik: Vec<Complex64> = self
            .grid
            .wavenumbers(j)
            .into_iter()
            .map(|k| Complex64::new(0.0, k))
            .collect();
        ik[n / 2] = Complex64::new(0.0, 0.0);
        scale_along_axis(&self.grid, &mut out, j, &ik);
        self.inverse(&mut out);
        out
    }
}

/// Band-limited resampling of a periodic field onto `target`, which must
/// have the same box lengths. Axes are resampled one at a time; a dropped
/// Nyquist pair is folded, a split one is shared equally.
pub fn resample(grid: &Grid, data: &[Complex64], target: &Grid) -> Result<Vec<Complex64>> {
    if target.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: target.dim(),
        });
    }
    if target.lengths() != grid.lengths() {
        return Err(Error::invalid("resampling needs matching box lengths"));
    }
    if data.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: data.len(),
        });
    }
    let mut shape = grid.shape().to_vec();
    let mut cur = data.to_vec();
    let mut planner = FftPlanner::new();
    for j in 0..grid.dim() {
        let (ns, nt) = (shape[j], target.shape()[j]);
        if ns == nt {
            continue;
        }
        let outer: usize = shape[..j].iter().product();
        let inner: usize = shape[j + 1..].iter().product();
        let fwd = planner.plan_fft_forward(ns);
        let inv = planner.plan_fft_inverse(nt);
        let mut next = vec![Complex64::new(0.0, 0.0); outer * nt * inner];
        let mut src = vec![Complex64::new(0.0, 0.0); ns];
        let mut dst = vec![Complex64::new(0.0, 0.0); nt];
        let scale = 1.0 / ns as f64;
        for o in 0..outer {
            for i in 0..inner {
                for k in 0..ns {
                    src[k] = cur[(o * ns + k) * inner + i];
                }
                fwd.process(&mut src);
                dst.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                let half = ns.min(nt) / 2;
                for m in 0..half {
                    dst[m] = src[m];
                }
                for m in 1..half {
                    dst[nt - m] = src[ns - m];
                }
                if nt > ns {
                    let c = src[ns / 2] * 0.5;
                    dst[ns / 2] = c;
                    dst[nt - ns / 2] = c;
                } else {
                    dst[nt / 2] = src[nt / 2] + src[ns - nt / 2];
                }
                inv.process(&mut dst);
                for k in 0..nt {
                    next[(o * nt + k) * inner + i] = dst[k] * scale;
                }
            }
        }
        shape[j] = nt;
        cur = next;
    }
    Ok(cur)
}
