//! Classical fourth-order Runge–Kutta on a fixed step.
//!
//! The state is a flat `[f64]`; complex unknowns are stored as interleaved
//! `(re, im)` pairs by the callers.

/// Reusable stage buffers for [`Rk4::step`].
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Rk4 {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.k1.len()
    }

    /// Advance `y` from `t` to `t + h` in place. `f(t, y, dydt)` fills `dydt`.
    pub fn step<F>(&mut self, f: &mut F, t: f64, y: &mut [f64], h: f64)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        debug_assert_eq!(n, self.dim());
        let half = 0.5 * h;

        f(t, y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + half * self.k1[i];
        }
        f(t + half, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + half * self.k2[i];
        }
        f(t + half, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        f(t + h, &self.tmp, &mut self.k4);
        let sixth = h / 6.0;
        for i in 0..n {
            y[i] += sixth * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

/// Number of fixed steps covering `[0, t_end]` with nominal step `dt`; the
/// last step is not shortened, instead `dt` is adjusted to `t_end / n`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    let n = (t_end / dt).round();
    if n < 1.0 {
        1
    } else {
        n as usize
    }
}
