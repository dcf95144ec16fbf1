//! JSON run configuration.
//!
//! ```json
//! {
//!   "potential": {"axes": [{"sign": 1, "omega": 1.7320508075688772}]},
//!   "lambda": 1.0,
//!   "epsilon": null,
//!   "grid": {"n": [512], "l": [24.0]},
//!   "initial": {"gausson": {"nu": -0.5, "kappa": 1.0}},
//!   "time": {"dt": 0.001, "t_end": 10.0, "save_every": 100},
//!   "frame": "physical"
//! }
//! ```
//!
//! `initial` is one of `gaussian {a_re, a_im, amplitude, center, velocity}`,
//! `gausson {nu, kappa}` or `snapshot {path}`; `frame` is `"physical"` or
//! `{"rescaled": {"norm_factor": null}}`. A `null` epsilon selects
//! `1e-12 × peak density` of the initial field.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::norm_factor_for;
use crate::error::{Error, Result};
use crate::field::{frame_params, Frame, RescaledFrame, WaveField};
use crate::gaussian::GaussianState;
use crate::grid::{resample, Grid};
use crate::potentials::{gausson_profile, PotentialSpec};
use crate::snapshot::read_snapshot;
use crate::solver::RunOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: Vec<usize>,
    pub l: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub save_every: usize,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialDatum {
    Gaussian {
        a_re: Vec<f64>,
        a_im: Vec<f64>,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default)]
        velocity: Option<Vec<f64>>,
    },
    Gausson {
        nu: f64,
        kappa: f64,
    },
    Snapshot {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameConfig {
    #[default]
    Physical,
    Rescaled {
        /// Overrides the default `N` of the change of unknown.
        #[serde(default)]
        norm_factor: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub lambda: f64,
    #[serde(default)]
    pub epsilon: Option<f64>,
    pub grid: GridConfig,
    pub initial: InitialDatum,
    pub time: TimeConfig,
    #[serde(default)]
    pub frame: FrameConfig,
}

fn finite(x: f64) -> bool {
    x.is_finite()
}

impl RunConfig {
    /// Parse and validate; every semantic problem is reported at once.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
        let errs = cfg.validate();
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let d = self.potential.dim();
        if !finite(self.lambda) {
            errs.push("lambda: must be finite".to_string());
        }
        if let Some(e) = self.epsilon {
            if !(finite(e) && e >= 0.0) {
                errs.push(format!("epsilon: must be finite and >= 0, got {e}"));
            }
        }
        let g = &self.grid;
        if g.n.len() != d {
            errs.push(format!("grid.n: expected {d} entries, got {}", g.n.len()));
        }
        if g.l.len() != d {
            errs.push(format!("grid.l: expected {d} entries, got {}", g.l.len()));
        }
        for (j, &n) in g.n.iter().enumerate() {
            if n < 8 || !n.is_power_of_two() {
                errs.push(format!("grid.n[{j}]: must be a power of two >= 8, got {n}"));
            }
        }
        for (j, &l) in g.l.iter().enumerate() {
            if !(finite(l) && l > 0.0) {
                errs.push(format!("grid.l[{j}]: must be > 0, got {l}"));
            }
        }
        let t = &self.time;
        if !(finite(t.dt) && t.dt > 0.0) {
            errs.push(format!("time.dt: must be > 0, got {}", t.dt));
        }
        if !(finite(t.t_end) && t.t_end >= 0.0) {
            errs.push(format!("time.t_end: must be >= 0, got {}", t.t_end));
        }
        if t.save_every == 0 {
            errs.push("time.save_every: must be >= 1".to_string());
        }
        match &self.initial {
            InitialDatum::Gaussian {
                a_re,
                a_im,
                amplitude,
                center,
                velocity,
            } => {
                let mut len = |name: &str, v: &[f64]| {
                    if v.len() != d {
                        errs.push(format!("initial.gaussian.{name}: expected {d} entries, got {}", v.len()));
                    }
                    if v.iter().any(|x| !finite(*x)) {
                        errs.push(format!("initial.gaussian.{name}: entries must be finite"));
                    }
                };
                len("a_re", a_re);
                len("a_im", a_im);
                if let Some(c) = center {
                    len("center", c);
                }
                if let Some(v) = velocity {
                    len("velocity", v);
                }
                for (j, &a) in a_re.iter().enumerate() {
                    if !(a > 0.0) {
                        errs.push(format!("initial.gaussian.a_re[{j}]: must be > 0, got {a}"));
                    }
                }
                if !(finite(*amplitude) && *amplitude != 0.0) {
                    errs.push("initial.gaussian.amplitude: must be finite and nonzero".to_string());
                }
            }
            InitialDatum::Gausson { nu, kappa } => {
                if !finite(*nu) {
                    errs.push("initial.gausson.nu: must be finite".to_string());
                }
                if !(finite(*kappa) && *kappa > 0.0) {
                    errs.push(format!("initial.gausson.kappa: must be > 0, got {kappa}"));
                }
                if self.lambda == 0.0 {
                    errs.push("initial.gausson: needs lambda != 0".to_string());
                }
            }
            InitialDatum::Snapshot { path } => {
                if path.as_os_str().is_empty() {
                    errs.push("initial.snapshot.path: must not be empty".to_string());
                }
            }
        }
        if let FrameConfig::Rescaled { norm_factor } = &self.frame {
            if let Err(e) = frame_params(&self.potential, self.lambda) {
                errs.push(format!("frame: {e}"));
            }
            if let Some(n) = norm_factor {
                if !(finite(*n) && *n > 0.0) {
                    errs.push(format!("frame.rescaled.norm_factor: must be > 0, got {n}"));
                }
            }
        }
        errs
    }

    /// sha256 of the canonical (key-sorted, compact) JSON form.
    pub fn hash(&self) -> String {
        canonical_hash(&serde_json::to_value(self).unwrap_or(serde_json::Value::Null))
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions::new(self.time.dt, self.time.t_end, self.time.save_every)
    }

    /// The initial field in the configured frame. Relative snapshot paths
    /// are resolved against `base`.
    pub fn build_field(&self, base: &Path) -> Result<WaveField> {
        let errs = self.validate();
        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        let grid = Grid::new(self.grid.n.clone(), self.grid.l.clone())?;
        let d = grid.dim();
        let eps0 = self.epsilon.unwrap_or(0.0);
        let mut field = match &self.initial {
            InitialDatum::Gaussian {
                a_re,
                a_im,
                amplitude,
                center,
                velocity,
            } => {
                let state = GaussianState {
                    widths: a_re.iter().zip(a_im).map(|(&r, &i)| Complex64::new(r, i)).collect(),
                    amplitude: Complex64::new(*amplitude, 0.0),
                    centers: center.clone().unwrap_or_else(|| vec![0.0; d]),
                    velocities: velocity.clone().unwrap_or_else(|| vec![0.0; d]),
                    t: 0.0,
                };
                WaveField::from_gaussian(grid, &state, self.potential.clone(), self.lambda, eps0)?
            }
            InitialDatum::Gausson { nu, kappa } => {
                let state = gausson_profile(*nu, self.lambda, *kappa, d)?;
                WaveField::from_gaussian(grid, &state, self.potential.clone(), self.lambda, eps0)?
            }
            InitialDatum::Snapshot { path } => {
                let full = base.join(path);
                let snap = read_snapshot(&full)?;
                let values = if snap.grid == grid {
                    snap.values
                } else {
                    resample(&snap.grid, &snap.values, &grid)?
                };
                let mut f = WaveField::new(grid, values, self.potential.clone(), self.lambda, eps0)?;
                f.t = snap.t;
                f
            }
        };
        if let FrameConfig::Rescaled { norm_factor } = &self.frame {
            if field.t != 0.0 {
                return Err(Error::invalid("rescaled frames start at t = 0"));
            }
            let (kind, _) = frame_params(&self.potential, self.lambda)?;
            let p = self.potential.axes().iter().filter(|a| a.sign != 1).count();
            let n = norm_factor.unwrap_or_else(|| norm_factor_for(kind, field.mass(), p));
            let frame = RescaledFrame::for_potential(&self.potential, self.lambda, self.time.t_end, self.time.dt, n)?;
            // τ(0) = 1 and τ̇(0) = 0, so v(0) = u(0)/N.
            field.scale(Complex64::new(1.0 / n, 0.0));
            field = field.with_frame(Frame::Rescaled(frame))?;
        }
        if self.epsilon.is_none() {
            field.epsilon = field.default_epsilon();
        }
        Ok(field)
    }
}

/// sha256 hex digest of the compact serialization of `v`. Object keys are
/// sorted by `serde_json`'s default map.
pub fn canonical_hash(v: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(v).unwrap_or_default();
    hex::encode(Sha256::digest(bytes))
}
