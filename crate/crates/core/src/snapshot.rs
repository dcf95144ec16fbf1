//! Binary field snapshots.
//!
//! Layout (little-endian): `"LNLS"`, `u32` version, `u8` ndim, then per axis
//! `u32 N` and `f64 L`, then `f64 t`, `f64 λ`, `f64 ε`, then the row-major
//! values as `(f64 re, f64 im)` pairs. A JSON sidecar with the same stem
//! holds the run configuration.

use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::grid::Grid;
use crate::potentials::PotentialSpec;

pub const MAGIC: &[u8; 4] = b"LNLS";
pub const VERSION: u32 = 1;
/// Largest accepted dimension.
pub const MAX_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub t: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub values: Vec<Complex64>,
}

impl Snapshot {
    pub fn from_field(field: &WaveField) -> Self {
        Snapshot {
            grid: field.grid.clone(),
            t: field.t,
            lambda: field.lambda,
            epsilon: field.epsilon,
            values: field.values.clone(),
        }
    }

    /// Physical-frame field carrying the stored values and time.
    pub fn into_field(self, potential: PotentialSpec) -> Result<WaveField> {
        let mut f = WaveField::new(self.grid, self.values, potential, self.lambda, self.epsilon)?;
        f.t = self.t;
        Ok(f)
    }

    pub fn encode(&self) -> Vec<u8> {
        let d = self.grid.dim();
        let mut out = Vec::with_capacity(9 + 12 * d + 24 + 16 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(d as u8);
        for j in 0..d {
            out.extend_from_slice(&(self.grid.shape()[j] as u32).to_le_bytes());
            out.extend_from_slice(&self.grid.lengths()[j].to_le_bytes());
        }
        for v in [self.t, self.lambda, self.epsilon] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("missing LNLS magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported snapshot version {version}")));
        }
        let d = r.take(1)?[0] as usize;
        if d == 0 || d > MAX_DIM {
            return Err(Error::Format(format!("dimension {d} outside 1..={MAX_DIM}")));
        }
        let mut n = Vec::with_capacity(d);
        let mut l = Vec::with_capacity(d);
        for _ in 0..d {
            n.push(r.u32()? as usize);
            l.push(r.f64()?);
        }
        let t = r.f64()?;
        let lambda = r.f64()?;
        let epsilon = r.f64()?;
        let total = n
            .iter()
            .try_fold(1usize, |acc, &k| acc.checked_mul(k))
            .ok_or_else(|| Error::Format("grid size overflows".into()))?;
        let remaining = bytes.len() - r.pos;
        if total.checked_mul(16) != Some(remaining) {
            return Err(Error::Format(format!(
                "expected {total} values, payload has {remaining} bytes"
            )));
        }
        let grid = Grid::new(n, l).map_err(|e| Error::Format(e.to_string()))?;
        if !(t.is_finite() && lambda.is_finite() && epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::Format("t, lambda and epsilon must be finite, epsilon >= 0".into()));
        }
        let mut values = Vec::with_capacity(total);
        for _ in 0..total {
            let v = Complex64::new(r.f64()?, r.f64()?);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Format("non-finite field value".into()));
            }
            values.push(v);
        }
        Ok(Snapshot {
            grid,
            t,
            lambda,
            epsilon,
            values,
        })
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.buf.len());
        match end {
            Some(e) => {
                let s = &self.buf[self.pos..e];
                self.pos = e;
                Ok(s)
            }
            None => Err(Error::Format(format!("truncated snapshot at byte {}", self.pos))),
        }
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f64(&mut self) -> Result<f64> {
        let mut a = [0u8; 8];
        a.copy_from_slice(self.take(8)?);
        Ok(f64::from_le_bytes(a))
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Write `path` and its JSON sidecar.
pub fn write_snapshot(path: &Path, field: &WaveField, sidecar: &serde_json::Value) -> Result<()> {
    std::fs::write(path, Snapshot::from_field(field).encode()).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(sidecar)?;
    std::fs::write(&side, text).map_err(|e| Error::io(&side, e))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Snapshot::decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        let grid = Grid::new(vec![8, 16], vec![3.0, 5.5]).unwrap();
        let values = (0..grid.len())
            .map(|i| Complex64::new(i as f64 * 0.25, -(i as f64).sqrt()))
            .collect();
        Snapshot {
            grid,
            t: 1.5,
            lambda: -0.25,
            epsilon: 1e-12,
            values,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = sample();
        let bytes = s.encode();
        assert_eq!(&bytes[..4], b"LNLS");
        assert_eq!(bytes.len(), 4 + 4 + 1 + 2 * 12 + 24 + 16 * 128);
        let back = Snapshot::decode(&bytes).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.encode(), bytes);
    }

    #[test]
    fn header_layout() {
        let bytes = sample().encode();
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(bytes[8], 2);
        assert_eq!(u32::from_le_bytes(bytes[9..13].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(bytes[13..21].try_into().unwrap()), 3.0);
    }

    #[test]
    fn rejects_corruption() {
        let good = sample().encode();
        assert!(Snapshot::decode(&good[..good.len() - 1]).is_err());
        assert!(Snapshot::decode(&good[..20]).is_err());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(Snapshot::decode(&bad).is_err());
        let mut bad = good.clone();
        bad[4] = 2;
        assert!(Snapshot::decode(&bad).is_err());
        let mut bad = good.clone();
        bad[9..13].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(Snapshot::decode(&bad).is_err());
        let mut bad = good.clone();
        let n = bad.len();
        bad[n - 8..].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(Snapshot::decode(&bad).is_err());
        assert!(Snapshot::decode(&[]).is_err());
    }

    #[test]
    fn file_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.lnls");
        let s = sample();
        let f = s.clone().into_field(PotentialSpec::free(2)).unwrap();
        write_snapshot(&path, &f, &serde_json::json!({"lambda": -0.25})).unwrap();
        assert_eq!(read_snapshot(&path).unwrap(), s);
        let side: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(side["lambda"], -0.25);
    }
}
