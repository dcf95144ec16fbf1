//! CSV formats.
//!
//! Diagnostics series: one row per saved sample with columns
//! `t, mass, energy, energy_eps, J_0.., I2_0.., second_moment, llogl,
//! kin_0.., w1_0.., dual_logsob, relative_entropy`; optional columns are
//! left empty when not computed.
//!
//! Densities: columns `x` (or `x0, x1, ..`) then `density`, sampled on a
//! complete uniform grid in any row order.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::DiagnosticsRecord;

fn record_header(d: usize) -> Vec<String> {
    let mut h = vec!["t", "mass", "energy", "energy_eps"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    h.extend((0..d).map(|j| format!("J_{j}")));
    h.extend((0..d).map(|j| format!("I2_{j}")));
    h.push("second_moment".into());
    h.push("llogl".into());
    h.extend((0..d).map(|j| format!("kin_{j}")));
    h.extend((0..d).map(|j| format!("w1_{j}")));
    h.push("dual_logsob".into());
    h.push("relative_entropy".into());
    h
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write a diagnostics series; `d` fixes the number of per-axis columns.
pub fn write_records_csv<W: Write>(out: W, d: usize, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(record_header(d))?;
    for r in records {
        let mut row = vec![
            r.t.to_string(),
            r.mass.to_string(),
            r.energy.to_string(),
            r.energy_eps.to_string(),
        ];
        row.extend(r.momentum.iter().map(f64::to_string));
        row.extend(r.center.iter().map(f64::to_string));
        row.push(r.second_moment.to_string());
        row.push(r.llogl.to_string());
        row.extend(r.kinetic.iter().map(f64::to_string));
        for j in 0..d {
            row.push(opt(r.w1.as_ref().and_then(|w| w.get(j).copied())));
        }
        row.push(opt(r.dual_logsob));
        row.push(opt(r.relative_entropy));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Density samples on a complete uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySamples {
    /// One row per sample, `d` coordinates each.
    pub points: Vec<Vec<f64>>,
    pub density: Vec<f64>,
    pub cell_volume: f64,
}

impl DensitySamples {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn r2(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.iter().map(|x| x * x).sum()).collect()
    }
}

pub fn parse_density_csv<R: Read>(input: R) -> Result<DensitySamples> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers()?.clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < 2 || cols[cols.len() - 1] != "density" {
        return Err(Error::Format("density CSV needs coordinate columns then `density`".into()));
    }
    let d = cols.len() - 1;
    let ok_names = if d == 1 {
        cols[0] == "x" || cols[0] == "x0"
    } else {
        (0..d).all(|j| cols[j] == format!("x{j}"))
    };
    if !ok_names {
        return Err(Error::Format(format!("unexpected coordinate columns {:?}", &cols[..d])));
    }
    let mut points = Vec::new();
    let mut density = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != d + 1 {
            return Err(Error::Format(format!("row {}: expected {} fields", row + 1, d + 1)));
        }
        let mut vals = Vec::with_capacity(d + 1);
        for f in rec.iter() {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::Format(format!("row {}: `{f}` is not a number", row + 1)))?;
            if !v.is_finite() {
                return Err(Error::Format(format!("row {}: non-finite value", row + 1)));
            }
            vals.push(v);
        }
        let rho = vals.pop().unwrap_or(0.0);
        if rho < 0.0 {
            return Err(Error::Format(format!("row {}: negative density", row + 1)));
        }
        points.push(vals);
        density.push(rho);
    }
    let mut cell = 1.0;
    let mut expected = 1usize;
    for j in 0..d {
        let mut xs: Vec<f64> = points.iter().map(|p| p[j]).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.len() < 2 {
            return Err(Error::Format(format!("axis {j}: need at least two distinct coordinates")));
        }
        let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        let uniform = xs
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300));
        if !(h > 0.0) || !uniform {
            return Err(Error::Format(format!("axis {j}: coordinates are not uniformly spaced")));
        }
        cell *= h;
        expected = expected.saturating_mul(xs.len());
    }
    if expected != points.len() {
        return Err(Error::Format(format!(
            "expected {expected} samples for a complete grid, found {}",
            points.len()
        )));
    }
    Ok(DensitySamples {
        points,
        density,
        cell_volume: cell,
    })
}

pub fn read_density_csv(path: &Path) -> Result<DensitySamples> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_density_csv(f)
}

pub fn write_density_csv<W: Write>(out: W, points: &[Vec<f64>], density: &[f64]) -> Result<()> {
    if points.len() != density.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: density.len(),
        });
    }
    let d = points.first().map_or(1, Vec::len);
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = if d == 1 {
        vec!["x".into()]
    } else {
        (0..d).map(|j| format!("x{j}")).collect()
    };
    header.push("density".into());
    w.write_record(&header)?;
    for (p, rho) in points.iter().zip(density) {
        let mut row: Vec<String> = p.iter().map(f64::to_string).collect();
        row.push(rho.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
