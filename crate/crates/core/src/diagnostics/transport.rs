use crate::error::{Error, Result};

/// Relative mass mismatch accepted by [`wasserstein1_1d`].
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Cumulative trapezoid integral, starting at 0.
pub fn trapezoid_cdf(p: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in p.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Scale a density so that its trapezoid integral is 1.
pub fn normalize_density(p: &[f64], h: f64) -> Result<Vec<f64>> {
    check_density(p)?;
    let m = *trapezoid_cdf(p, h).last().unwrap_or(&0.0);
    if !(m > 0.0) {
        return Err(Error::invalid("density has zero mass"));
    }
    Ok(p.iter().map(|v| v / m).collect())
}

fn check_density(p: &[f64]) -> Result<()> {
    if p.len() < 2 {
        return Err(Error::invalid("density needs at least two samples"));
    }
    if let Some(v) = p.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::invalid(format!("density values must be finite and >= 0, got {v}")));
    }
    Ok(())
}

/// `W₁(p, q) = ∫ |P − Q|` for densities sampled on one uniform axis with
/// spacing `h`, `P` and `Q` their trapezoid CDFs.
pub fn wasserstein1_1d(p: &[f64], q: &[f64], h: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("spacing must be > 0"));
    }
    check_density(p)?;
    check_density(q)?;
    let cp = trapezoid_cdf(p, h);
    let cq = trapezoid_cdf(q, h);
    let (mp, mq) = (*cp.last().unwrap(), *cq.last().unwrap());
    if (mp - mq).abs() > MASS_TOLERANCE * mp.max(mq) {
        return Err(Error::MassMismatch { p: mp, q: mq });
    }
    let diff: Vec<f64> = cp.iter().zip(&cq).map(|(a, b)| (a - b).abs()).collect();
    Ok(*trapezoid_cdf(&diff, h).last().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gaussian(n: usize, h: f64, c: f64) -> Vec<f64> {
        let x0 = -(n as f64) * h / 2.0;
        let p: Vec<f64> = (0..n)
            .map(|k| {
                let x = x0 + k as f64 * h;
                (-(x - c) * (x - c)).exp()
            })
            .collect();
        normalize_density(&p, h).unwrap()
    }

    #[test]
    fn identical_is_zero() {
        let p = gaussian(512, 0.05, 0.0);
        assert_eq!(wasserstein1_1d(&p, &p, 0.05).unwrap(), 0.0);
    }

    #[test]
    fn shift_gives_distance() {
        let h = 0.02;
        let p = gaussian(2048, h, -0.7);
        let q = gaussian(2048, h, 0.55);
        let w = wasserstein1_1d(&p, &q, h).unwrap();
        assert!((w - 1.25).abs() < 1e-9, "{w}");
    }

    #[test]
    fn mass_mismatch_is_an_error() {
        let p = gaussian(256, 0.1, 0.0);
        let q: Vec<f64> = p.iter().map(|v| v * 1.01).collect();
        assert!(matches!(
            wasserstein1_1d(&p, &q, 0.1),
            Err(Error::MassMismatch { .. })
        ));
        let neg = {
            let mut v = p.clone();
            v[3] = -1.0;
            v
        };
        assert!(wasserstein1_1d(&neg, &p, 0.1).is_err());
    }

    fn mixture(params: &[(f64, f64, f64)], n: usize, h: f64) -> Vec<f64> {
        let x0 = -(n as f64) * h / 2.0;
        let p: Vec<f64> = (0..n)
            .map(|k| {
                let x = x0 + k as f64 * h;
                params.iter().map(|(w, c, a)| w * (-a * (x - c) * (x - c)).exp()).sum()
            })
            .collect();
        normalize_density(&p, h).unwrap()
    }

    proptest! {
        #[test]
        fn symmetric_and_triangle(
            a in proptest::collection::vec((0.1f64..1.0, -3.0f64..3.0, 0.3f64..3.0), 1..4),
            b in proptest::collection::vec((0.1f64..1.0, -3.0f64..3.0, 0.3f64..3.0), 1..4),
            c in proptest::collection::vec((0.1f64..1.0, -3.0f64..3.0, 0.3f64..3.0), 1..4),
        ) {
            let h = 0.05;
            let (p, q, r) = (mixture(&a, 512, h), mixture(&b, 512, h), mixture(&c, 512, h));
            let pq = wasserstein1_1d(&p, &q, h).unwrap();
            prop_assert_eq!(pq, wasserstein1_1d(&q, &p, h).unwrap());
            let pr = wasserstein1_1d(&p, &r, h).unwrap();
            let rq = wasserstein1_1d(&r, &q, h).unwrap();
            prop_assert!(pq <= pr + rq + 1e-9);
        }
    }
}
