use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded superposition of `components` Gaussian packets
/// `w e^{iθ} e^{-a(x−c)²/2 + ipx}` with `w ∈ [0.5, 1]`, `a ∈ [0.7, 2]`,
/// `c ∈ [−1.5, 1.5]`, `p ∈ [−0.5, 0.5]`: a smooth, non-Gaussian Σ datum.
pub fn mixture_1d(x: &[f64], seed: u64, components: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts: Vec<(f64, f64, f64, f64, f64)> = (0..components.max(1))
        .map(|_| {
            (
                rng.random_range(0.5..1.0),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.7..2.0),
                rng.random_range(-1.5..1.5),
                rng.random_range(-0.5..0.5),
            )
        })
        .collect();
    x.iter()
        .map(|&x| {
            parts
                .iter()
                .map(|&(w, th, a, c, p)| {
                    let y = x - c;
                    Complex64::from_polar(w * (-0.5 * a * y * y).exp(), th + p * x)
                })
                .sum()
        })
        .collect()
}
