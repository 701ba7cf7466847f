#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spsolve_core::{PhysParams64, RadialField64, RadialGrid64};

/// Random smooth radial fields `Σₖ aₖ cos((k + ½)πr/R)` with decaying
/// coefficients, all vanishing at `r = R`.
pub fn smooth_fields(grid: &RadialGrid64, count: usize, seed: u64) -> Vec<RadialField64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = grid.radius();
    (0..count)
        .map(|_| {
            let modes = rng.gen_range(1..=6);
            let coeffs: Vec<f64> = (0..modes)
                .map(|k| rng.gen_range(-1.0..1.0) / (1.0 + k as f64))
                .collect();
            let scale = rng.gen_range(0.3..2.0);
            RadialField64::from_fn(*grid, |r| {
                scale
                    * coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, c)| {
                            c * ((k as f64 + 0.5) * std::f64::consts::PI * r / radius).cos()
                        })
                        .sum::<f64>()
            })
            .unwrap()
        })
        .filter(|f| !f.is_zero())
        .collect()
}

pub fn unit_params(lambda: f64, q: f64) -> PhysParams64 {
    PhysParams64::new(lambda, q, 1.0).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// `∫₀^∞ s²/(1 + s²)³ ds` by the substitution `s = tan θ` and a midpoint
/// rule; the closed form is `π/16`.
pub fn bubble_l6_integral() -> f64 {
    let n = 200_000;
    let h = std::f64::consts::FRAC_PI_2 / n as f64;
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            (t.sin() * t.cos()).powi(2)
        })
        .sum::<f64>()
        * h
}

/// Sobolev quotient of the Aubin–Talenti bubble `(1 + r²)^{-1/2}` on ℝ³,
/// from independent quadrature in `θ = atan r`.
pub fn bubble_sobolev_quotient() -> f64 {
    let n = 200_000;
    let h = std::f64::consts::FRAC_PI_2 / n as f64;
    let mut grad = 0.0;
    let mut l6 = 0.0;
    for i in 0..n {
        let t = (i as f64 + 0.5) * h;
        let (s, c) = t.sin_cos();
        // r = tan t, dr = sec² t dt, U = cos t, U′ = −r(1+r²)^{-3/2} = −sin t cos² t
        let jac = 1.0 / (c * c);
        let r2 = (s / c).powi(2);
        grad += (s * c * c).powi(2) * r2 * jac;
        l6 += c.powi(6) * r2 * jac;
    }
    let omega = 4.0 * std::f64::consts::PI;
    (omega * grad * h) / (omega * l6 * h).cbrt()
}
