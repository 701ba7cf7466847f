//! Unweighted least-squares fits in a small function basis, used for the
//! small-`eps` extrapolations.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// Largest absolute residual over the data, relative to the largest |y|.
    pub max_relative_residual: f64,
}

impl LinearFit {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }
}

/// Fits `y ≈ Σⱼ cⱼ xᵢ^{powers[j]}` by least squares (SVD).
pub fn fit_powers(x: &[f64], y: &[f64], powers: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= powers.len(), "underdetermined fit");
    let design = DMatrix::from_fn(x.len(), powers.len(), |i, j| x[i].powf(powers[j]));
    let rhs = DVector::from_column_slice(y);
    let solution = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .expect("SVD with both factors computed");
    let fitted = &design * &solution;
    let scale = y
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let max_relative_residual = fitted
        .iter()
        .zip(y)
        .map(|(f, v)| (f - v).abs() / scale)
        .fold(0.0, f64::max);
    LinearFit {
        coefficients: solution.iter().copied().collect(),
        max_relative_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_polynomial() {
        let x = [0.1, 0.2, 0.4, 0.8, 1.6];
        let y: Vec<f64> = x.iter().map(|t| 2.0 - 3.0 * t + 0.5 * t * t).collect();
        let fit = fit_powers(&x, &y, &[0.0, 1.0, 2.0]);
        for (c, e) in fit.coefficients.iter().zip([2.0, -3.0, 0.5]) {
            assert!((c - e).abs() < 1e-10);
        }
        assert!(fit.max_relative_residual < 1e-12);
    }

    #[test]
    fn straight_line_through_noisy_points() {
        let fit = fit_powers(&[0.0, 1.0, 2.0], &[0.0, 1.0, 1.0], &[0.0, 1.0]);
        assert!((fit.intercept() - 1.0 / 6.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 0.5).abs() < 1e-12);
    }
}
