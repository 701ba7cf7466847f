//! Thomas algorithm for tridiagonal systems.
//!
//! Every linear solve in the crate goes through [`ThomasFactor`]: the Poisson
//! reduction, the Sobolev gradient and the inverse iteration for `λ₁`.

use crate::scalar::Real;

/// LU factorization of a tridiagonal matrix, reusable across right-hand sides.
///
/// No pivoting is performed, so the matrix should be diagonally dominant or
/// symmetric positive definite (the only case used here).
#[derive(Clone, Debug)]
pub struct ThomasFactor<T> {
    lower: Vec<T>,
    upper_scaled: Vec<T>,
    pivots: Vec<T>,
}

impl<T: Real> ThomasFactor<T> {
    /// `lower[i]` couples row `i + 1` to column `i`, `upper[i]` couples row `i`
    /// to column `i + 1`.
    pub fn new(lower: &[T], diag: &[T], upper: &[T]) -> Self {
        let n = diag.len();
        assert!(n >= 1, "empty tridiagonal system");
        assert_eq!(lower.len(), n - 1, "sub-diagonal length");
        assert_eq!(upper.len(), n - 1, "super-diagonal length");

        let mut pivots = Vec::with_capacity(n);
        let mut upper_scaled = Vec::with_capacity(n - 1);
        pivots.push(diag[0]);
        for i in 1..n {
            let c = upper[i - 1] / pivots[i - 1];
            upper_scaled.push(c);
            pivots.push(diag[i] - lower[i - 1] * c);
        }
        Self {
            lower: lower.to_vec(),
            upper_scaled,
            pivots,
        }
    }

    /// Factor of `tridiag(−1, 2, −1)` of order `n`.
    pub fn dirichlet_laplacian(n: usize) -> Self {
        let off = vec![-T::one(); n.saturating_sub(1)];
        let diag = vec![T::lit(2.0); n];
        Self::new(&off, &diag, &off)
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let n = self.len();
        assert_eq!(rhs.len(), n, "right-hand side length");
        rhs[0] = rhs[0] / self.pivots[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i - 1] * rhs[i - 1]) / self.pivots[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - self.upper_scaled[i] * rhs[i + 1];
        }
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
