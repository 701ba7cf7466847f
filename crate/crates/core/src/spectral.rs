//! Principal Dirichlet eigenpair of `−Δ` on the ball.

use crate::error::{Error, Result};
use crate::radial::{RadialField, RadialGrid};
use crate::scalar::Real;
use crate::tridiag::ThomasFactor;

const MAX_ITERATIONS: usize = 1000;

/// `(λ₁, e₁)` with `∫ e₁² = 1` and `e₁ > 0` on `[0, R)`.
#[derive(Clone, Debug)]
pub struct EigenPair<T> {
    pub lambda1: T,
    pub e1: RadialField<T>,
    pub iterations: usize,
}

impl<T: Real> EigenPair<T> {
    /// Open existence window `(3λ₁/10, λ₁)`.
    pub fn lambda_window(&self) -> (T, T) {
        lambda_window(self.lambda1)
    }
}

pub fn lambda_window<T: Real>(lambda1: T) -> (T, T) {
    (T::lit(0.3) * lambda1, lambda1)
}

/// Inverse power iteration on the `v = r·u` operator `tridiag(−1, 2, −1)/h²`,
/// stopped when the Rayleigh quotient changes by less than `tol` (relative).
pub fn principal_eigenpair<T: Real>(grid: &RadialGrid<T>, tol: T) -> Result<EigenPair<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidParams(format!(
            "eigen tolerance must be positive, got {tol}"
        )));
    }
    let n = grid.intervals() - 1;
    let h = grid.step();
    let radius = grid.radius();
    let factor = ThomasFactor::<T>::dirichlet_laplacian(n);

    let rayleigh = |psi: &[T]| -> T {
        let mut num = psi[0] * psi[0] + psi[n - 1] * psi[n - 1];
        for w in psi.windows(2) {
            num = num + (w[1] - w[0]) * (w[1] - w[0]);
        }
        let den: T = psi.iter().map(|&x| x * x).sum();
        num / (den * h * h)
    };
    let normalize = |psi: &mut [T]| {
        let norm = psi.iter().map(|&x| x * x).sum::<T>().sqrt();
        psi.iter_mut().for_each(|x| *x = *x / norm);
    };

    let mut psi: Vec<T> = (1..=n)
        .map(|i| {
            let r = grid.node(i);
            r * (radius - r)
        })
        .collect();
    normalize(&mut psi);
    let mut lambda = rayleigh(&psi);
    let mut iterations = 0;
    loop {
        if iterations == MAX_ITERATIONS {
            return Err(Error::EigenNotConverged {
                iterations,
                last: lambda.as_f64(),
                last_iterate: psi.iter().map(|x| x.as_f64()).collect(),
            });
        }
        factor.solve_in_place(&mut psi);
        normalize(&mut psi);
        iterations += 1;
        let next = rayleigh(&psi);
        let change = (next - lambda).abs();
        lambda = next;
        if change < tol * lambda {
            break;
        }
    }

    if psi[0] < T::zero() {
        psi.iter_mut().for_each(|x| *x = -*x);
    }
    let u: Vec<T> = psi
        .iter()
        .enumerate()
        .map(|(k, &p)| p / grid.node(k + 1))
        .collect();
    let mut e1 = RadialField::from_interior(*grid, &u);
    let mass = e1.lp_mass(2)?;
    e1 = e1.scaled(T::one() / mass.sqrt());
    let lambda1 = e1.dirichlet_energy() / e1.lp_mass(2)?;
    Ok(EigenPair {
        lambda1,
        e1,
        iterations,
    })
}
