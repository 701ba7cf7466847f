//! The reduction map `u ↦ φ_u`, solving `−Δφ = q|u|⁵` with `φ(R) = 0`.
//!
//! `φ_u` is computed with the same discrete operator as the `u` equation, so
//! `‖∇φ_u‖² = q∫|u|⁵φ_u` holds to rounding error.

use crate::error::{Error, Result};
use crate::radial::{PhysParams, PoissonSolver, RadialField};
use crate::scalar::{compensated_sum, Real};

#[derive(Clone, Debug)]
pub struct ReducedPotential<T> {
    pub phi: RadialField<T>,
    /// `N(u) = ∫|u|⁵ φ_u`.
    pub coupling_n: T,
    /// `‖∇φ_u‖₂²`.
    pub dirichlet_phi: T,
}

pub fn solve_phi<T: Real>(u: &RadialField<T>, params: &PhysParams<T>) -> ReducedPotential<T> {
    solve_phi_with(&PoissonSolver::new(*u.grid()), u, params)
}

/// [`solve_phi`] with a caller-owned factorization.
pub fn solve_phi_with<T: Real>(
    solver: &PoissonSolver<T>,
    u: &RadialField<T>,
    params: &PhysParams<T>,
) -> ReducedPotential<T> {
    let source = quintic(u);
    let rhs: Vec<T> = source.iter().map(|&s| params.q * s).collect();
    let phi = solver.solve_values(&rhs);
    let coupling_n = u.inner_unchecked_with(&source, phi.values());
    let dirichlet_phi = phi.dirichlet_energy();
    ReducedPotential {
        phi,
        coupling_n,
        dirichlet_phi,
    }
}

/// `|u|⁵` nodewise.
pub(crate) fn quintic<T: Real>(u: &RadialField<T>) -> Vec<T> {
    u.values().iter().map(|v| v.abs().powi(5)).collect()
}

impl<T: Real> RadialField<T> {
    /// `Σ mᵢ aᵢ bᵢ` for raw nodal arrays on this field's grid.
    pub(crate) fn inner_unchecked_with(&self, a: &[T], b: &[T]) -> T {
        let g = self.grid();
        compensated_sum((1..g.intervals()).map(|i| g.mass_weight(i) * a[i] * b[i]))
    }
}

/// `|∫|u|⁵φ_w − ∫|w|⁵φ_u|`; zero up to rounding because the discrete Green
/// operator is symmetric in the variational pairing.
pub fn green_symmetry_defect<T: Real>(
    u: &RadialField<T>,
    w: &RadialField<T>,
    params: &PhysParams<T>,
) -> Result<T> {
    u.check_same_grid(w)?;
    let solver = PoissonSolver::new(*u.grid());
    let phi_u = solve_phi_with(&solver, u, params).phi;
    let phi_w = solve_phi_with(&solver, w, params).phi;
    let uw = u.inner_unchecked_with(&quintic(u), phi_w.values());
    let wu = u.inner_unchecked_with(&quintic(w), phi_u.values());
    Ok((uw - wu).abs())
}

/// `(q/S³)‖∇u‖₂⁵ − ‖∇φ_u‖₂`, nonnegative whenever `sobolev` bounds the
/// discrete quotient `‖∇v‖₂²/‖v‖₆²` from below.
pub fn essi_gap<T: Real>(u: &RadialField<T>, params: &PhysParams<T>, sobolev: T) -> Result<T> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    if !(sobolev > T::zero()) {
        return Err(Error::InvalidParams(format!(
            "Sobolev constant must be positive, got {sobolev}"
        )));
    }
    let reduced = solve_phi(u, params);
    let grad_u = u.dirichlet_energy().sqrt();
    let bound = params.q / sobolev.powi(3) * grad_u.powi(5);
    Ok(bound - reduced.dirichlet_phi.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::RadialGrid;

    fn setup(m: usize) -> (RadialGrid<f64>, PhysParams<f64>) {
        (
            RadialGrid::new(1.0, m).unwrap(),
            PhysParams::new(2.0, 1.0, 1.0).unwrap(),
        )
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn zero_source() {
        let (g, p) = setup(64);
        let red = solve_phi(&RadialField::zeros(g), &p);
        assert!(red.phi.is_zero());
        assert_eq!(red.coupling_n, 0.0);
    }

    #[test]
    fn manufactured_parabola() {
        // −Δ(1 − r²) = 6, so a constant u with q u⁵ = 6 yields φ = 1 − r².
        let q: f64 = 2.0;
        let g = RadialGrid::new(1.0, 256).unwrap();
        let p = PhysParams::new(0.0, q, 1.0).unwrap();
        let c = (6.0 / q).powf(0.2);
        let u = RadialField::from_fn(g, |_| c).unwrap();
        let red = solve_phi(&u, &p);
        for (i, &v) in red.phi.values().iter().enumerate() {
            let r = g.node(i);
            assert!((v - (1.0 - r * r)).abs() < 1e-10, "node {i}");
        }
    }

    #[test]
    fn homogeneity_and_identity() {
        let (g, p) = setup(300);
        let u = RadialField::from_fn(g, |r| (1.0 - r) * (2.0 + (5.0 * r).sin())).unwrap();
        let a = solve_phi(&u, &p);
        let b = solve_phi(&u.scaled(2.0), &p);
        for (x, y) in a.phi.values().iter().zip(b.phi.values()) {
            assert!(rel(*y, 32.0 * x) < 1e-10 || (*x == 0.0 && *y == 0.0));
        }
        assert!(rel(b.coupling_n, 1024.0 * a.coupling_n) < 1e-10);
        assert!(rel(a.dirichlet_phi, p.q * a.coupling_n) < 1e-12);
        assert!(a.phi.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn sign_of_u_does_not_matter() {
        let (g, p) = setup(128);
        let u = RadialField::from_fn(g, |r| (7.0 * r).sin()).unwrap();
        let a = solve_phi(&u, &p);
        let b = solve_phi(&u.abs(), &p);
        assert_eq!(a.phi, b.phi);
        assert!(a.phi.min_interior() >= 0.0);
    }

    #[test]
    fn green_symmetry() {
        let (g, p) = setup(128);
        let u = RadialField::from_fn(g, |r| 1.0 - r * r).unwrap();
        let w = RadialField::from_fn(g, |r| (3.0 * r).cos() * (1.0 - r)).unwrap();
        assert_eq!(green_symmetry_defect(&u, &u, &p).unwrap(), 0.0);
        assert_eq!(
            green_symmetry_defect(&u, &RadialField::zeros(g), &p).unwrap(),
            0.0
        );
        let d = green_symmetry_defect(&u, &w, &p).unwrap();
        let scale = u
            .inner_unchecked_with(&quintic(&u), solve_phi(&w, &p).phi.values())
            .max(1.0);
        assert!(d <= 1e-10 * scale);
        let other = RadialField::zeros(RadialGrid::new(1.0, 64).unwrap());
        assert!(matches!(
            green_symmetry_defect(&u, &other, &p),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn essi_gap_scaling_and_errors() {
        let (g, p) = setup(256);
        let u = RadialField::from_fn(g, |r| 1.0 - r * r).unwrap();
        let s = 5.0;
        let gap = essi_gap(&u, &p, s).unwrap();
        assert!(gap > 0.0);
        let gap2 = essi_gap(&u.scaled(2.0), &p, s).unwrap();
        assert!(rel(gap2, 32.0 * gap) < 1e-10);
        assert_eq!(
            essi_gap(&RadialField::zeros(g), &p, s),
            Err(Error::ZeroField)
        );
        assert!(essi_gap(&u, &p, 0.0).is_err());
    }
}
