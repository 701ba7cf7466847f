//! Pohozaev identity on the ball and the nonexistence probe.
//!
//! For a solution on `B_R`
//!
//! ```text
//! −λ‖u‖₂² + 2πR³u′(R)² + (2π/5)R³φ′(R)² = 0,
//! ```
//!
//! which has no nontrivial solution for `λ ≤ 0`. On computed solutions the
//! left side is a consistency residual of order `h²`.

use crate::energy::fiber_from;
use crate::error::{Error, Result};
use crate::groundstate::{minimize_ground_state, SolveOptions};
use crate::instanton::{compactness_threshold, discrete_sobolev_constant};
use crate::radial::{PhysParams, RadialField, RadialGrid};
use crate::reduction::quintic;
use crate::scalar::Real;
use crate::spectral::principal_eigenpair;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PohozaevReport<T> {
    pub residual: T,
    /// `u′(R)`
    pub boundary_u: T,
    /// `φ′(R)`
    pub boundary_phi: T,
    /// `‖u‖₂²`
    pub l2_u: T,
}

/// Second-order one-sided difference at `r = R`.
fn boundary_derivative<T: Real>(f: &RadialField<T>) -> T {
    let v = f.values();
    let m = f.grid().intervals();
    (T::lit(3.0) * v[m] - T::lit(4.0) * v[m - 1] + v[m - 2]) / (T::lit(2.0) * f.grid().step())
}

pub fn pohozaev_residual<T: Real>(
    u: &RadialField<T>,
    phi: &RadialField<T>,
    params: &PhysParams<T>,
) -> Result<PohozaevReport<T>> {
    u.check_same_grid(phi)?;
    let r3 = params.radius.powi(3);
    let two_pi = T::lit(2.0) * T::PI();
    let du = boundary_derivative(u);
    let dphi = boundary_derivative(phi);
    let l2_u = u.lp_mass(2)?;
    let residual =
        -params.lambda * l2_u + two_pi * r3 * du * du + two_pi / T::lit(5.0) * r3 * dphi * dphi;
    Ok(PohozaevReport {
        residual,
        boundary_u: du,
        boundary_phi: dphi,
        l2_u,
    })
}

/// Returns `(λ‖u‖₂² + q∫φ|u|⁵ − ‖∇u‖₂², q∫φ|u|⁵ − ‖∇φ‖₂²)`; both vanish
/// on solutions.
pub fn nehari_identities_check<T: Real>(
    u: &RadialField<T>,
    phi: &RadialField<T>,
    params: &PhysParams<T>,
) -> Result<(T, T)> {
    u.check_same_grid(phi)?;
    let coupling = params.q * u.inner_unchecked_with(&quintic(u), phi.values());
    let first = params.lambda * u.lp_mass(2)? + coupling - u.dirichlet_energy();
    let second = coupling - phi.dirichlet_energy();
    Ok((first, second))
}

/// Smallest node radius whose ball carries `fraction` of `∫|u|⁶`.
pub fn concentration_radius<T: Real>(u: &RadialField<T>, fraction: T) -> Result<T> {
    if !(fraction > T::zero() && fraction <= T::one()) {
        return Err(Error::InvalidFraction(fraction.as_f64()));
    }
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let g = u.grid();
    let m = g.intervals();
    let density: Vec<T> = (0..=m)
        .map(|i| {
            let r = g.node(i);
            r * r * u.values()[i].abs().powi(6)
        })
        .collect();
    // trapezoid on each cell, so the total matches the ball pairing
    let half_h = T::lit(0.5) * g.step();
    let mut cumulative = Vec::with_capacity(m + 1);
    let mut acc = T::zero();
    cumulative.push(acc);
    for w in density.windows(2) {
        acc = acc + half_h * (w[0] + w[1]);
        cumulative.push(acc);
    }
    let target = fraction * acc;
    let k = cumulative.iter().position(|&c| c >= target).unwrap_or(m);
    Ok(g.node(k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `λ ≤ 0`: no nontrivial solution.
    NonPositive,
    /// `0 < λ ≤ 3λ₁/10`: not covered by either theorem.
    OpenRegime,
    /// `3λ₁/10 < λ < λ₁`: a positive ground state exists.
    ExistenceWindow,
    /// `λ ≥ λ₁`: the fibering map has no maximum along `e₁`.
    AboveEigenvalue,
}

impl Regime {
    pub fn classify<T: Real>(lambda: T, lambda1: T) -> Self {
        if lambda <= T::zero() {
            Regime::NonPositive
        } else if lambda <= T::lit(0.3) * lambda1 {
            Regime::OpenRegime
        } else if lambda < lambda1 {
            Regime::ExistenceWindow
        } else {
            Regime::AboveEigenvalue
        }
    }

    pub fn banner(self) -> &'static str {
        match self {
            Regime::NonPositive => {
                "lambda <= 0: numerical signature of non-attainment (evidence, not a proof)"
            }
            Regime::OpenRegime => "open regime: no theorem applies, diagnostics only",
            Regime::ExistenceWindow => "inside existence window: nothing to probe",
            Regime::AboveEigenvalue => "lambda >= lambda1: no fibering maximum along e1",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeLevel<T> {
    pub intervals: usize,
    pub c: T,
    pub s_disc: T,
    /// `(2/5)√(S_disc³/q)`
    pub threshold: T,
    pub concentration_radius: T,
    pub pohozaev_residual: T,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport<T> {
    pub regime: Regime,
    pub banner: &'static str,
    /// Discrete `λ₁` on the finest grid of the schedule.
    pub lambda1: T,
    pub levels: Vec<ProbeLevel<T>>,
    /// `a − λb` along `e₁` when it is not positive.
    pub obstruction: Option<T>,
}

pub fn nonexistence_probe<T: Real>(
    params: &PhysParams<T>,
    schedule: &[usize],
    opts: &SolveOptions<T>,
) -> Result<ProbeReport<T>> {
    let &finest = schedule.iter().max().ok_or(Error::EmptySchedule)?;
    let fine = RadialGrid::new(params.radius, finest)?;
    let eigen = principal_eigenpair(&fine, T::lit(1e-12).max(T::epsilon() * T::lit(100.0)))?;
    let regime = Regime::classify(params.lambda, eigen.lambda1);
    let mut report = ProbeReport {
        regime,
        banner: regime.banner(),
        lambda1: eigen.lambda1,
        levels: Vec::new(),
        obstruction: None,
    };
    match regime {
        Regime::ExistenceWindow => {}
        Regime::AboveEigenvalue => {
            let e = &eigen.e1;
            let alpha = e.dirichlet_energy() - params.lambda * e.lp_mass(2)?;
            if let Err(Error::NoFiberMax { alpha }) = fiber_from(alpha, T::one()) {
                report.obstruction = Some(T::lit(alpha));
            }
        }
        Regime::NonPositive | Regime::OpenRegime => {
            for &m in schedule {
                let grid = RadialGrid::new(params.radius, m)?;
                let gs = minimize_ground_state(params, &grid, opts)?;
                let s_disc = discrete_sobolev_constant(&grid).value;
                report.levels.push(ProbeLevel {
                    intervals: m,
                    c: gs.level_c,
                    s_disc,
                    threshold: compactness_threshold(s_disc, params.q),
                    concentration_radius: concentration_radius(&gs.u, T::lit(0.5))?,
                    pohozaev_residual: gs.pohozaev_residual,
                    converged: gs.converged,
                    iterations: gs.iterations,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::solve_phi;

    fn grid(m: usize) -> RadialGrid<f64> {
        RadialGrid::new(1.0, m).unwrap()
    }

    #[test]
    fn trivial_pair() {
        let g = grid(64);
        let p = PhysParams::new(2.0, 1.0, 1.0).unwrap();
        let z = RadialField::zeros(g);
        assert_eq!(pohozaev_residual(&z, &z, &p).unwrap().residual, 0.0);
        assert_eq!(nehari_identities_check(&z, &z, &p).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn boundary_stencil_is_exact_on_quadratics() {
        let g = grid(100);
        let u = RadialField::from_fn(g, |r| 1.0 - r * r).unwrap();
        assert!((boundary_derivative(&u) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn positive_for_negative_lambda() {
        let g = grid(128);
        let p = PhysParams::new(-1.0, 1.0, 1.0).unwrap();
        let u = RadialField::from_fn(g, |r| (1.0 - r) * (1.0 + r)).unwrap();
        let phi = solve_phi(&u, &p).phi;
        let rep = pohozaev_residual(&u, &phi, &p).unwrap();
        assert!(rep.residual > 2.0 * std::f64::consts::PI * rep.boundary_u.powi(2));
    }

    #[test]
    fn eigenfunction_is_not_a_system_solution() {
        let g = grid(256);
        let pair = principal_eigenpair(&g, 1e-13).unwrap();
        let p = PhysParams::new(pair.lambda1, 1.0, 1.0).unwrap();
        let red = solve_phi(&pair.e1, &p);
        let (first, second) = nehari_identities_check(&pair.e1, &red.phi, &p).unwrap();
        let coupling = p.q * red.coupling_n;
        assert!((first - coupling).abs() < 1e-9 * coupling);
        assert!(second.abs() < 1e-12 * coupling);
    }

    #[test]
    fn concentration_of_constant_and_limits() {
        let g = grid(512);
        let one = RadialField::from_fn(g, |_| 1.0).unwrap();
        let rho = concentration_radius(&one, 0.5).unwrap();
        assert!((rho - 0.5f64.cbrt()).abs() <= 1.0 / 512.0 + 1e-12);
        assert_eq!(concentration_radius(&one, 1.0).unwrap(), 1.0);
        assert!(concentration_radius(&one, 0.2).unwrap() <= rho);
        assert!(concentration_radius(&one, 0.0).is_err());
        assert!(concentration_radius(&one, 1.5).is_err());
        assert_eq!(
            concentration_radius(&RadialField::zeros(g), 0.5),
            Err(Error::ZeroField)
        );
    }

    #[test]
    fn regimes() {
        let l1 = 10.0;
        assert_eq!(Regime::classify(-1.0, l1), Regime::NonPositive);
        assert_eq!(Regime::classify(0.0, l1), Regime::NonPositive);
        assert_eq!(Regime::classify(3.0, l1), Regime::OpenRegime);
        assert_eq!(Regime::classify(5.0, l1), Regime::ExistenceWindow);
        assert_eq!(Regime::classify(10.0, l1), Regime::AboveEigenvalue);
        assert!(Regime::OpenRegime.banner().contains("no theorem applies"));
    }

    #[test]
    fn probe_shortcuts() {
        let p = PhysParams::new(0.0, 1.0, 1.0).unwrap();
        let opts = SolveOptions::default();
        assert_eq!(
            nonexistence_probe(&p, &[], &opts),
            Err(Error::EmptySchedule)
        );
        let inside = nonexistence_probe(&p.with_lambda(5.0), &[64], &opts).unwrap();
        assert_eq!(inside.regime, Regime::ExistenceWindow);
        assert!(inside.levels.is_empty());
        let above = nonexistence_probe(&p.with_lambda(1.05 * 9.8696), &[128], &opts).unwrap();
        assert_eq!(above.regime, Regime::AboveEigenvalue);
        assert!(above.obstruction.unwrap() < 0.0);
    }
}
