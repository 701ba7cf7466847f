//! Truncated Aubin–Talenti bubbles `u_ε(r) = φ(r)/(ε + r²)^{1/2}` and the
//! quantities built on them: the norm asymptotics that define `S` and `K`,
//! the coefficient `A(φ)`, the fibering value `t_ε` of `J` and `sup_t J(t u_ε)`.
//!
//! As `ε → 0`
//!
//! ```text
//! ‖∇u_ε‖₂² = S·K/√ε + ω∫₀ᴿ|φ′|² + O(√ε)
//! ‖u_ε‖₆²  = K/√ε + O(√ε)
//! ‖u_ε‖₂²  = ω∫₀ᴿφ² + O(√ε)
//! ```
//!
//! with `ω = 4π`, `K = (π²/4)^{1/3}` and `S = 3(π/2)^{4/3}` the best Sobolev
//! constant. `S` and `K` are measured from a schedule of `ε` values, not
//! assumed.

use crate::energy::energy_j;
use crate::error::{Error, Result};
use crate::fit::fit_powers;
use crate::radial::{PhysParams, PoissonSolver, RadialField, RadialGrid};
use crate::scalar::Real;

/// Area of the unit sphere in ℝ³.
pub fn omega<T: Real>() -> T {
    T::lit(4.0) * T::PI()
}

/// Closed-form value of `K = (ω ∫₀^∞ s²/(1+s²)³ ds)^{1/3} = (π²/4)^{1/3}`.
pub fn k_exact() -> f64 {
    (std::f64::consts::PI.powi(2) / 4.0).cbrt()
}

/// Best Sobolev constant of `H¹(ℝ³) ⊂ L⁶`, `3(π/2)^{4/3}`.
pub fn s_exact() -> f64 {
    3.0 * (std::f64::consts::FRAC_PI_2).powf(4.0 / 3.0)
}

/// Radial cutoff with `φ(0) = 1`, `φ′(0) = 0`, `φ(R) = 0`.
pub trait Cutoff<T: Real>: Send + Sync {
    fn value(&self, r: T) -> T;
    fn derivative(&self, r: T) -> T;
    fn describe(&self) -> String;
}

/// `φ(r) = cos(πr/2R)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosineCutoff<T> {
    radius: T,
}

impl<T: Real> CosineCutoff<T> {
    pub fn new(radius: T) -> Self {
        Self { radius }
    }

    fn rate(&self) -> T {
        T::FRAC_PI_2() / self.radius
    }
}

impl<T: Real> Cutoff<T> for CosineCutoff<T> {
    fn value(&self, r: T) -> T {
        if r >= self.radius {
            T::zero()
        } else {
            (self.rate() * r).cos()
        }
    }

    fn derivative(&self, r: T) -> T {
        -self.rate() * (self.rate() * r).sin()
    }

    fn describe(&self) -> String {
        format!("cos(pi r / (2 * {}))", self.radius)
    }
}

pub fn default_cutoff<T: Real>(radius: T) -> CosineCutoff<T> {
    CosineCutoff::new(radius)
}

/// Smallest resolvable `ε`: the core width `√ε` must span ten cells.
pub fn eps_min<T: Real>(grid: &RadialGrid<T>) -> T {
    let w = T::lit(10.0) * grid.step();
    w * w
}

fn check_eps<T: Real>(eps: T, grid: &RadialGrid<T>) -> Result<()> {
    let min = eps_min(grid);
    if !(eps >= min) || !eps.is_finite() {
        return Err(Error::UnresolvedEps {
            eps: eps.as_f64(),
            eps_min: min.as_f64(),
        });
    }
    Ok(())
}

pub fn instanton_field<T: Real, C: Cutoff<T> + ?Sized>(
    eps: T,
    cutoff: &C,
    grid: &RadialGrid<T>,
) -> Result<RadialField<T>> {
    check_eps(eps, grid)?;
    RadialField::from_fn(*grid, |r| cutoff.value(r) / (eps + r * r).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstantonNorms<T> {
    pub eps: T,
    /// `‖∇u_ε‖₂²`
    pub grad_sq: T,
    /// `‖u_ε‖₆²`
    pub l6_sq: T,
    /// `‖u_ε‖₂²`
    pub l2_sq: T,
}

pub fn instanton_norms<T: Real, C: Cutoff<T> + ?Sized>(
    eps: T,
    cutoff: &C,
    grid: &RadialGrid<T>,
) -> Result<InstantonNorms<T>> {
    let u = instanton_field(eps, cutoff, grid)?;
    Ok(norms_of(eps, &u))
}

fn norms_of<T: Real>(eps: T, u: &RadialField<T>) -> InstantonNorms<T> {
    InstantonNorms {
        eps,
        grad_sq: u.dirichlet_energy(),
        l6_sq: u.lp_mass(6).expect("p = 6").cbrt(),
        l2_sq: u.lp_mass(2).expect("p = 2"),
    }
}

/// Extrapolated constants from an `ε` schedule.
#[derive(Clone, Debug)]
pub struct SobolevEstimate<T> {
    pub s_est: T,
    pub k_est: T,
    /// Discrete infimum of `‖∇v‖₂²/‖v‖₆²` over grid functions.
    pub s_disc: T,
    pub s_fit_residual: f64,
    pub k_fit_residual: f64,
    pub norms: Vec<InstantonNorms<T>>,
}

/// Fits `√ε·‖u_ε‖₆²` in `{1, ε, ε²}` (its expansion has no `√ε` term) and
/// `‖∇u_ε‖²/‖u_ε‖₆²` in `{1, √ε, ε}`; the intercepts are `K` and `S`.
/// Needs at least three points.
pub fn fit_sobolev_constants<T: Real>(norms: &[InstantonNorms<T>]) -> Result<(T, T, f64, f64)> {
    if norms.len() < 3 {
        return Err(Error::ScheduleTooShort {
            needed: 3,
            got: norms.len(),
        });
    }
    let eps: Vec<f64> = norms.iter().map(|n| n.eps.as_f64()).collect();
    let root: Vec<f64> = eps.iter().map(|e| e.sqrt()).collect();
    let scaled_l6: Vec<f64> = norms
        .iter()
        .zip(&root)
        .map(|(n, s)| s * n.l6_sq.as_f64())
        .collect();
    let ratio: Vec<f64> = norms
        .iter()
        .map(|n| (n.grad_sq / n.l6_sq).as_f64())
        .collect();
    let k_fit = fit_powers(&eps, &scaled_l6, &[0.0, 1.0, 2.0]);
    let s_fit = fit_powers(&root, &ratio, &[0.0, 1.0, 2.0]);
    Ok((
        T::lit(s_fit.intercept()),
        T::lit(k_fit.intercept()),
        s_fit.max_relative_residual,
        k_fit.max_relative_residual,
    ))
}

pub fn estimate_s_and_k<T: Real, C: Cutoff<T> + ?Sized>(
    schedule: &[T],
    cutoff: &C,
    grid: &RadialGrid<T>,
) -> Result<SobolevEstimate<T>> {
    if schedule.len() < 3 {
        return Err(Error::ScheduleTooShort {
            needed: 3,
            got: schedule.len(),
        });
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) || schedule.iter().any(|e| !(*e > T::zero())) {
        return Err(Error::BadSchedule);
    }
    let norms = schedule
        .iter()
        .map(|&eps| instanton_norms(eps, cutoff, grid))
        .collect::<Result<Vec<_>>>()?;
    let (s_est, k_est, s_fit_residual, k_fit_residual) = fit_sobolev_constants(&norms)?;
    let s_disc = discrete_sobolev_constant(grid).value;
    Ok(SobolevEstimate {
        s_est,
        k_est,
        s_disc,
        s_fit_residual,
        k_fit_residual,
        norms,
    })
}

/// Result of minimizing the discrete Sobolev quotient.
#[derive(Clone, Debug)]
pub struct SobolevInfimum<T> {
    pub value: T,
    pub iterations: usize,
    pub minimizer: RadialField<T>,
}

const SOBOLEV_MAX_ITERS: usize = 2000;

/// Minimizes `Q(v) = ‖∇v‖₂²/‖v‖₆²` over grid functions by Sobolev-gradient
/// descent with Armijo backtracking, starting from the instanton at
/// [`eps_min`]. The minimizer concentrates at the mesh scale, so the value is
/// a property of the discretization (below the continuum `S`).
pub fn discrete_sobolev_constant<T: Real>(grid: &RadialGrid<T>) -> SobolevInfimum<T> {
    let solver = PoissonSolver::new(*grid);
    let cutoff = default_cutoff(grid.radius());
    let start = instanton_field(eps_min(grid), &cutoff, grid).expect("eps_min is resolvable");
    let quotient = |v: &RadialField<T>| {
        let a = v.dirichlet_energy();
        let l6 = v.lp_mass(6).expect("p = 6");
        (a, l6, a / l6.cbrt())
    };
    let normalize = |v: RadialField<T>| {
        let a = v.dirichlet_energy();
        v.scaled(T::one() / a.sqrt())
    };

    let mut v = normalize(start);
    let (mut a, mut l6, mut q) = quotient(&v);
    let mut iterations = 0;
    let mut stagnant = 0;
    while iterations < SOBOLEV_MAX_ITERS {
        let m = grid.intervals();
        let lap = v.neg_laplacian();
        let grad: Vec<T> = (0..=m)
            .map(|i| {
                if i == m {
                    return T::zero();
                }
                let x = v.values()[i];
                let two = T::lit(2.0);
                q * (two * lap.values()[i] / a - two * x.abs().powi(4) * x / l6)
            })
            .collect();
        let sobolev = solver.solve_values(&grad);
        let norm_sq = v.inner_unchecked_with(&grad, sobolev.values());
        if !(norm_sq > T::lit(1e-28)) {
            break;
        }
        let mut step = T::one();
        let accepted = loop {
            let trial = v.axpy(-step, &sobolev).expect("same grid").abs();
            let (ta, tl6, tq) = quotient(&trial);
            if tq <= q - T::lit(1e-4) * step * norm_sq {
                break Some((trial, ta, tl6, tq));
            }
            step = step * T::lit(0.5);
            if step < T::lit(1e-14) {
                break None;
            }
        };
        let Some((trial, _, _, tq)) = accepted else {
            break;
        };
        iterations += 1;
        if q - tq <= T::lit(1e-15) * q {
            stagnant += 1;
        } else {
            stagnant = 0;
        }
        v = normalize(trial);
        (a, l6, q) = quotient(&v);
        if stagnant >= 5 {
            break;
        }
    }
    SobolevInfimum {
        value: q,
        iterations,
        minimizer: v,
    }
}

/// `A(φ) = ω/(qK) ∫₀ᴿ(|φ′|² − (5/6)λφ²) dr`; the sign decides whether
/// `sup_t J(t u_ε)` drops below `(2/5)√(S³/q)` for small `ε`.
pub fn a_of_cutoff<T: Real, C: Cutoff<T> + ?Sized>(
    cutoff: &C,
    params: &PhysParams<T>,
    k_est: T,
) -> T {
    let line = RadialGrid::new(params.radius, 4096).expect("valid line grid");
    let five_sixths = T::lit(5.0) / T::lit(6.0);
    let integral = line.integrate_line(|r| {
        let d = cutoff.derivative(r);
        let v = cutoff.value(r);
        d * d - five_sixths * params.lambda * v * v
    });
    omega::<T>() / (params.q * k_est) * integral
}

/// Closed-form maximizer of `t ↦ J(t u_ε)`:
/// `t_ε = ‖u_ε‖₆⁻¹ ((6/5‖∇u_ε‖² − λ‖u_ε‖²)/(6/5 q‖u_ε‖₆²))^{1/4}`.
pub fn t_eps_value<T: Real, C: Cutoff<T> + ?Sized>(
    eps: T,
    cutoff: &C,
    params: &PhysParams<T>,
    grid: &RadialGrid<T>,
) -> Result<T> {
    let norms = instanton_norms(eps, cutoff, grid)?;
    t_eps_from(&norms, params)
}

fn t_eps_from<T: Real>(norms: &InstantonNorms<T>, params: &PhysParams<T>) -> Result<T> {
    let six_fifths = T::lit(1.2);
    let numerator = six_fifths * norms.grad_sq - params.lambda * norms.l2_sq;
    if !(numerator > T::zero()) {
        return Err(Error::NonPositiveRadicand(numerator.as_f64()));
    }
    let radicand = numerator / (six_fifths * params.q * norms.l6_sq);
    Ok(radicand.powf(T::lit(0.25)) / norms.l6_sq.sqrt())
}

/// `(2/5)√(S³/q)`.
pub fn compactness_threshold<T: Real>(sobolev: T, q: T) -> T {
    T::lit(0.4) * (sobolev.powi(3) / q).sqrt()
}

/// Returns `(J(t_ε u_ε), (2/5) q ((S/q + A√ε)³)^{1/2})`.
pub fn supj_estimate<T: Real, C: Cutoff<T> + ?Sized>(
    eps: T,
    cutoff: &C,
    params: &PhysParams<T>,
    grid: &RadialGrid<T>,
    s_est: T,
    k_est: T,
) -> Result<(T, T)> {
    let u = instanton_field(eps, cutoff, grid)?;
    let norms = norms_of(eps, &u);
    let t = t_eps_from(&norms, params)?;
    let direct = energy_j(&u.scaled(t), params);
    let base = s_est / params.q + a_of_cutoff(cutoff, params, k_est) * eps.sqrt();
    if !(base > T::zero()) {
        return Err(Error::NonPositiveRadicand(base.as_f64()));
    }
    let formula = T::lit(0.4) * params.q * base.powi(3).sqrt();
    Ok((direct, formula))
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstantonReport<T> {
    pub eps: T,
    pub grad_sq: T,
    pub l6_sq: T,
    pub l2_sq: T,
    pub t_eps: T,
    pub sup_j: T,
    pub sup_j_formula: T,
    pub a_phi: T,
    pub s_est: T,
    pub k_est: T,
    /// `‖∇u_ε‖² − S·K/√ε`
    pub grad_residual: T,
    /// `‖u_ε‖₆² − K/√ε`
    pub l6_residual: T,
}

pub fn instanton_report<T: Real, C: Cutoff<T> + ?Sized>(
    eps: T,
    cutoff: &C,
    params: &PhysParams<T>,
    grid: &RadialGrid<T>,
    s_est: T,
    k_est: T,
) -> Result<InstantonReport<T>> {
    let norms = instanton_norms(eps, cutoff, grid)?;
    let t_eps = t_eps_from(&norms, params)?;
    let (sup_j, sup_j_formula) = supj_estimate(eps, cutoff, params, grid, s_est, k_est)?;
    let root = eps.sqrt();
    Ok(InstantonReport {
        eps,
        grad_sq: norms.grad_sq,
        l6_sq: norms.l6_sq,
        l2_sq: norms.l2_sq,
        t_eps,
        sup_j,
        sup_j_formula,
        a_phi: a_of_cutoff(cutoff, params, k_est),
        s_est,
        k_est,
        grad_residual: norms.grad_sq - s_est * k_est / root,
        l6_residual: norms.l6_sq - k_est / root,
    })
}
