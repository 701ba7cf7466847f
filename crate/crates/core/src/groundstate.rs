//! Positive ground state by Sobolev-gradient descent on the Nehari quotient
//! `W(u) = max_t I(tu)`.
//!
//! Each accepted iterate is replaced by its absolute value and rescaled onto
//! the Nehari manifold, so the stored iterate always has `t* = 1` and
//! `I(u) = W(u)`.
//!
//! Steps are accepted by the Armijo rule on `W`. Near convergence the
//! predicted decrease falls below the rounding level of `W` itself; from then
//! on a step is accepted when it lowers the gradient norm and leaves `W`
//! unchanged to rounding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{fiber_tstar, residual_field, Evaluation, FiberInfo};
use crate::error::{Error, Result};
use crate::instanton::{default_cutoff, eps_min, instanton_field};
use crate::pohozaev::pohozaev_residual;
use crate::radial::{PhysParams, PoissonSolver, RadialField, RadialGrid};
use crate::reduction::quintic;
use crate::scalar::Real;
use crate::spectral::principal_eigenpair;

#[derive(Clone, Debug, PartialEq)]
pub enum Init<T> {
    Eigenfunction,
    Instanton {
        eps: T,
    },
    /// Instanton at the smallest resolvable `eps`.
    InstantonAtGuard,
    Field(RadialField<T>),
}

/// Armijo backtracking.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRule<T> {
    pub initial: T,
    pub shrink: T,
    pub min_step: T,
    pub sufficient_decrease: T,
}

impl<T: Real> Default for StepRule<T> {
    fn default() -> Self {
        Self {
            initial: T::one(),
            shrink: T::lit(0.5),
            min_step: T::lit(1e-12),
            sufficient_decrease: T::lit(1e-4),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions<T> {
    pub max_iters: usize,
    /// Stop when the `H¹₀` norm of the Sobolev gradient of `W` drops below this.
    pub grad_tol: T,
    pub step_rule: StepRule<T>,
    pub init: Init<T>,
    pub seed: u64,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            grad_tol: T::lit(1e-9),
            step_rule: StepRule::default(),
            init: Init::Eigenfunction,
            seed: 0,
        }
    }
}

impl<T: Real> SolveOptions<T> {
    pub fn validate(&self) -> Result<()> {
        let r = &self.step_rule;
        if self.max_iters == 0 {
            return Err(Error::InvalidParams("max_iters must be at least 1".into()));
        }
        if !(self.grad_tol > T::zero()) || !self.grad_tol.is_finite() {
            return Err(Error::InvalidParams(format!(
                "grad_tol must be positive, got {}",
                self.grad_tol
            )));
        }
        let unit = |x: T| x > T::zero() && x < T::one();
        if !(r.initial > T::zero())
            || !unit(r.shrink)
            || !(r.min_step > T::zero())
            || !unit(r.sufficient_decrease)
        {
            return Err(Error::InvalidParams("invalid step rule".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GroundState<T> {
    pub u: RadialField<T>,
    pub phi: RadialField<T>,
    pub level_c: T,
    /// `L²` norm of `−Δu − λu − qφ|u|³u`.
    pub pde_residual: T,
    /// `L²` norm of `−Δφ − q|u|⁵`.
    pub phi_residual: T,
    pub pohozaev_residual: T,
    pub iterations: usize,
    pub converged: bool,
    /// Final Sobolev-gradient norm.
    pub grad_norm: T,
    /// `W` after every accepted step, starting with the initializer.
    /// Non-increasing up to [`level_noise`].
    pub level_history: Vec<T>,
    /// Discrete principal eigenvalue on the solve grid.
    pub lambda1: T,
}

fn eigen_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(100.0))
}

fn initial_field<T: Real>(
    init: &Init<T>,
    grid: &RadialGrid<T>,
    eigen: &RadialField<T>,
) -> Result<RadialField<T>> {
    let cutoff = default_cutoff(grid.radius());
    match init {
        Init::Eigenfunction => Ok(eigen.clone()),
        Init::Instanton { eps } => instanton_field(*eps, &cutoff, grid),
        Init::InstantonAtGuard => instanton_field(eps_min(grid), &cutoff, grid),
        Init::Field(f) => {
            if f.grid() != grid {
                return Err(Error::GridMismatch);
            }
            Ok(f.clone())
        }
    }
}

/// Rounding level of a computed `W`; decreases below it are not resolvable.
pub fn level_noise<T: Real>(level: T) -> T {
    T::lit(64.0) * T::epsilon() * level.abs()
}

/// Absolute value already taken; rescales onto the Nehari manifold.
fn on_nehari<T: Real>(
    solver: &PoissonSolver<T>,
    trial: RadialField<T>,
    params: &PhysParams<T>,
) -> Option<(RadialField<T>, Evaluation<T>, FiberInfo<T>)> {
    if trial.is_zero() {
        return None;
    }
    let eval = Evaluation::new(solver, &trial, params);
    let f = eval.fiber_for(params).ok()?;
    Some((trial.scaled(f.t_star), eval.scaled(f.t_star), f))
}

/// Sobolev gradient of `W` and its squared `H¹₀` norm.
fn sobolev_step<T: Real>(
    solver: &PoissonSolver<T>,
    eval: &Evaluation<T>,
    u: &RadialField<T>,
    params: &PhysParams<T>,
    level: T,
) -> (RadialField<T>, T) {
    let g = eval.quotient_gradient(u, params, level);
    let sg = solver.solve_values(g.values());
    let norm_sq = u.inner_unchecked_with(g.values(), sg.values());
    (sg, norm_sq)
}

pub fn minimize_ground_state<T: Real>(
    params: &PhysParams<T>,
    grid: &RadialGrid<T>,
    opts: &SolveOptions<T>,
) -> Result<GroundState<T>> {
    params.check_grid(grid)?;
    opts.validate()?;
    let eigen = principal_eigenpair(grid, eigen_tolerance())?;
    let start = initial_field(&opts.init, grid, &eigen.e1)?.abs();
    if start.is_zero() {
        return Err(Error::ZeroField);
    }

    let solver = PoissonSolver::new(*grid);
    let first = Evaluation::new(&solver, &start, params);
    let fiber = first.fiber_for(params)?;
    let mut u = start.scaled(fiber.t_star);
    let mut eval = first.scaled(fiber.t_star);
    let mut level = fiber.level;
    let mut history = vec![level];
    let rule = opts.step_rule;

    let mut iterations = 0;
    let mut converged = false;
    let (mut sg, mut norm_sq) = sobolev_step(&solver, &eval, &u, params, level);
    loop {
        if norm_sq.max(T::zero()).sqrt() <= opts.grad_tol {
            converged = true;
            break;
        }
        if iterations == opts.max_iters {
            break;
        }
        let noise = level_noise(level);
        let mut step = rule.initial;
        let accepted = loop {
            let trial = u.axpy(-step, &sg)?.abs();
            if let Some((trial, trial_eval, f)) = on_nehari(&solver, trial, params) {
                let predicted = rule.sufficient_decrease * step * norm_sq;
                let (tsg, tnorm) = sobolev_step(&solver, &trial_eval, &trial, params, f.level);
                let armijo = f.level <= level - predicted;
                let polish = step * norm_sq < noise && f.level <= level + noise && tnorm < norm_sq;
                if armijo || polish {
                    break Some((trial, trial_eval, f, tsg, tnorm));
                }
            }
            step = step * rule.shrink;
            if step < rule.min_step {
                break None;
            }
        };
        let Some((trial, trial_eval, f, tsg, tnorm)) = accepted else {
            break;
        };
        u = trial;
        eval = trial_eval;
        level = f.level;
        sg = tsg;
        norm_sq = tnorm;
        history.push(level);
        iterations += 1;
    }
    let grad_norm = norm_sq.max(T::zero()).sqrt();

    let phi = eval.reduced.phi;
    let residuals = pde_residual(&u, &phi, params)?;
    let pohozaev = pohozaev_residual(&u, &phi, params)?;
    Ok(GroundState {
        u,
        phi,
        level_c: level,
        pde_residual: residuals.u_equation,
        phi_residual: residuals.phi_equation,
        pohozaev_residual: pohozaev.residual,
        iterations,
        converged,
        grad_norm,
        level_history: history,
        lambda1: eigen.lambda1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdeResidual<T> {
    /// `‖−Δu − λu − qφ|u|³u‖₂`
    pub u_equation: T,
    /// `‖−Δφ − q|u|⁵‖₂`
    pub phi_equation: T,
}

pub fn pde_residual<T: Real>(
    u: &RadialField<T>,
    phi: &RadialField<T>,
    params: &PhysParams<T>,
) -> Result<PdeResidual<T>> {
    u.check_same_grid(phi)?;
    let first = residual_field(u, phi, params);
    let lap = phi.neg_laplacian();
    let source = quintic(u);
    let m = u.grid().intervals();
    let second: Vec<T> = (0..=m)
        .map(|i| {
            if i == m {
                T::zero()
            } else {
                lap.values()[i] - params.q * source[i]
            }
        })
        .collect();
    let second = RadialField::new(*u.grid(), second)?;
    Ok(PdeResidual {
        u_equation: first.lp_mass(2)?.sqrt(),
        phi_equation: second.lp_mass(2)?.sqrt(),
    })
}

/// `sup_t I(tv)` for each candidate against the ground-state level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelCheck<T> {
    pub level_c: T,
    /// One entry per candidate; `None` when the ray has no maximum.
    pub sup_levels: Vec<Option<T>>,
    /// Candidates with `sup_t I(tv) < c − tol`.
    pub violations: Vec<usize>,
    /// Candidates outside the admissible cone, with the reason.
    pub skipped: Vec<(usize, Error)>,
}

impl<T> LevelCheck<T> {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_ground_state_level<T: Real>(
    gs: &GroundState<T>,
    candidates: &[RadialField<T>],
    params: &PhysParams<T>,
    tol: T,
) -> LevelCheck<T> {
    let mut check = LevelCheck {
        level_c: gs.level_c,
        sup_levels: Vec::with_capacity(candidates.len()),
        violations: Vec::new(),
        skipped: Vec::new(),
    };
    for (k, v) in candidates.iter().enumerate() {
        let level = v
            .check_same_grid(&gs.u)
            .and_then(|_| fiber_tstar(v, params))
            .map(|f| f.level);
        match level {
            Ok(l) => {
                if l < gs.level_c - tol {
                    check.violations.push(k);
                }
                check.sup_levels.push(Some(l));
            }
            Err(e) => {
                check.skipped.push((k, e));
                check.sup_levels.push(None);
            }
        }
    }
    check
}

/// Smooth positive bumps `A·exp(−((r − c)/w)²)·(1 − r²/R²)` with random
/// amplitude, center and width.
pub fn random_bumps<T: Real>(grid: &RadialGrid<T>, count: usize, seed: u64) -> Vec<RadialField<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = grid.radius();
    (0..count)
        .map(|_| {
            let amp = T::lit(rng.gen_range(0.2..3.0));
            let center = T::lit(rng.gen_range(0.0..0.7)) * radius;
            let width = T::lit(rng.gen_range(0.1..0.6)) * radius;
            RadialField::from_fn(*grid, |r| {
                let z = (r - center) / width;
                amp * (-z * z).exp() * (T::one() - (r / radius).powi(2))
            })
            .expect("finite bump")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{energy_i, grad_i};

    fn unit(m: usize, rel: f64) -> (RadialGrid<f64>, PhysParams<f64>) {
        let g = RadialGrid::new(1.0, m).unwrap();
        let l1 = principal_eigenpair(&g, 1e-12).unwrap().lambda1;
        (g, PhysParams::new(rel * l1, 1.0, 1.0).unwrap())
    }

    #[test]
    fn converges_on_a_coarse_grid() {
        let (g, p) = unit(256, 0.5);
        let gs = minimize_ground_state(&p, &g, &SolveOptions::default()).unwrap();
        assert!(gs.converged, "grad {}", gs.grad_norm);
        assert!(gs.pde_residual < 1e-6);
        assert!(gs.phi_residual < 1e-6);
        assert!(gs.u.values()[..256].iter().all(|&v| v > 0.0));
        assert!(gs.phi.min_interior() >= 0.0);
        let e = energy_i(&gs.u, &p);
        assert!((e.i_val - gs.level_c).abs() < 1e-10);
        let nehari = grad_i(&gs.u, &p).inner(&gs.u).unwrap();
        assert!(nehari.abs() < 1e-6);
        assert!(gs
            .level_history
            .windows(2)
            .all(|w| w[1] <= w[0] + level_noise(w[0])));
        assert_eq!(gs.level_history.len(), gs.iterations + 1);
    }

    #[test]
    fn refuses_above_the_eigenvalue() {
        let (g, p) = unit(128, 1.1);
        let err = minimize_ground_state(&p, &g, &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NoFiberMax { .. }));
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let (g, p) = unit(128, 0.5);
        let opts = SolveOptions {
            max_iters: 2,
            ..SolveOptions::default()
        };
        let gs = minimize_ground_state(&p, &g, &opts).unwrap();
        assert!(!gs.converged);
        assert_eq!(gs.iterations, 2);
    }

    #[test]
    fn option_validation() {
        let (g, p) = unit(64, 0.5);
        let bad = SolveOptions {
            grad_tol: 0.0,
            ..SolveOptions::default()
        };
        assert!(minimize_ground_state(&p, &g, &bad).is_err());
        let bad = SolveOptions {
            max_iters: 0,
            ..SolveOptions::default()
        };
        assert!(minimize_ground_state(&p, &g, &bad).is_err());
        let other = RadialField::zeros(RadialGrid::new(1.0, 32).unwrap());
        let bad = SolveOptions {
            init: Init::Field(other),
            ..SolveOptions::default()
        };
        assert_eq!(
            minimize_ground_state(&p, &g, &bad).unwrap_err(),
            Error::GridMismatch
        );
        let zero = SolveOptions {
            init: Init::Field(RadialField::zeros(g)),
            ..SolveOptions::default()
        };
        assert_eq!(
            minimize_ground_state(&p, &g, &zero).unwrap_err(),
            Error::ZeroField
        );
    }

    #[test]
    fn residual_of_trivial_pair_and_eigenfunction() {
        let (g, p) = unit(256, 1.0);
        let z = RadialField::zeros(g);
        let r = pde_residual(&z, &z, &p).unwrap();
        assert_eq!((r.u_equation, r.phi_equation), (0.0, 0.0));
        let e1 = principal_eigenpair(&g, 1e-13).unwrap().e1;
        let r = pde_residual(&e1, &z, &p).unwrap();
        assert!(r.u_equation < 1e-5);
        let direct = RadialField::new(g, quintic(&e1))
            .unwrap()
            .lp_mass(2)
            .unwrap()
            .sqrt();
        assert!((r.phi_equation - p.q * direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn minimality_and_scale_invariance() {
        let (g, p) = unit(256, 0.6);
        let gs = minimize_ground_state(&p, &g, &SolveOptions::default()).unwrap();
        let mut candidates = random_bumps(&g, 4, 7);
        candidates.push(gs.u.clone());
        candidates.push(gs.u.scaled(2.0));
        let check = verify_ground_state_level(&gs, &candidates, &p, 1e-8);
        assert!(check.is_clean());
        for l in &check.sup_levels[4..] {
            assert!((l.unwrap() - gs.level_c).abs() < 1e-10);
        }
    }

    #[test]
    fn bumps_are_seeded() {
        let g = RadialGrid::new(1.0, 64).unwrap();
        assert_eq!(random_bumps(&g, 3, 1), random_bumps(&g, 3, 1));
        assert_ne!(random_bumps(&g, 1, 1), random_bumps(&g, 1, 2));
        assert!(random_bumps(&g, 3, 1)
            .iter()
            .all(|b| b.min_interior() > 0.0));
    }
}
