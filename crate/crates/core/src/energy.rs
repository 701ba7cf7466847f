//! The functionals of the variational reduction.
//!
//! * `F(u, φ) = ½‖∇u‖² − (λ/2)‖u‖₂² − (q/5)∫|u|⁵φ + (1/10)‖∇φ‖²`
//! * `I(u) = F(u, φ_u) = ½a − (λ/2)b − (q/10)N(u)`
//! * `J(u) = (3/5)a − (λ/2)b − (q/5)‖u‖₆⁶`
//!
//! with `a = ‖∇u‖₂²`, `b = ‖u‖₂²` and `N(u) = ∫|u|⁵φ_u`. Along a ray the
//! reduced functional is `I(tu) = (t²/2)(a − λb) − (t¹⁰/10) qN`, so its
//! maximum over `t > 0` and the Nehari quotient
//! `W(u) = (2/5)(a − λb)^{5/4} / (qN)^{1/4}` are available in closed form.

use crate::error::{Error, Result};
use crate::radial::{PhysParams, PoissonSolver, RadialField};
use crate::reduction::{quintic, solve_phi_with, ReducedPotential};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown<T> {
    /// `‖∇u‖₂²`
    pub a: T,
    /// `‖u‖₂²`
    pub b: T,
    /// `∫|u|⁵ φ_u`
    pub n: T,
    /// `‖u‖₆⁶`
    pub l6: T,
    pub i_val: T,
    pub j_val: T,
}

/// Maximum of the fibering map `t ↦ I(tu)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberInfo<T> {
    pub t_star: T,
    /// `I(t_star·u)`, equal to the Nehari quotient `W(u)`.
    pub level: T,
    /// `a − λb`
    pub alpha: T,
    /// `qN`
    pub beta: T,
}

pub fn energy_f<T: Real>(
    u: &RadialField<T>,
    phi: &RadialField<T>,
    params: &PhysParams<T>,
) -> Result<T> {
    u.check_same_grid(phi)?;
    let a = u.dirichlet_energy();
    let b = u.lp_mass(2)?;
    let coupling = u.inner_unchecked_with(&quintic(u), phi.values());
    let half = T::lit(0.5);
    Ok(
        half * a - half * params.lambda * b - params.q / T::lit(5.0) * coupling
            + phi.dirichlet_energy() / T::lit(10.0),
    )
}

pub fn energy_i<T: Real>(u: &RadialField<T>, params: &PhysParams<T>) -> EnergyBreakdown<T> {
    let solver = PoissonSolver::new(*u.grid());
    Evaluation::new(&solver, u, params).breakdown(u, params)
}

pub fn energy_j<T: Real>(u: &RadialField<T>, params: &PhysParams<T>) -> T {
    let a = u.dirichlet_energy();
    let b = mass2(u);
    let l6 = mass6(u);
    j_from_parts(a, b, l6, params)
}

fn j_from_parts<T: Real>(a: T, b: T, l6: T, params: &PhysParams<T>) -> T {
    T::lit(0.6) * a - T::lit(0.5) * params.lambda * b - params.q / T::lit(5.0) * l6
}

fn mass2<T: Real>(u: &RadialField<T>) -> T {
    u.lp_mass(2).expect("supported exponent")
}

fn mass6<T: Real>(u: &RadialField<T>) -> T {
    u.lp_mass(6).expect("supported exponent")
}

/// `L²` representation of `I′(u)`: `g = −Δu − λu − qφ_u|u|³u`, so that
/// `⟨g, v⟩ = I′(u)v` for every discrete direction `v`.
pub fn grad_i<T: Real>(u: &RadialField<T>, params: &PhysParams<T>) -> RadialField<T> {
    let solver = PoissonSolver::new(*u.grid());
    let reduced = solve_phi_with(&solver, u, params);
    residual_field(u, &reduced.phi, params)
}

/// `−Δu − λu − qφ|u|³u` for an arbitrary `φ`.
pub(crate) fn residual_field<T: Real>(
    u: &RadialField<T>,
    phi: &RadialField<T>,
    params: &PhysParams<T>,
) -> RadialField<T> {
    let lap = u.neg_laplacian();
    let m = u.grid().intervals();
    let values: Vec<T> = (0..=m)
        .map(|i| {
            if i == m {
                return T::zero();
            }
            let x = u.values()[i];
            lap.values()[i] - params.lambda * x - params.q * phi.values()[i] * x.abs().powi(3) * x
        })
        .collect();
    RadialField::new(*u.grid(), values).expect("residual of a valid field is valid")
}

/// Sobolev (`H¹₀`) gradient: the solution `ĝ` of `−Δĝ = g`. Its `H¹₀` norm
/// squared is `⟨g, ĝ⟩`.
pub fn sobolev_gradient<T: Real>(g: &RadialField<T>) -> RadialField<T> {
    PoissonSolver::new(*g.grid()).solve_values(g.values())
}

pub fn fiber_tstar<T: Real>(u: &RadialField<T>, params: &PhysParams<T>) -> Result<FiberInfo<T>> {
    let solver = PoissonSolver::new(*u.grid());
    Evaluation::new(&solver, u, params).fiber_for(params)
}

/// `W(u) = (2/5)(a − λb)^{5/4}/(qN)^{1/4}`, invariant under `u ↦ tu`.
pub fn nehari_quotient<T: Real>(u: &RadialField<T>, params: &PhysParams<T>) -> Result<T> {
    fiber_tstar(u, params).map(|f| f.level)
}

pub(crate) fn fiber_from<T: Real>(alpha: T, beta: T) -> Result<FiberInfo<T>> {
    if !(beta > T::zero()) {
        return Err(Error::ZeroField);
    }
    if !(alpha > T::zero()) {
        return Err(Error::NoFiberMax {
            alpha: alpha.as_f64(),
        });
    }
    let t_star = (alpha / beta).powf(T::lit(0.125));
    let level = T::lit(0.4) * alpha.powf(T::lit(1.25)) / beta.powf(T::lit(0.25));
    Ok(FiberInfo {
        t_star,
        level,
        alpha,
        beta,
    })
}

/// Everything the optimizer needs about one iterate, from a single Poisson solve.
#[derive(Clone, Debug)]
pub(crate) struct Evaluation<T> {
    pub reduced: ReducedPotential<T>,
    pub a: T,
    pub b: T,
}

impl<T: Real> Evaluation<T> {
    pub fn new(solver: &PoissonSolver<T>, u: &RadialField<T>, params: &PhysParams<T>) -> Self {
        Self {
            reduced: solve_phi_with(solver, u, params),
            a: u.dirichlet_energy(),
            b: mass2(u),
        }
    }

    pub fn alpha(&self, params: &PhysParams<T>) -> T {
        self.a - params.lambda * self.b
    }

    pub fn beta(&self, params: &PhysParams<T>) -> T {
        params.q * self.reduced.coupling_n
    }

    pub fn fiber_for(&self, params: &PhysParams<T>) -> Result<FiberInfo<T>> {
        fiber_from(self.alpha(params), self.beta(params))
    }

    /// Quantities of `t·u` without another solve.
    pub fn scaled(&self, t: T) -> Self {
        let t2 = t * t;
        let t5 = t2 * t2 * t;
        Self {
            reduced: ReducedPotential {
                phi: self.reduced.phi.scaled(t5),
                coupling_n: self.reduced.coupling_n * t5 * t5,
                dirichlet_phi: self.reduced.dirichlet_phi * t5 * t5,
            },
            a: self.a * t2,
            b: self.b * t2,
        }
    }

    pub fn breakdown(&self, u: &RadialField<T>, params: &PhysParams<T>) -> EnergyBreakdown<T> {
        let l6 = mass6(u);
        let half = T::lit(0.5);
        let n = self.reduced.coupling_n;
        EnergyBreakdown {
            a: self.a,
            b: self.b,
            n,
            l6,
            i_val: half * self.a - half * params.lambda * self.b - params.q * n / T::lit(10.0),
            j_val: j_from_parts(self.a, self.b, l6, params),
        }
    }

    /// `L²` gradient of `W` at `u`.
    pub fn quotient_gradient(
        &self,
        u: &RadialField<T>,
        params: &PhysParams<T>,
        level: T,
    ) -> RadialField<T> {
        let alpha = self.alpha(params);
        let beta = self.beta(params);
        let lap = u.neg_laplacian();
        let phi = self.reduced.phi.values();
        let m = u.grid().intervals();
        let c = T::lit(2.5) * level;
        let values: Vec<T> = (0..=m)
            .map(|i| {
                if i == m {
                    return T::zero();
                }
                let x = u.values()[i];
                let linear = (lap.values()[i] - params.lambda * x) / alpha;
                let coupling = params.q * phi[i] * x.abs().powi(3) * x / beta;
                c * (linear - coupling)
            })
            .collect();
        RadialField::new(*u.grid(), values).expect("finite gradient")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::RadialGrid;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn setup() -> (RadialGrid<f64>, PhysParams<f64>) {
        (
            RadialGrid::new(1.0, 256).unwrap(),
            PhysParams::new(3.0, 1.5, 1.0).unwrap(),
        )
    }

    fn bump(g: RadialGrid<f64>) -> RadialField<f64> {
        RadialField::from_fn(g, |r| (1.0 - r * r) * (1.0 + 0.5 * (4.0 * r).cos())).unwrap()
    }

    #[test]
    fn zero_field() {
        let (g, p) = setup();
        let z = RadialField::zeros(g);
        let e = energy_i(&z, &p);
        assert_eq!((e.a, e.b, e.n, e.i_val, e.j_val), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(energy_f(&z, &z, &p).unwrap(), 0.0);
        assert_eq!(energy_j(&z, &p), 0.0);
        assert!(grad_i(&z, &p).is_zero());
        assert_eq!(fiber_tstar(&z, &p), Err(Error::ZeroField));
    }

    #[test]
    fn f_reduces_to_i() {
        let (g, p) = setup();
        let u = bump(g);
        let red = crate::reduction::solve_phi(&u, &p);
        let f = energy_f(&u, &red.phi, &p).unwrap();
        assert!(rel(f, energy_i(&u, &p).i_val) < 1e-12);
        let f0 = energy_f(&u, &RadialField::zeros(g), &p).unwrap();
        let e = energy_i(&u, &p);
        assert!(rel(f0, 0.5 * e.a - 0.5 * p.lambda * e.b) < 1e-14);
    }

    #[test]
    fn j_minus_i_decomposition() {
        let (g, p) = setup();
        let u = bump(g);
        let e = energy_i(&u, &p);
        let red = crate::reduction::solve_phi(&u, &p);
        // q‖u‖₆⁶ = ∫∇φ_u·∇|u| exactly in the discrete forms
        let cross = red.phi.dirichlet_form(&u.abs()).unwrap();
        assert!(rel(p.q * e.l6, cross) < 1e-12);
        let decomposition = 0.2 * (0.5 * e.a + 0.5 * red.dirichlet_phi - p.q * e.l6);
        assert!((e.j_val - e.i_val - decomposition).abs() < 1e-12 * e.a);
        assert!(e.j_val >= e.i_val);
        assert_eq!(energy_j(&u, &p), e.j_val);
    }

    #[test]
    fn fibering_closed_form() {
        let (g, p) = setup();
        let u = bump(g).scaled(0.7);
        let f = fiber_tstar(&u, &p).unwrap();
        assert!(rel(f.t_star.powi(8), f.alpha / f.beta) < 1e-10);
        let at_max = energy_i(&u.scaled(f.t_star), &p).i_val;
        assert!(rel(at_max, f.level) < 1e-10);
        for s in [0.9, 1.1] {
            assert!(energy_i(&u.scaled(f.t_star * s), &p).i_val < at_max);
        }
        let g2 = fiber_tstar(&u.scaled(3.0), &p).unwrap();
        assert!(rel(g2.t_star, f.t_star / 3.0) < 1e-12);
        assert!(rel(g2.level, f.level) < 1e-12);
        assert!(rel(nehari_quotient(&u.scaled(2.0), &p).unwrap(), f.level) < 1e-10);
    }

    #[test]
    fn t_star_is_one_on_the_nehari_manifold() {
        let (g, p) = setup();
        let u = bump(g);
        let f = fiber_tstar(&u, &p).unwrap();
        let on = u.scaled(f.t_star);
        assert!((fiber_tstar(&on, &p).unwrap().t_star - 1.0).abs() < 1e-12);
        // ⟨I′(u), u⟩ = a − λb − qN vanishes there
        let gr = grad_i(&on, &p);
        let e = energy_i(&on, &p);
        assert!(gr.inner(&on).unwrap().abs() < 1e-10 * e.a);
    }

    #[test]
    fn no_fiber_max_when_alpha_nonpositive() {
        let (g, p) = setup();
        let u = bump(g);
        let e = energy_i(&u, &p);
        let big = p.with_lambda(e.a / e.b * 1.01);
        assert!(matches!(
            fiber_tstar(&u, &big),
            Err(Error::NoFiberMax { .. })
        ));
    }

    #[test]
    fn sobolev_gradient_inverts_the_laplacian() {
        let (g, p) = setup();
        let gr = grad_i(&bump(g), &p);
        let s = sobolev_gradient(&gr);
        let back = s.neg_laplacian();
        for i in 1..g.intervals() {
            assert!((back.values()[i] - gr.values()[i]).abs() < 1e-8 * gr.max_abs());
        }
        assert!(rel(s.dirichlet_energy(), gr.inner(&s).unwrap()) < 1e-10);
    }
}
