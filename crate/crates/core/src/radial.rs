//! Uniform radial mesh on `[0, R]`, radial fields with the Dirichlet condition
//! at `r = R`, ball quadrature and the discrete radial Laplacian.
//!
//! Second derivatives act on `v = r·u`. With `v₀ = v_M = 0` the operator
//!
//! ```text
//! (−Δ_h u)_i = (2vᵢ − vᵢ₊₁ − vᵢ₋₁) / (h² rᵢ),   i = 1..M−1,
//! ```
//!
//! is self-adjoint for the pairing `⟨u, w⟩ = 4π h Σ rᵢ² uᵢ wᵢ` and the matching
//! Dirichlet form is `‖∇u‖² = (4π/h) Σ (vᵢ₊₁ − vᵢ)²`. All variational quantities
//! (`‖u‖₂²`, `‖u‖₆⁶`, `∫|u|⁵φ`, …) use that pairing, which makes summation by
//! parts, `‖∇φ_u‖² = q∫|u|⁵φ_u` and the Green symmetry exact in floating point
//! up to rounding. [`RadialGrid::integrate_ball`] is the separate
//! general-purpose rule (composite Simpson) for integrands that are not tied to
//! the discrete operator.

use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Real};
use crate::tridiag::ThomasFactor;

/// Uniform mesh `rᵢ = i·h`, `i = 0..M`, with `h = R/M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialGrid<T> {
    radius: T,
    intervals: usize,
    step: T,
}

impl<T: Real> RadialGrid<T> {
    pub const MIN_INTERVALS: usize = 16;

    /// Builds the mesh with `intervals = M` cells. `M` must be even (Simpson)
    /// and at least [`Self::MIN_INTERVALS`].
    pub fn new(radius: T, intervals: usize) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "radius must be positive and finite, got {radius}"
            )));
        }
        if intervals < Self::MIN_INTERVALS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} intervals, got {intervals}",
                Self::MIN_INTERVALS
            )));
        }
        if !intervals.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "interval count must be even, got {intervals}"
            )));
        }
        Ok(Self {
            radius,
            intervals,
            step: radius / T::count(intervals),
        })
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    /// `M`, the number of cells.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn step(&self) -> T {
        self.step
    }

    /// Number of nodes, `M + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn node(&self, i: usize) -> T {
        if i == self.intervals {
            self.radius
        } else {
            T::count(i) * self.step
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Composite Simpson weights for `∫₀ᴿ f(r) dr`.
    pub fn simpson_weights(&self) -> Vec<T> {
        let third = self.step / T::lit(3.0);
        (0..self.len())
            .map(|i| {
                if i == 0 || i == self.intervals {
                    third
                } else if i % 2 == 1 {
                    T::lit(4.0) * third
                } else {
                    T::lit(2.0) * third
                }
            })
            .collect()
    }

    /// Weight of node `i` in the variational pairing `⟨u, w⟩ = Σ mᵢ uᵢ wᵢ`.
    /// This is the trapezoid rule for `4π ∫ u w r² dr`.
    #[inline]
    pub fn mass_weight(&self, i: usize) -> T {
        let r = self.node(i);
        let w = T::lit(4.0) * T::PI() * self.step * r * r;
        if i == self.intervals {
            w / T::lit(2.0)
        } else {
            w
        }
    }

    /// `4π ∫₀ᴿ f(r) r² dr` by composite Simpson.
    pub fn integrate_ball(&self, values: &[T]) -> Result<T> {
        self.check_len(values.len())?;
        let sum: T = self
            .simpson_weights()
            .into_iter()
            .zip(values)
            .enumerate()
            .map(|(i, (w, &f))| {
                let r = self.node(i);
                w * f * r * r
            })
            .sum();
        Ok(T::lit(4.0) * T::PI() * sum)
    }

    /// `∫₀ᴿ f(r) dr` by composite Simpson on this mesh.
    pub fn integrate_line(&self, f: impl Fn(T) -> T) -> T {
        self.simpson_weights()
            .into_iter()
            .enumerate()
            .map(|(i, w)| w * f(self.node(i)))
            .sum()
    }

    /// `(4/3)πR³`.
    pub fn ball_volume(&self) -> T {
        T::lit(4.0) / T::lit(3.0) * T::PI() * self.radius.powi(3)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::FieldLength {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    fn same_as(&self, other: &Self) -> bool {
        self.intervals == other.intervals && self.radius == other.radius
    }
}

/// Physical parameters `(λ, q, R)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysParams<T> {
    pub lambda: T,
    pub q: T,
    pub radius: T,
}

impl<T: Real> PhysParams<T> {
    pub fn new(lambda: T, q: T, radius: T) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidParams(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        if !(q > T::zero()) || !q.is_finite() {
            return Err(Error::InvalidParams(format!("q must be positive, got {q}")));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidParams(format!(
                "R must be positive, got {radius}"
            )));
        }
        Ok(Self { lambda, q, radius })
    }

    pub fn with_lambda(self, lambda: T) -> Self {
        Self { lambda, ..self }
    }

    pub fn with_q(self, q: T) -> Self {
        Self { q, ..self }
    }

    /// Errors unless `grid` is a mesh of the same ball.
    pub fn check_grid(&self, grid: &RadialGrid<T>) -> Result<()> {
        let tol = T::lit(1e-12) * self.radius;
        if (grid.radius() - self.radius).abs() > tol {
            return Err(Error::InvalidParams(format!(
                "grid radius {} does not match R = {}",
                grid.radius(),
                self.radius
            )));
        }
        Ok(())
    }
}

/// Value at `r = 0` from the even extension `u ≈ a + b r²` through nodes 1, 2.
#[inline]
pub(crate) fn origin_value<T: Real>(u1: T, u2: T) -> T {
    (T::lit(4.0) * u1 - u2) / T::lit(3.0)
}

/// Nodal values of a radial function on a [`RadialGrid`], with `u(R) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialField<T> {
    grid: RadialGrid<T>,
    values: Vec<T>,
}

impl<T: Real> RadialField<T> {
    pub fn new(grid: RadialGrid<T>, values: Vec<T>) -> Result<Self> {
        grid.check_len(values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let last = values[grid.intervals()];
        if last != T::zero() {
            return Err(Error::BoundaryValue(last.as_f64()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: RadialGrid<T>) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    /// Samples `f` at nodes `0..M−1` and sets the boundary node to zero.
    pub fn from_fn(grid: RadialGrid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let m = grid.intervals();
        let values = (0..=m)
            .map(|i| if i == m { T::zero() } else { f(grid.node(i)) })
            .collect();
        Self::new(grid, values)
    }

    /// Builds a field from its `M − 1` interior values; the origin value is
    /// extrapolated and the boundary value is zero.
    pub(crate) fn from_interior(grid: RadialGrid<T>, interior: &[T]) -> Self {
        debug_assert_eq!(interior.len(), grid.intervals() - 1);
        let mut values = Vec::with_capacity(grid.len());
        values.push(origin_value(interior[0], interior[1]));
        values.extend_from_slice(interior);
        values.push(T::zero());
        Self { grid, values }
    }

    pub fn grid(&self) -> &RadialGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero())
    }

    pub fn scaled(&self, t: T) -> Self {
        self.map(|v| t * v)
    }

    pub fn abs(&self) -> Self {
        self.map(|v| v.abs())
    }

    pub(crate) fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub(crate) fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: T, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + s * b)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Smallest value over nodes `0..M−1`.
    pub fn min_interior(&self) -> T {
        self.values[..self.grid.intervals()]
            .iter()
            .fold(T::infinity(), |m, &v| m.min(v))
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `v = r·u` at every node.
    pub(crate) fn substituted(&self) -> Vec<T> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &u)| self.grid.node(i) * u)
            .collect()
    }

    /// `⟨u, w⟩ = 4π h Σ rᵢ² uᵢ wᵢ`, the discrete `∫_{B_R} u w`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_same_grid(other)?;
        Ok(self.inner_unchecked(&other.values))
    }

    pub(crate) fn inner_unchecked(&self, other: &[T]) -> T {
        let g = &self.grid;
        compensated_sum((1..g.intervals()).map(|i| g.mass_weight(i) * self.values[i] * other[i]))
    }

    /// `∫_{B_R} |u|^p` for `p ∈ {2, 5, 6}`.
    pub fn lp_mass(&self, p: u32) -> Result<T> {
        if !matches!(p, 2 | 5 | 6) {
            return Err(Error::UnsupportedExponent(p));
        }
        let g = &self.grid;
        Ok(compensated_sum((1..g.intervals()).map(|i| {
            g.mass_weight(i) * self.values[i].abs().powi(p as i32)
        })))
    }

    /// `‖∇u‖₂² = (4π/h) Σ (vᵢ₊₁ − vᵢ)²`.
    pub fn dirichlet_energy(&self) -> T {
        let v = self.substituted();
        let sum = compensated_sum(v.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])));
        T::lit(4.0) * T::PI() / self.grid.step * sum
    }

    /// Bilinear form `∫ ∇u·∇w` whose diagonal is [`Self::dirichlet_energy`].
    pub fn dirichlet_form(&self, other: &Self) -> Result<T> {
        self.check_same_grid(other)?;
        let v = self.substituted();
        let y = other.substituted();
        let sum = compensated_sum(
            v.windows(2)
                .zip(y.windows(2))
                .map(|(a, b)| (a[1] - a[0]) * (b[1] - b[0])),
        );
        Ok(T::lit(4.0) * T::PI() / self.grid.step * sum)
    }

    /// `−Δ_h u`. The origin value is extrapolated from nodes 1 and 2; the
    /// boundary value is zero.
    pub fn neg_laplacian(&self) -> Self {
        let g = &self.grid;
        let m = g.intervals();
        let v = self.substituted();
        let h2 = g.step * g.step;
        let interior: Vec<T> = (1..m)
            .map(|i| (T::lit(2.0) * v[i] - v[i + 1] - v[i - 1]) / (h2 * g.node(i)))
            .collect();
        Self::from_interior(*g, &interior)
    }
}

/// Solver for `−Δ_h φ = f` with `φ(R) = 0`, with the factorization cached.
#[derive(Clone, Debug)]
pub struct PoissonSolver<T> {
    grid: RadialGrid<T>,
    factor: ThomasFactor<T>,
}

impl<T: Real> PoissonSolver<T> {
    pub fn new(grid: RadialGrid<T>) -> Self {
        Self {
            grid,
            factor: ThomasFactor::dirichlet_laplacian(grid.intervals() - 1),
        }
    }

    pub fn grid(&self) -> &RadialGrid<T> {
        &self.grid
    }

    /// Only interior values of `rhs` enter; the result is the unique discrete
    /// solution. Nonnegative data give a nonnegative solution (M-matrix).
    pub fn solve(&self, rhs: &RadialField<T>) -> Result<RadialField<T>> {
        if !self.grid.same_as(rhs.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(self.solve_values(rhs.values()))
    }

    pub(crate) fn solve_values(&self, rhs: &[T]) -> RadialField<T> {
        let g = &self.grid;
        let h2 = g.step * g.step;
        let mut psi: Vec<T> = (1..g.intervals())
            .map(|i| h2 * g.node(i) * rhs[i])
            .collect();
        self.factor.solve_in_place(&mut psi);
        for (k, p) in psi.iter_mut().enumerate() {
            *p = *p / g.node(k + 1);
        }
        RadialField::from_interior(*g, &psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(r: f64, m: usize) -> RadialGrid<f64> {
        RadialGrid::new(r, m).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn uniform_mesh_arithmetic() {
        let g = grid(1.0, 64);
        assert_eq!(g.step(), 1.0 / 64.0);
        assert_eq!(g.node(32), 0.5);
        assert_eq!(g.node(0), 0.0);
        let g2 = grid(2.0, 128);
        assert_eq!(g2.node(128), 2.0);
        assert_eq!(g2.nodes().len(), 129);
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(matches!(
            RadialGrid::new(1.0, 15),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            RadialGrid::new(1.0, 14),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            RadialGrid::new(1.0, 17),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            RadialGrid::new(0.0, 64),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            RadialGrid::new(-1.0, 64),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn simpson_weights_are_nonnegative_and_sum_to_radius() {
        let g = grid(3.0, 40);
        let w = g.simpson_weights();
        assert!(w.iter().all(|&x| x >= 0.0));
        assert!(rel(w.iter().sum(), 3.0) < 1e-14);
    }

    #[test]
    fn ball_volume_and_monomials() {
        for &(r, m) in &[(1.0, 64), (2.0, 128), (0.7, 16)] {
            let g = grid(r, m);
            let ones = vec![1.0; g.len()];
            assert!(rel(g.integrate_ball(&ones).unwrap(), 4.0 / 3.0 * PI * r * r * r) < 1e-12);
            let r2: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
            let exact = 4.0 * PI * r.powi(5) / 5.0;
            assert!(rel(g.integrate_ball(&r2).unwrap(), exact) < 1e-3 * (16.0 / m as f64).powi(4));
            assert_eq!(g.integrate_ball(&vec![0.0; g.len()]).unwrap(), 0.0);
        }
        assert!(grid(1.0, 16).integrate_ball(&[1.0; 3]).is_err());
    }

    #[test]
    fn simpson_converges_at_fourth_order() {
        let f = |r: f64| (r * 1.3).cos();
        let exact = {
            // 4π ∫₀¹ r² cos(kr) dr with k = 1.3
            let k: f64 = 1.3;
            4.0 * PI * ((k * k - 2.0) * k.sin() + 2.0 * k * k.cos()) / k.powi(3)
        };
        let err = |m| {
            let g = grid(1.0, m);
            let v: Vec<f64> = g.nodes().iter().map(|&r| f(r)).collect();
            (g.integrate_ball(&v).unwrap() - exact).abs()
        };
        let ratio = err(32) / err(64);
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn field_validation() {
        let g = grid(1.0, 16);
        let mut v = vec![1.0; 17];
        assert!(matches!(
            RadialField::new(g, v.clone()),
            Err(Error::BoundaryValue(_))
        ));
        v[16] = 0.0;
        v[3] = f64::NAN;
        assert!(matches!(
            RadialField::new(g, v.clone()),
            Err(Error::NonFinite(3))
        ));
        assert!(matches!(
            RadialField::new(g, vec![0.0; 5]),
            Err(Error::FieldLength { .. })
        ));
        let f = RadialField::from_fn(g, |_| 2.0).unwrap();
        assert_eq!(f.values()[16], 0.0);
        assert_eq!(f.values()[15], 2.0);
    }

    #[test]
    fn dirichlet_energy_of_parabola() {
        for &r in &[1.0, 2.5] {
            let g = grid(r, 512);
            let u = RadialField::from_fn(g, |x| 1.0 - x * x / (r * r)).unwrap();
            let exact = 16.0 * PI * r / 5.0;
            assert!(rel(u.dirichlet_energy(), exact) < 1e-4);
            assert_eq!(RadialField::zeros(g).dirichlet_energy(), 0.0);
        }
    }

    #[test]
    fn lp_masses() {
        let g = grid(1.0, 512);
        let u = RadialField::from_fn(g, |x| 1.0 - x * x).unwrap();
        assert!(rel(u.lp_mass(2).unwrap(), 4.0 * PI * 8.0 / 105.0) < 1e-5);
        let two = u.scaled(2.0);
        assert!(rel(two.lp_mass(6).unwrap(), 64.0 * u.lp_mass(6).unwrap()) < 1e-14);
        assert!(matches!(u.lp_mass(3), Err(Error::UnsupportedExponent(3))));
        let ones = RadialField::from_fn(g, |_| 1.0).unwrap();
        // step at r = R costs O(h)
        assert!(rel(ones.lp_mass(2).unwrap(), 4.0 / 3.0 * PI) < 2.0 / 512.0);
    }

    #[test]
    fn laplacian_of_parabola_is_exact() {
        let r = 1.7;
        let g = grid(r, 64);
        let u = RadialField::from_fn(g, |x| 1.0 - x * x / (r * r)).unwrap();
        let lap = u.neg_laplacian();
        for &v in &lap.values()[..64] {
            assert!(rel(v, 6.0 / (r * r)) < 1e-10);
        }
        assert_eq!(lap.values()[64], 0.0);
        assert!(RadialField::zeros(g).neg_laplacian().is_zero());
    }

    #[test]
    fn summation_by_parts() {
        let g = grid(1.0, 200);
        let u = RadialField::from_fn(g, |x| (3.0 * x).sin() * (1.0 - x) + 0.3 * x * x).unwrap();
        let pairing = u.neg_laplacian().inner(&u).unwrap();
        assert!(rel(pairing, u.dirichlet_energy()) < 1e-12);
    }

    #[test]
    fn poisson_solve_inverts_laplacian() {
        let g = grid(1.0, 128);
        let solver = PoissonSolver::new(g);
        let f = RadialField::from_fn(g, |x| (2.0 * x).cos() + 1.5).unwrap();
        let phi = solver.solve(&f).unwrap();
        let back = phi.neg_laplacian();
        for i in 1..128 {
            assert!(rel(back.values()[i], f.values()[i]) < 1e-10);
        }
        let other = grid(1.0, 64);
        assert!(matches!(
            PoissonSolver::new(other).solve(&f),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn params_validation() {
        assert!(PhysParams::new(1.0, 0.0, 1.0).is_err());
        assert!(PhysParams::new(1.0, 1.0, -1.0).is_err());
        assert!(PhysParams::new(f64::NAN, 1.0, 1.0).is_err());
        let p = PhysParams::new(-2.0, 3.0, 1.0).unwrap();
        assert!(p.check_grid(&grid(1.0, 16)).is_ok());
        assert!(p.check_grid(&grid(2.0, 16)).is_err());
    }
}
