//! Radial solver and verification harness for the critical Schrödinger–Poisson
//! system on a ball `B_R ⊂ ℝ³`:
//!
//! ```text
//! −Δu = λu + q|u|³u φ,   −Δφ = q|u|⁵   in B_R,   u = φ = 0 on ∂B_R.
//! ```
//!
//! Everything is discretized on a uniform radial mesh through the substitution
//! `v = r·u`, which turns the radial Laplacian into the plain 1-D Dirichlet
//! Laplacian. The discrete forms are chosen so that the energy identities of the
//! variational reduction hold to rounding error, not just to `O(h²)`.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`, which is what the command-line tool and
//! the acceptance suite use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod fit;
pub mod groundstate;
pub mod instanton;
pub mod pohozaev;
pub mod radial;
pub mod reduction;
pub mod scalar;
pub mod spectral;
pub mod tridiag;

pub use error::{Error, Result};
pub use scalar::Real;

pub use energy::{EnergyBreakdown, FiberInfo};
pub use groundstate::{GroundState, Init, SolveOptions, StepRule};
pub use instanton::{CosineCutoff, Cutoff, InstantonNorms, InstantonReport, SobolevEstimate};
pub use pohozaev::{PohozaevReport, ProbeLevel, ProbeReport, Regime};
pub use radial::{PhysParams, PoissonSolver, RadialField, RadialGrid};
pub use reduction::ReducedPotential;
pub use spectral::EigenPair;

pub type RadialGrid64 = RadialGrid<f64>;
pub type RadialField64 = RadialField<f64>;
pub type PhysParams64 = PhysParams<f64>;
pub type EigenPair64 = EigenPair<f64>;
pub type GroundState64 = GroundState<f64>;
pub type SolveOptions64 = SolveOptions<f64>;
pub type CosineCutoff64 = CosineCutoff<f64>;
pub type ProbeReport64 = ProbeReport<f64>;
