//! Spectral simulation and verification library for the defocusing
//! nonlinear Schrödinger equation `iu_t + u_xx = |u|^{p-1}u` with hybrid
//! initial data `u₀ = v₀ + w₀`: a decaying part `v₀` on the line plus a
//! 2π-periodic carrier `w₀` on the torus.
//!
//! The splitting turns one equation into two coupled ones — the carrier
//! solves the same equation on the torus, and the perturbation solves
//!
//! ```text
//! iv_t + v_xx = |v+w|^{p-1}(v+w) - |w|^{p-1}w
//! ```
//!
//! on the line, with `w` entering as a known time-dependent coefficient.
//! Both problems are solved by Strang-split Fourier stepping and,
//! independently, by Picard iteration on their Duhamel formulas; the two
//! routes cross-validate each other. On top of the solvers sit the
//! conserved-quantity ledger (mass, energy, the difference Hamiltonian
//! `H` and its production rate `∫R` with `dH/dt = ∫R` along the coupled
//! flow), growth-envelope monitors, and a randomized estimates lab that
//! fits the implicit constants of the pointwise inequalities driving the
//! analysis.
//!
//! Modules:
//!
//! - [`grid`], [`field`], [`spectral`]: grids, fields, transforms,
//!   Fourier multipliers, Sobolev/Lebesgue norms, dyadic projections,
//!   exact torus-to-line resampling;
//! - [`nonlin`]: pointwise nonlinear maps and Taylor remainders;
//! - [`torus`], [`line`]: the two solvers, guaranteed-time formulas,
//!   blow-up and boundary monitors;
//! - [`functionals`]: conserved quantities, the ledger and its CSV
//!   export, envelope fits;
//! - [`estimates`]: the randomized inequality lab;
//! - [`checkpoint`]: bit-exact binary state snapshots.

pub mod checkpoint;
pub mod error;
pub mod estimates;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod line;
pub mod nonlin;
pub mod spectral;
pub mod torus;

pub use error::{Error, Result};
pub use field::ComplexField;
pub use grid::{Grid, LineGrid, TorusGrid};
pub use nonlin::Power;
