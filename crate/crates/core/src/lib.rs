//! Computable entropy and Lyapunov functionals for periodic linear cocycles,
//! dominated-splitting detection, an explicit piecewise-affine horseshoe
//! construction with its Markov verification, and scale-based entropy
//! estimators validated on model systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`] small dense linear algebra: cocycle products, spectra,
//!   Grassmannian Jacobians, exterior powers, symplectic checks.
//! - [`exponents`] the exponent functionals `Δ⁺`, `Δ⁻`, `Δ`, `Δ_E` and `Δ*`.
//! - [`domination`] N-domination of invariant splittings along periodic orbits.
//! - [`horseshoe`] derived scales, the affine model, Markov crossings,
//!   entropy and conformal dimension of the constructed horseshoe.
//! - [`symbolic`] subshifts of finite type.
//! - [`estimators`] Bowen balls, separated sets, tail and Katok entropy,
//!   box-counting dimension.
//! - [`systems`] evaluable model maps with exact differentials.
//! - [`cli`] the `hsf` command-line front end.

pub mod cli;
pub mod domination;
pub mod error;
pub mod estimators;
pub mod exponents;
pub mod horseshoe;
pub mod interval;
pub mod linalg;
pub mod report;
pub mod symbolic;
pub mod systems;

pub use error::{Error, Result};
