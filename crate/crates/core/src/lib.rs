//! Variational particle schemes for 1D gas dynamics and diffusion.
//!
//! This crate implements Lagrangian particle discretizations of the porous
//! medium / heat equations and the isentropic / isothermal Euler equations
//! that are derived by discretizing an optimal-transport variational
//! principle rather than the PDEs themselves. Each time step moves mass
//! packets by minimizing `penalty * transport-cost + internal energy` with a
//! trust-region Newton method, which makes the schemes unconditionally
//! stable and energy-dissipating.
//!
//! Module map:
//! - [`physics`]: internal-energy laws, pressure, discrete total energy;
//! - [`transport1d`]: inverse CDFs, exact 1D Wasserstein distances, mass
//!   redistribution and the fixed-mass L2 projection;
//! - [`optimizer`]: trust-region Newton solver for strictly convex
//!   objectives with tridiagonal Hessians;
//! - [`schemes`]: the VPS1/VPS1a/VPS2/DIRK2 steppers and their porous
//!   medium variants;
//! - [`oracles`]: Barenblatt profiles, heat kernels, exact Riemann
//!   solutions and initial-data constructors;
//! - [`metrics`]: discrete error norms and convergence-rate extraction.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature for embedded or wasm targets.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod math;
pub mod metrics;
pub mod optimizer;
pub mod oracles;
pub mod physics;
pub mod quad;
pub mod schemes;
pub mod transport1d;

pub use error::Error;
