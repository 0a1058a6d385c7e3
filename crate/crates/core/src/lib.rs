//! Spectral solvers for the free Dirac equation in one and three space
//! dimensions, families of concentrated initial data, and the weak-limit
//! diagnostics that identify where the probability density ends up as the
//! concentration parameter goes to zero.
//!
//! The library is organized bottom-up:
//!
//! * [`matrix`] and [`algebra`]: small complex matrices, the Dirac matrices,
//!   and momentum-space eigenbases of the Hamiltonian symbol.
//! * [`quadrature`]: Gauss-Legendre and spherical rules plus slope fitting.
//! * [`regularization`] and [`testfn`]: concentrating profile families and
//!   the observables they are paired with.
//! * [`grid`], [`propagator1d`], [`propagator3d`]: discrete Fourier grids
//!   and the exact-in-time mode-by-mode evolution.
//! * [`shadow`]: time-dependent density pairings, their closed-form limits,
//!   and epsilon sweeps with convergence-rate estimates.
//! * [`extfield`]: coefficient matrices for external electromagnetic data
//!   and a split-step solver with hermiticity accounting.
//! * [`config`]: plain-text experiment descriptions and run manifests.

pub mod algebra;
pub mod config;
pub mod error;
pub mod extfield;
pub mod grid;
pub mod matrix;
pub mod propagator1d;
pub mod propagator3d;
pub mod quadrature;
pub mod regularization;
pub mod shadow;
pub mod testfn;

pub use error::{DiracError, Result};
pub use matrix::{ComplexMatrix, Spinor2, Spinor4};
