//! Lorentz-space norms, Fourier-multiplier singular integrals and mild
//! Navier-Stokes diagnostics on a periodic box approximating R^n.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: periodic grids, real fields and their spectral transforms.
//! * [`lorentz`]: decreasing rearrangements, Lorentz quasinorms and norms,
//!   Hardy and interpolation inequality checks, Sobolev ratios.
//! * [`singular`]: Riesz transforms, Leray projection, heat semigroup and
//!   kernel, Calderon-Zygmund decomposition, solenoidal truncation.
//! * [`ns`]: the mild (Duhamel) formulation, its exponential-integrator
//!   solver and weak/projected/very-weak residuals.
//! * [`diagnostics`]: energy equality, cross-energy identity,
//!   Prodi-Serrin accumulator and the Gronwall weak-strong bound.
//! * [`harness`]: configuration, initial data and experiment runner used by
//!   the `lorentz-ns` binary.
//!
//! Heavy data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise. Results are
//! identical either way.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod io;
pub mod lorentz;
pub mod ns;
pub mod par;
pub mod quadrature;
pub mod rng;
pub mod singular;
pub mod timeint;

pub use error::{Error, Result};
pub use grid::{Grid, ScalarField, SpectralField, TensorField, VectorField};
