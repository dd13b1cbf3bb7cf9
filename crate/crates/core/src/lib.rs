//! Numerical laboratory for quantum Borel kinematics on flat periodic boxes,
//! the DG family of nonlinear Schrödinger equations, and the
//! nonlinear gauge transformations that connect inequivalent quantisations.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] – periodic grids, spectral derivatives, wavefunctions, field specs
//!   and snapshot IO.
//! * [`kinematics`] – the quantised kinematic `Q(f)`, `P^(D)(X)`, commutator
//!   residuals and the static catalog of elementary kinematics.
//! * [`functionals`] – hydrodynamic fields and the DG nonlinear functionals.
//! * [`evolution`] – split-step / RK4 time integration, trajectories,
//!   continuity residuals and convergence studies.
//! * [`gauge`] – polar-form nonlinear gauge transformations and tangent maps.
//! * [`cli`] – configuration parsing and the command implementations behind
//!   the `dglab` binary.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::result_large_err, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod evolution;
pub mod functionals;
pub mod gauge;
pub mod grid;
pub mod kinematics;
pub mod random;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
