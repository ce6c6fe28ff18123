//! Continuous fractional Hadamard transform.
//!
//! The transform `H_alpha(mu, nu)` rotates phase space by `alpha` after
//! rescaling the input coordinate by `mu`, and rescales the output
//! coordinate by `nu`. This crate evaluates it in three independent
//! representations and checks them against each other:
//!
//! * [`kernel1d`]: the integral kernel sampled on a uniform grid,
//! * [`fock`]: dense matrices in the truncated number basis, built either from
//!   the normally ordered closed form or from the squeezer/rotation
//!   decomposition,
//! * [`symplectic`]: the linear map on quadratures applied to Gaussian states.
//!
//! [`twomode`] extends all of this to two modes in the entangled-state
//! (relative position / total momentum) representation, and [`verify`] runs
//! the full cross-representation identity suite.
//!
//! Conventions: `hbar = 1`, `X = (a + a^dag)/sqrt(2)`, `P = (a - a^dag)/(i sqrt(2))`,
//! vacuum covariance `I/2`.

pub mod error;
pub mod fock;
pub mod grid;
pub mod hermite;
pub mod kernel1d;
mod linalg;
pub mod params;
pub mod symplectic;
pub mod twomode;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{l2_inner, Grid1D, SampledWavefunction};
pub use params::{validate_params, HadamardScale, Route, TransformParams, EPS_SIN};

pub use num_complex::Complex64;
