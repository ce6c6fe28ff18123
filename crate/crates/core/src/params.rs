//! Transform parameters and their validation.
//!
//! Every transform is labelled by an angle `alpha` and two positive scale
//! lengths: `mu` rescales the input coordinate and `nu` the output coordinate.
//! The kernel engines divide by `sin(alpha)` and refuse angles too close to a
//! multiple of pi; the Fock and phase-space engines are regular everywhere.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, TAU};

use crate::error::{Error, Result};

/// Smallest `|sin(alpha)|` accepted by kernel construction.
pub const EPS_SIN: f64 = 1e-6;

/// Which engine a parameter set is about to be handed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Kernel,
    Fock,
    Symplectic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformParams {
    pub alpha: f64,
    pub mu: f64,
    pub nu: f64,
}

impl TransformParams {
    /// Builds a parameter set, checking the route-independent invariants.
    pub fn new(alpha: f64, mu: f64, nu: f64) -> Result<Self> {
        let p = TransformParams { alpha, mu, nu };
        p.check_basic()?;
        Ok(p)
    }

    /// Plain fractional Fourier transform of order `alpha` (unit scales).
    pub fn frft(alpha: f64) -> Self {
        TransformParams { alpha, mu: 1.0, nu: 1.0 }
    }

    /// `alpha` reduced into `[0, 2pi)`.
    pub fn reduced_alpha(&self) -> f64 {
        reduce_angle(self.alpha)
    }

    fn check_basic(&self) -> Result<()> {
        check_scale("mu", self.mu)?;
        check_scale("nu", self.nu)?;
        if !self.alpha.is_finite() {
            return Err(Error::NonFiniteAngle(self.alpha));
        }
        Ok(())
    }
}

/// Scale length of the continuous Hadamard transform; equivalent to
/// `alpha = pi/2, mu = nu = sigma/sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HadamardScale {
    pub sigma: f64,
}

impl HadamardScale {
    pub fn new(sigma: f64) -> Result<Self> {
        check_scale("sigma", sigma)?;
        Ok(HadamardScale { sigma })
    }

    pub fn params(&self) -> TransformParams {
        let s = self.sigma * FRAC_1_SQRT_2;
        TransformParams { alpha: FRAC_PI_2, mu: s, nu: s }
    }
}

pub fn reduce_angle(alpha: f64) -> f64 {
    let r = alpha.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

pub(crate) fn check_scale(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveScale { name, value })
    }
}

/// Checks `p` against the invariants of the engine selected by `route`.
pub fn validate_params(p: &TransformParams, route: Route) -> Result<()> {
    p.check_basic()?;
    if route == Route::Kernel {
        let sin_abs = p.reduced_alpha().sin().abs();
        if sin_abs < EPS_SIN {
            return Err(Error::SingularKernelAngle { alpha: p.alpha, sin_abs, eps: EPS_SIN });
        }
    }
    Ok(())
}
