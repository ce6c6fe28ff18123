//! Sampled integral kernel of the single-mode transform.
//!
//! `<y|H_alpha(mu, nu)|x>` is a Gaussian chirp
//!
//! ```text
//! c * exp{ -i (x^2/mu^2 + y^2/nu^2) / (2 tan a) + i x y / (mu nu sin a) },
//! c = e^{i(pi/2 - a)/2} / sqrt(2 pi mu nu sin a),
//! ```
//!
//! written here for `sin a > 0`. For `sin a < 0` the kernel is evaluated as
//! the `a - pi` kernel composed with the parity `x -> -x`. The matrix stores
//! `sqrt(dx dy) * K(y_j, x_k)`, so it acts on samples weighted by `sqrt(dx)`.
//!
//! The discretization is unitary only on signals resolved by the grid. A
//! single grid point is not such a signal: its column has squared norm
//! `n dx dy / (2 pi mu nu |sin a|)`, which is 1 only on a critically matched
//! grid. Unitarity is therefore measured on a basis of well-resolved
//! functions, see [`KernelMatrix::unitarity_residual`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{l2_inner, Grid1D, SampledWavefunction};
use crate::params::{validate_params, HadamardScale, Route, TransformParams};

/// Closed-form pieces of the analytic kernel for one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct KernelCoefficients {
    prefactor: Complex64,
    chirp_in: f64,
    chirp_out: f64,
    cross: f64,
    reflect_input: bool,
}

impl KernelCoefficients {
    pub fn new(p: &TransformParams) -> Result<Self> {
        validate_params(p, Route::Kernel)?;
        let mut a = p.reduced_alpha();
        let reflect_input = a.sin() < 0.0;
        if reflect_input {
            a -= PI;
        }
        let (s, c) = a.sin_cos();
        let cot = c / s;
        Ok(KernelCoefficients {
            prefactor: Complex64::from_polar((2.0 * PI * p.mu * p.nu * s).sqrt().recip(), 0.5 * (0.5 * PI - a)),
            chirp_in: 0.5 * cot / (p.mu * p.mu),
            chirp_out: 0.5 * cot / (p.nu * p.nu),
            cross: 1.0 / (p.mu * p.nu * s),
            reflect_input,
        })
    }

    /// Analytic kernel `<y|H|x>` (no quadrature weight).
    pub fn value(&self, y: f64, x: f64) -> Complex64 {
        let x = if self.reflect_input { -x } else { x };
        let phase = -self.chirp_in * x * x - self.chirp_out * y * y + self.cross * x * y;
        self.prefactor * Complex64::from_polar(1.0, phase)
    }

    /// Largest phase advance of the kernel between adjacent samples.
    pub fn max_phase_step(&self, grid_in: &Grid1D, grid_out: &Grid1D) -> f64 {
        let (xm, ym) = (grid_in.max_abs(), grid_out.max_abs());
        let along_x = grid_in.spacing() * (2.0 * self.chirp_in.abs() * xm + self.cross.abs() * ym);
        let along_y = grid_out.spacing() * (2.0 * self.chirp_out.abs() * ym + self.cross.abs() * xm);
        along_x.max(along_y)
    }
}

/// Dense sampled kernel with the quadrature weights folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    grid_in: Grid1D,
    grid_out: Grid1D,
    entries: DMatrix<Complex64>,
}

impl KernelMatrix {
    pub fn grid_in(&self) -> &Grid1D {
        &self.grid_in
    }

    pub fn grid_out(&self) -> &Grid1D {
        &self.grid_out
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Applies the transform to a wavefunction sampled on `grid_in`.
    pub fn apply(&self, f: &SampledWavefunction) -> Result<SampledWavefunction> {
        if f.grid() != &self.grid_in {
            return Err(Error::GridMismatch);
        }
        let w_in = self.grid_in.spacing().sqrt();
        let v = DVector::from_iterator(f.values().len(), f.values().iter().map(|z| z * w_in));
        let out = &self.entries * v;
        let w_out = self.grid_out.spacing().sqrt().recip();
        SampledWavefunction::new(self.grid_out, out.iter().map(|z| z * w_out).collect())
    }

    /// Conjugate transpose, mapping `grid_out` back to `grid_in`.
    pub fn adjoint(&self) -> KernelMatrix {
        KernelMatrix { grid_in: self.grid_out, grid_out: self.grid_in, entries: self.entries.adjoint() }
    }

    /// The kernel of `self` applied after `first`.
    pub fn compose(&self, first: &KernelMatrix) -> Result<KernelMatrix> {
        if first.grid_out != self.grid_in {
            return Err(Error::GridMismatch);
        }
        Ok(KernelMatrix { grid_in: first.grid_in, grid_out: self.grid_out, entries: &self.entries * &first.entries })
    }

    /// Euclidean norms of the weighted columns (one per input grid point).
    pub fn column_norms(&self) -> Vec<f64> {
        self.entries.column_iter().map(|c| c.norm()).collect()
    }

    /// `max |<K b_i, K b_j> - <b_i, b_j>|` over a set of input functions.
    ///
    /// With an orthonormal set of grid-resolved functions (e.g. low-order
    /// Hermite functions) this is the unitarity defect on the subspace the
    /// grid actually represents.
    pub fn unitarity_residual(&self, basis: &[SampledWavefunction]) -> Result<f64> {
        let images = basis.iter().map(|b| self.apply(b)).collect::<Result<Vec<_>>>()?;
        let mut worst = 0.0f64;
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let before = l2_inner(&basis[i], &basis[j])?;
                let after = l2_inner(&images[i], &images[j])?;
                worst = worst.max((after - before).norm());
            }
        }
        Ok(worst)
    }

    pub fn max_entry_diff(&self, other: &KernelMatrix) -> Result<f64> {
        if self.entries.shape() != other.entries.shape() {
            return Err(Error::GridMismatch);
        }
        Ok(self.entries.iter().zip(other.entries.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

/// Samples the kernel of `H_alpha(mu, nu)` from `grid_in` to `grid_out`.
pub fn frht_kernel(p: &TransformParams, grid_in: Grid1D, grid_out: Grid1D) -> Result<KernelMatrix> {
    let coeffs = KernelCoefficients::new(p)?;
    let phase_step = coeffs.max_phase_step(&grid_in, &grid_out);
    if phase_step >= PI {
        return Err(Error::AliasedGrid { phase_step });
    }
    let weight = (grid_in.spacing() * grid_out.spacing()).sqrt();
    let xs: Vec<f64> = grid_in.points().collect();
    let ys: Vec<f64> = grid_out.points().collect();
    let entries = DMatrix::from_fn(ys.len(), xs.len(), |j, k| coeffs.value(ys[j], xs[k]) * weight);
    Ok(KernelMatrix { grid_in, grid_out, entries })
}

/// Fractional Fourier transform of order `alpha` on a square grid.
pub fn frft_kernel(alpha: f64, grid: Grid1D) -> Result<KernelMatrix> {
    frht_kernel(&TransformParams::frft(alpha), grid, grid)
}

/// Continuous Hadamard transform with scale length `sigma`.
pub fn hadamard_kernel(s: HadamardScale, grid: Grid1D) -> Result<KernelMatrix> {
    frht_kernel(&s.params(), grid, grid)
}

/// Wavefunction `<x|H_alpha(mu, nu)|f>` measured on the input grid.
pub fn measure_position(p: &TransformParams, f: &SampledWavefunction) -> Result<SampledWavefunction> {
    frht_kernel(p, *f.grid(), *f.grid())?.apply(f)
}
