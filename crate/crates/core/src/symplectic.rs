//! Linear quadrature maps and Gaussian states.
//!
//! A [`SymplecticMap`] holds the Heisenberg coefficients of a Gaussian
//! unitary `U`: `U Q U^dag = M Q` for the quadrature column
//! `Q = (X, P)` or `(X1, P1, X2, P2)`. With `hbar = 1` and
//! `X = (a + a^dag)/sqrt(2)` the vacuum covariance is `I/2` (not `I`).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{check_scale, validate_params, Route, TransformParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    m: DMatrix<f64>,
}

/// Block form `diag([[0, 1], [-1, 0]], ...)` for `size/2` modes.
pub fn omega(size: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(size, size);
    for k in (0..size).step_by(2) {
        o[(k, k + 1)] = 1.0;
        o[(k + 1, k)] = -1.0;
    }
    o
}

fn check_map_size(size: usize) -> Result<()> {
    if size == 2 || size == 4 {
        Ok(())
    } else {
        Err(Error::SizeMismatch { expected: 4, found: size })
    }
}

impl SymplecticMap {
    /// Wraps a coefficient matrix; the symplectic condition is not enforced
    /// (see [`SymplecticMap::symplectic_residual`]).
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::SizeMismatch { expected: m.nrows(), found: m.ncols() });
        }
        check_map_size(m.nrows())?;
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite symplectic entry".into()));
        }
        Ok(SymplecticMap { m })
    }

    pub fn identity(size: usize) -> Result<Self> {
        check_map_size(size)?;
        Ok(SymplecticMap { m: DMatrix::identity(size, size) })
    }

    pub fn size(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// `max |M Omega M^T - Omega|`.
    pub fn symplectic_residual(&self) -> f64 {
        let o = omega(self.size());
        (&self.m * &o * self.m.transpose() - o).amax()
    }

    /// Map of the operator product `self * other` (apply `other` first in the
    /// Schroedinger picture). Heisenberg coefficients compose in reverse.
    pub fn then_after(&self, other: &SymplecticMap) -> Result<SymplecticMap> {
        if self.size() != other.size() {
            return Err(Error::SizeMismatch { expected: self.size(), found: other.size() });
        }
        Ok(SymplecticMap { m: &other.m * &self.m })
    }

    /// Map of `U^-1`; uses `M^-1 = -Omega M^T Omega`.
    pub fn inverse(&self) -> SymplecticMap {
        let o = omega(self.size());
        SymplecticMap { m: -(&o * self.m.transpose() * &o) }
    }

    pub fn max_diff(&self, other: &SymplecticMap) -> f64 {
        if self.size() != other.size() {
            return f64::INFINITY;
        }
        (&self.m - &other.m).amax()
    }
}

/// Operator product `ops[0] * ops[1] * ...`.
pub fn compose(ops: &[&SymplecticMap]) -> Result<SymplecticMap> {
    let (first, rest) = ops.split_first().ok_or(Error::SizeMismatch { expected: 1, found: 0 })?;
    rest.iter().try_fold((*first).clone(), |acc, op| acc.then_after(op))
}

fn single(rows: [[f64; 2]; 2]) -> SymplecticMap {
    SymplecticMap { m: DMatrix::from_fn(2, 2, |i, j| rows[i][j]) }
}

/// `e^{i alpha a^dag a}`: `X -> X cos + P sin`, `P -> P cos - X sin`.
pub fn rotation(alpha: f64) -> Result<SymplecticMap> {
    if !alpha.is_finite() {
        return Err(Error::NonFiniteAngle(alpha));
    }
    let (s, c) = alpha.sin_cos();
    Ok(single([[c, s], [-s, c]]))
}

/// `S1(mu)`: `X -> mu X`, `P -> P / mu`.
pub fn squeezer1_symplectic(mu: f64) -> Result<SymplecticMap> {
    check_scale("mu", mu)?;
    Ok(single([[mu, 0.0], [0.0, 1.0 / mu]]))
}

pub fn frhad_symplectic1(p: &TransformParams) -> Result<SymplecticMap> {
    validate_params(p, Route::Symplectic)?;
    let (s, c) = p.alpha.sin_cos();
    let (mu, nu) = (p.mu, p.nu);
    Ok(single([[mu / nu * c, mu * nu * s], [-s / (mu * nu), nu / mu * c]]))
}

/// Rows express `(X1-X2, X1+X2, P1-P2, P1+P2)` in terms of `(X1, P1, X2, P2)`.
fn epr_basis() -> DMatrix<f64> {
    DMatrix::from_row_slice(4, 4, &[
        1.0, 0.0, -1.0, 0.0, //
        1.0, 0.0, 1.0, 0.0, //
        0.0, 1.0, 0.0, -1.0, //
        0.0, 1.0, 0.0, 1.0,
    ])
}

/// Per-mode map from coefficients `l` acting on the EPR combinations.
fn from_epr(l: DMatrix<f64>) -> SymplecticMap {
    let t = epr_basis();
    let t_inv = t.clone().try_inverse().expect("EPR basis is invertible");
    SymplecticMap { m: t_inv * l * t }
}

/// `S2(mu)`: `X1-X2` and `P1+P2` scale by `mu`; `X1+X2` and `P1-P2` by `1/mu`.
pub fn squeezer2_symplectic(mu: f64) -> Result<SymplecticMap> {
    check_scale("mu", mu)?;
    Ok(from_epr(DMatrix::from_diagonal(&DVector::from_vec(vec![mu, 1.0 / mu, 1.0 / mu, mu]))))
}

/// `e^{i alpha (n1 + n2)}`: both modes rotate by `alpha`.
pub fn rotation2(alpha: f64) -> Result<SymplecticMap> {
    let r = rotation(alpha)?;
    let mut m = DMatrix::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(r.matrix());
    m.view_mut((2, 2), (2, 2)).copy_from(r.matrix());
    Ok(SymplecticMap { m })
}

pub fn frhad_symplectic2(p: &TransformParams) -> Result<SymplecticMap> {
    validate_params(p, Route::Symplectic)?;
    let (s, c) = p.alpha.sin_cos();
    let (mu, nu) = (p.mu, p.nu);
    // order: X-, X+, P-, P+
    #[rustfmt::skip]
    let l = DMatrix::from_row_slice(4, 4, &[
        mu / nu * c, 0.0, mu * nu * s, 0.0,
        0.0, nu / mu * c, 0.0, s / (mu * nu),
        -s / (mu * nu), 0.0, nu / mu * c, 0.0,
        0.0, -mu * nu * s, 0.0, mu / nu * c,
    ]);
    Ok(from_epr(l))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

const PHYSICAL_TOL: f64 = 1e-10;

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        check_map_size(mean.len())?;
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::SizeMismatch { expected: mean.len(), found: cov.nrows() });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) || (&cov - cov.transpose()).amax() > 1e-12 {
            return Err(Error::UnphysicalState { min_eigenvalue: f64::NAN });
        }
        let state = GaussianState { mean, cov };
        let min = state.uncertainty_min_eigenvalue();
        if min < -PHYSICAL_TOL {
            return Err(Error::UnphysicalState { min_eigenvalue: min });
        }
        Ok(state)
    }

    /// Vacuum: zero mean, covariance `I/2`.
    pub fn vacuum(size: usize) -> Result<Self> {
        check_map_size(size)?;
        Ok(GaussianState { mean: DVector::zeros(size), cov: DMatrix::identity(size, size) * 0.5 })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn size(&self) -> usize {
        self.mean.len()
    }

    /// Smallest eigenvalue of `cov + i Omega / 2`; negative means unphysical.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let o = omega(self.size());
        let h = DMatrix::from_fn(self.size(), self.size(), |i, j| Complex64::new(self.cov[(i, j)], 0.5 * o[(i, j)]));
        SymmetricEigen::new(h).eigenvalues.min()
    }

    /// Symplectic eigenvalues, ascending; all equal `1/2` for pure states.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.cov.clone());
        let sqrt_cov = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()))
            * eig.eigenvectors.transpose();
        let o = omega(self.size());
        let inner = (&sqrt_cov * &o * &sqrt_cov).map(|v| Complex64::new(0.0, v));
        let mut values: Vec<f64> = SymmetricEigen::new(inner).eigenvalues.iter().copied().filter(|v| *v > 0.0).collect();
        values.sort_by(f64::total_cmp);
        values
    }
}

/// Heisenberg action on moments: the state `U^dag |psi>` has
/// mean `M mean` and covariance `M cov M^T`.
pub fn apply_gaussian(s: &SymplecticMap, g: &GaussianState) -> Result<GaussianState> {
    if s.size() != g.size() {
        return Err(Error::SizeMismatch { expected: s.size(), found: g.size() });
    }
    let min = g.uncertainty_min_eigenvalue();
    if min < -PHYSICAL_TOL {
        return Err(Error::UnphysicalState { min_eigenvalue: min });
    }
    let mean = s.matrix() * g.mean();
    let cov = s.matrix() * g.cov() * s.matrix().transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    Ok(GaussianState { mean, cov })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn params(alpha: f64, mu: f64, nu: f64) -> TransformParams {
        TransformParams::new(alpha, mu, nu).unwrap()
    }

    #[test]
    fn trivial_parameters_give_identity() {
        let id2 = SymplecticMap::identity(2).unwrap();
        let id4 = SymplecticMap::identity(4).unwrap();
        assert!(frhad_symplectic1(&params(0.0, 1.0, 1.0)).unwrap().max_diff(&id2) < 1e-15);
        assert!(frhad_symplectic2(&params(0.0, 1.0, 1.0)).unwrap().max_diff(&id4) < 1e-15);
        assert!(squeezer2_symplectic(1.0).unwrap().max_diff(&id4) < 1e-15);
    }

    #[test]
    fn quarter_turn_swaps_quadratures() {
        let (mu, nu) = (1.3, 0.7);
        let m = frhad_symplectic1(&params(FRAC_PI_2, mu, nu)).unwrap();
        let expected = single([[0.0, mu * nu], [-1.0 / (mu * nu), 0.0]]);
        assert!(m.max_diff(&expected) < 1e-15);
    }

    #[test]
    fn worked_example() {
        // alpha = pi/3, mu = 2, nu = 1: entries by scalar arithmetic
        let m = frhad_symplectic1(&params(PI / 3.0, 2.0, 1.0)).unwrap();
        let r3 = 3f64.sqrt();
        let expected = single([[1.0, r3], [-r3 / 4.0, 0.25]]);
        assert!(m.max_diff(&expected) < 1e-15);
        assert!((m.matrix().determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_mode_quarter_turn_laws() {
        let (mu, nu) = (1.2, 0.9);
        let m = frhad_symplectic2(&params(FRAC_PI_2, mu, nu)).unwrap();
        // coefficient row of X1 - X2 under the map
        let x_minus = DVector::from_vec(vec![1.0, 0.0, -1.0, 0.0]);
        let p_minus = DVector::from_vec(vec![0.0, 1.0, 0.0, -1.0]);
        let p_plus = DVector::from_vec(vec![0.0, 1.0, 0.0, 1.0]);
        let x_plus = DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
        let image = |v: &DVector<f64>| m.matrix().transpose() * v;
        assert!((image(&x_minus) - &p_minus * (mu * nu)).amax() < 1e-15);
        assert!((image(&p_plus) + &x_plus * (mu * nu)).amax() < 1e-15);
    }

    #[test]
    fn random_draws_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = params(rng.gen_range(-7.0..7.0), rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0));
            assert!(frhad_symplectic1(&p).unwrap().symplectic_residual() < 1e-12);
            assert!(frhad_symplectic2(&p).unwrap().symplectic_residual() < 1e-12);
            assert!(squeezer2_symplectic(p.mu).unwrap().symplectic_residual() < 1e-12);
        }
        assert!(frhad_symplectic2(&params(0.9, 1.4, 0.6)).unwrap().symplectic_residual() < 1e-12);
    }

    #[test]
    fn decomposition_and_additivity() {
        let p = params(0.8, 1.7, 0.6);
        let parts = compose(&[
            &squeezer1_symplectic(p.nu).unwrap().inverse(),
            &rotation(p.alpha).unwrap(),
            &squeezer1_symplectic(p.mu).unwrap(),
        ])
        .unwrap();
        assert!(parts.max_diff(&frhad_symplectic1(&p).unwrap()) < 1e-12);

        let parts2 = compose(&[
            &squeezer2_symplectic(p.nu).unwrap().inverse(),
            &rotation2(p.alpha).unwrap(),
            &squeezer2_symplectic(p.mu).unwrap(),
        ])
        .unwrap();
        assert!(parts2.max_diff(&frhad_symplectic2(&p).unwrap()) < 1e-12);

        let (alpha, beta, mu_in, mu, nu) = (0.5, 1.2, 0.8, 1.5, 2.1);
        for f in [frhad_symplectic1, frhad_symplectic2] {
            let lhs = compose(&[&f(&params(alpha, mu, nu)).unwrap(), &f(&params(beta, mu_in, mu)).unwrap()]).unwrap();
            assert!(lhs.max_diff(&f(&params(alpha + beta, mu_in, nu)).unwrap()) < 1e-12);
        }
        let inv = compose(&[&squeezer2_symplectic(1.6).unwrap(), &squeezer2_symplectic(1.0 / 1.6).unwrap()]).unwrap();
        assert!(inv.max_diff(&SymplecticMap::identity(4).unwrap()) < 1e-15);
    }

    #[test]
    fn inverse_matches_matrix_inverse() {
        let m = frhad_symplectic2(&params(2.3, 0.6, 1.9)).unwrap();
        let direct = m.matrix().clone().try_inverse().unwrap();
        assert!((m.inverse().matrix() - direct).amax() < 1e-12);
    }

    #[test]
    fn vacuum_through_rotations_and_swap() {
        let vac = GaussianState::vacuum(2).unwrap();
        for alpha in [0.3, 1.0, 2.5] {
            let out = apply_gaussian(&frhad_symplectic1(&params(alpha, 1.0, 1.0)).unwrap(), &vac).unwrap();
            assert!((out.cov() - vac.cov()).amax() < 1e-15);
        }
        let k: f64 = 1.3 * 1.3;
        let out = apply_gaussian(&frhad_symplectic1(&params(FRAC_PI_2, 1.3, 1.3)).unwrap(), &vac).unwrap();
        assert!((out.cov()[(0, 0)] - k * k / 2.0).abs() < 1e-14);
        assert!((out.cov()[(1, 1)] - 1.0 / (2.0 * k * k)).abs() < 1e-14);
        assert!(out.cov()[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn two_mode_squeezing_variances() {
        let vac = GaussianState::vacuum(4).unwrap();
        let out = apply_gaussian(&squeezer2_symplectic(2.0).unwrap(), &vac).unwrap();
        let var = |v: [f64; 4]| {
            let v = DVector::from_row_slice(&v);
            v.dot(&(out.cov() * &v))
        };
        // vacuum variance of X1 -+ X2 is 1
        assert!((var([1.0, 0.0, -1.0, 0.0]) - 4.0).abs() < 1e-14);
        assert!((var([1.0, 0.0, 1.0, 0.0]) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn purity_is_preserved() {
        let thermal = GaussianState::new(DVector::from_vec(vec![0.3, -0.2]), DMatrix::identity(2, 2) * 1.5).unwrap();
        let out = apply_gaussian(&frhad_symplectic1(&params(1.1, 2.0, 0.7)).unwrap(), &thermal).unwrap();
        let before = thermal.symplectic_eigenvalues();
        let after = out.symplectic_eigenvalues();
        assert!((before[0] - 1.5).abs() < 1e-12 && (after[0] - 1.5).abs() < 1e-10);

        let vac = GaussianState::vacuum(4).unwrap();
        let out = apply_gaussian(&frhad_symplectic2(&params(0.9, 1.4, 0.6)).unwrap(), &vac).unwrap();
        for v in out.symplectic_eigenvalues() {
            assert!((v - 0.5).abs() < 1e-10);
        }
        assert!(out.uncertainty_min_eigenvalue() > -1e-12);
    }

    #[test]
    fn error_paths() {
        assert!(matches!(squeezer1_symplectic(-1.0), Err(Error::NonPositiveScale { .. })));
        let bad = GaussianState::new(DVector::zeros(2), DMatrix::identity(2, 2) * 0.3);
        assert!(matches!(bad, Err(Error::UnphysicalState { .. })));
        let vac4 = GaussianState::vacuum(4).unwrap();
        let m2 = frhad_symplectic1(&params(0.2, 1.0, 1.0)).unwrap();
        assert!(matches!(apply_gaussian(&m2, &vac4), Err(Error::SizeMismatch { .. })));
        assert!(SymplecticMap::from_matrix(DMatrix::identity(3, 3)).is_err());
    }
}
