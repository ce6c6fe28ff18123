//! Uniform 1-D grids and sampled wavefunctions.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!("need finite x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("need at least {MIN_POINTS} points, got {n}")));
        }
        Ok(Grid1D { x_min, x_max, n })
    }

    /// Symmetric grid `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        // endpoints exact, so x -> -x maps a symmetric grid onto itself
        if k + 1 == self.n {
            self.x_max
        } else {
            self.x_min + k as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.point(k))
    }

    /// Largest `|x|` on the grid.
    pub fn max_abs(&self) -> f64 {
        self.x_min.abs().max(self.x_max.abs())
    }

    /// Index range excluding `margin` (fraction of points) at each end.
    pub fn interior(&self, margin: f64) -> std::ops::Range<usize> {
        let skip = ((self.n as f64) * margin).floor() as usize;
        skip..self.n - skip
    }

    /// Index of the grid point nearest to `x`, if `x` lies on the grid span.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        if x < self.x_min || x > self.x_max {
            return None;
        }
        Some((((x - self.x_min) / self.spacing()).round() as usize).min(self.n - 1))
    }
}

/// Complex samples of a wavefunction on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWavefunction {
    grid: Grid1D,
    values: Vec<Complex64>,
}

impl SampledWavefunction {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch { expected: grid.len(), found: values.len() });
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidGrid("wavefunction samples must be finite".into()));
        }
        Ok(SampledWavefunction { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().map(f).collect();
        SampledWavefunction { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SampledWavefunction { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// `a * self + b * other` on a common grid.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(SampledWavefunction { grid: self.grid, values })
    }

    /// Samples at `-x` (exact reflection on a symmetric grid).
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        SampledWavefunction { grid: self.grid, values }
    }

    /// Largest pointwise deviation restricted to `range`.
    pub fn max_abs_diff(&self, other: &Self, range: std::ops::Range<usize>) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(range.map(|k| (self.values[k] - other.values[k]).norm()).fold(0.0, f64::max))
    }

    /// Grid-weighted L2 distance.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        let d = self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))?;
        Ok(d.norm())
    }
}

/// Riemann-sum inner product `sum_k dx * conj(f_k) * g_k`.
pub fn l2_inner(f: &SampledWavefunction, g: &SampledWavefunction) -> Result<Complex64> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let s: Complex64 = f.values.iter().zip(&g.values).map(|(a, b)| a.conj() * b).sum();
    Ok(s * f.grid.spacing())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::hermite_function;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(1.0, 0.0, 32).is_err());
        assert!(Grid1D::new(0.0, 1.0, 15).is_err());
        assert!(Grid1D::new(f64::NAN, 1.0, 32).is_err());
        let g = Grid1D::new(-1.0, 1.0, 21).unwrap();
        assert!((g.spacing() - 0.1).abs() < 1e-15);
        assert_eq!(g.point(20), 1.0);
        assert_eq!(g.interior(0.1), 2..19);
        assert_eq!(g.nearest_index(0.0), Some(10));
        assert_eq!(g.nearest_index(1.5), None);
    }

    #[test]
    fn ground_state_has_unit_norm() {
        let g = Grid1D::symmetric(10.0, 512).unwrap();
        let f = SampledWavefunction::from_fn(g, |x| c((-x * x / 2.0).exp() / std::f64::consts::PI.powf(0.25)));
        let ip = l2_inner(&f, &f).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-10 && ip.im.abs() < 1e-15);
    }

    #[test]
    fn parity_orthogonality() {
        let g = Grid1D::symmetric(10.0, 512).unwrap();
        let h0 = SampledWavefunction::from_fn(g, |x| c(hermite_function(0, x)));
        let h1 = SampledWavefunction::from_fn(g, |x| c(hermite_function(1, x)));
        assert!(l2_inner(&h0, &h1).unwrap().norm() < 1e-10);
    }

    #[test]
    fn odd_gaussian_matches_quadrature_oracle() {
        // adaptive quadrature of x^2 exp(-x^2) over [-10, 10] (30 digits)
        const ORACLE: f64 = 0.886226925452758013649083741671;
        let g = Grid1D::symmetric(10.0, 512).unwrap();
        let f = SampledWavefunction::from_fn(g, |x| c(x * (-x * x / 2.0).exp()));
        let ip = l2_inner(&f, &f).unwrap();
        assert!((ip.re - ORACLE).abs() < 1e-10, "{}", ip.re);
        assert_eq!(ip.im, 0.0);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = SampledWavefunction::from_fn(Grid1D::symmetric(1.0, 16).unwrap(), |_| c(1.0));
        let b = SampledWavefunction::from_fn(Grid1D::symmetric(2.0, 16).unwrap(), |_| c(1.0));
        assert_eq!(l2_inner(&a, &b), Err(Error::GridMismatch));
    }

    #[test]
    fn sample_count_must_match() {
        let g = Grid1D::symmetric(1.0, 16).unwrap();
        assert!(matches!(
            SampledWavefunction::new(g, vec![c(0.0); 3]),
            Err(Error::SizeMismatch { expected: 16, found: 3 })
        ));
    }
}
