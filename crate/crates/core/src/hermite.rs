//! Hermite functions `h_n(x) = <x|n>` for the `X = (a + a^dag)/sqrt(2)` convention.

use num_complex::Complex64;

use crate::grid::{Grid1D, SampledWavefunction};

/// `h_0 ..= h_nmax` at `x`, by the normalized three-term recurrence.
pub fn hermite_functions(nmax: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(nmax + 1);
    h.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp());
    if nmax >= 1 {
        h.push(std::f64::consts::SQRT_2 * x * h[0]);
    }
    for k in 2..=nmax {
        let kf = k as f64;
        let next = (2.0 / kf).sqrt() * x * h[k - 1] - ((kf - 1.0) / kf).sqrt() * h[k - 2];
        h.push(next);
    }
    h
}

pub fn hermite_function(n: usize, x: f64) -> f64 {
    hermite_functions(n, x)[n]
}

/// Sampled `h_0 ..= h_nmax` on `grid`.
pub fn hermite_basis(nmax: usize, grid: Grid1D) -> Vec<SampledWavefunction> {
    let table: Vec<Vec<f64>> = grid.points().map(|x| hermite_functions(nmax, x)).collect();
    (0..=nmax)
        .map(|n| {
            let values = table.iter().map(|row| Complex64::new(row[n], 0.0)).collect();
            SampledWavefunction::new(grid, values).expect("hermite samples are finite")
        })
        .collect()
}

/// Wavefunction `sum_n c_n h_n(x)` of a Fock-basis vector.
pub fn synthesize(coefficients: &[Complex64], grid: Grid1D) -> SampledWavefunction {
    let nmax = coefficients.len().saturating_sub(1);
    SampledWavefunction::from_fn(grid, |x| {
        hermite_functions(nmax, x).iter().zip(coefficients).map(|(h, c)| c * h).sum()
    })
}
