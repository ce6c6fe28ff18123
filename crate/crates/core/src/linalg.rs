use nalgebra::DMatrix;
use num_complex::Complex64;

/// Matrix exponential of a real square matrix.
pub(crate) fn expm(m: DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return m;
    }
    m.exp()
}

/// `left * diag(e^{i phases}) * right` for real `left`, `right`.
pub(crate) fn real_phase_sandwich(left: &DMatrix<f64>, phases: &[f64], right: &DMatrix<f64>) -> DMatrix<Complex64> {
    let mut cos_right = right.clone();
    let mut sin_right = right.clone();
    for (i, &ph) in phases.iter().enumerate() {
        let (s, c) = ph.sin_cos();
        cos_right.row_mut(i).scale_mut(c);
        sin_right.row_mut(i).scale_mut(s);
    }
    let re = left * cos_right;
    let im = left * sin_right;
    re.zip_map(&im, Complex64::new)
}

/// Largest entrywise deviation between the leading `rows x cols` blocks.
pub(crate) fn max_abs_diff_block(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, rows: usize, cols: usize) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..cols {
        for i in 0..rows {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// Norm of rows `from..` in column `col`.
pub(crate) fn column_tail(m: &DMatrix<f64>, col: usize, from: usize) -> f64 {
    (from..m.nrows()).map(|i| m[(i, col)].powi(2)).sum::<f64>().sqrt()
}

/// Least-squares coefficients `c` minimizing `||target - sum_k c_k basis_k||_F`
/// over complex matrices of equal shape.
pub(crate) fn fit_coefficients(target: &DMatrix<Complex64>, basis: &[DMatrix<Complex64>]) -> Vec<Complex64> {
    let k = basis.len();
    let gram = DMatrix::from_fn(k, k, |i, j| basis[i].dotc(&basis[j]));
    let rhs = nalgebra::DVector::from_fn(k, |i, _| basis[i].dotc(target));
    let sol = gram.lu().solve(&rhs).expect("fit basis is linearly independent");
    sol.iter().copied().collect()
}
