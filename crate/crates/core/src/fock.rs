//! Single-mode operators in the truncated number basis.
//!
//! The transform is built two ways: from its normally ordered closed form
//! ([`frhad_normal_ordered`]) and from the decomposition
//! `S^-1(nu) e^{i alpha a^dag a} S(mu)` ([`frhad_decomposed`]).
//!
//! Squeezers do not commute with truncation. They are evaluated at a padded
//! working dimension, then cropped, and every operator records a trusted
//! block: the leading indices whose rows and columns keep their weight
//! inside the truncated space. Identities are asserted on that block only.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{column_tail, expm, max_abs_diff_block, real_phase_sandwich};
use crate::params::{check_scale, validate_params, Route, TransformParams};

pub const DEFAULT_DIM: usize = 128;

/// Target leak at the padded working dimension.
const PAD_LEAK: f64 = 1e-12;
/// Hard limit on working-dimension leak before giving up.
const MAX_LEAK: f64 = 1e-8;
const MAX_PAD_FACTOR: usize = 8;
/// Rows at the end of the working space that count as "leaked".
const TAIL_ROWS: usize = 8;
/// Largest summand magnitude tolerated in the normal-ordered products.
const SERIES_LIMIT: f64 = 1e8;

/// Default trusted block size for truncation `n`.
pub fn default_trusted(n: usize) -> usize {
    (n / 4).max(1)
}

/// Operators known in closed form; materialized at whatever size a product needs.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Analytic {
    Identity,
    Annihilation,
    Creation,
    X,
    P,
    /// `e^{i alpha a^dag a}`
    Rotation(f64),
}

impl Analytic {
    fn build(self, dim: usize) -> DMatrix<Complex64> {
        let lower = |k: usize| Complex64::new((k as f64).sqrt(), 0.0);
        match self {
            Analytic::Identity => DMatrix::identity(dim, dim),
            Analytic::Annihilation => DMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { lower(j) } else { Complex64::default() }),
            Analytic::Creation => DMatrix::from_fn(dim, dim, |i, j| if i == j + 1 { lower(i) } else { Complex64::default() }),
            Analytic::X => DMatrix::from_fn(dim, dim, |i, j| {
                if i.abs_diff(j) == 1 {
                    lower(i.max(j)) / SQRT_2
                } else {
                    Complex64::default()
                }
            }),
            // <k-1|P|k> = -i sqrt(k/2), <k|P|k-1> = i sqrt(k/2)
            Analytic::P => DMatrix::from_fn(dim, dim, |i, j| {
                if j == i + 1 {
                    Complex64::new(0.0, -1.0) * lower(j) / SQRT_2
                } else if i == j + 1 {
                    Complex64::new(0.0, 1.0) * lower(i) / SQRT_2
                } else {
                    Complex64::default()
                }
            }),
            Analytic::Rotation(alpha) => DMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    Complex64::from_polar(1.0, alpha * i as f64)
                } else {
                    Complex64::default()
                }
            }),
        }
    }

    fn adjoint(self) -> Analytic {
        match self {
            Analytic::Annihilation => Analytic::Creation,
            Analytic::Creation => Analytic::Annihilation,
            Analytic::Rotation(alpha) => Analytic::Rotation(-alpha),
            other => other,
        }
    }
}

/// How an operator extends beyond its truncation.
#[derive(Debug, Clone, PartialEq)]
enum Working {
    /// Nothing is known beyond the truncated matrix.
    Cropped,
    Analytic(Analytic, Complex64),
    /// Padded matrix; its leading block is the truncated matrix.
    Dense(DMatrix<Complex64>),
}

/// Dense operator in the truncated number basis.
///
/// Operators built from squeezers also keep their padded working matrix, and
/// products are formed at the padded size before cropping, so identities stay
/// accurate on the full trusted block. Operators known in closed form are
/// rebuilt at the size a product needs. Operators created with
/// [`FockOperator::from_matrix`] multiply as plain truncated matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    entries: DMatrix<Complex64>,
    trusted: usize,
    working: Working,
}

impl FockOperator {
    pub fn from_matrix(entries: DMatrix<Complex64>, trusted: usize) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::SizeMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        if trusted == 0 || trusted > entries.nrows() {
            return Err(Error::SizeMismatch { expected: entries.nrows(), found: trusted });
        }
        Ok(FockOperator { entries, trusted, working: Working::Cropped })
    }

    fn analytic(kind: Analytic, n: usize) -> Self {
        FockOperator { entries: kind.build(n), trusted: default_trusted(n), working: Working::Analytic(kind, Complex64::new(1.0, 0.0)) }
    }

    fn from_working(working: DMatrix<Complex64>, n: usize, trusted: usize) -> Self {
        let entries = working.view((0, 0), (n, n)).into_owned();
        FockOperator { entries, trusted, working: Working::Dense(working) }
    }

    pub fn identity(n: usize) -> Self {
        Self::analytic(Analytic::Identity, n)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trusted(&self) -> usize {
        self.trusted
    }

    /// Size of the padded working matrix, if one is kept.
    pub fn working_dim(&self) -> Option<usize> {
        match &self.working {
            Working::Dense(m) => Some(m.nrows()),
            _ => None,
        }
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Same matrix with a smaller (or equal) trusted block.
    pub fn with_trusted(mut self, trusted: usize) -> Self {
        self.trusted = trusted.clamp(1, self.trusted);
        self
    }

    pub fn trusted_block(&self) -> DMatrix<Complex64> {
        self.entries.view((0, 0), (self.trusted, self.trusted)).into_owned()
    }

    pub fn adjoint(&self) -> FockOperator {
        let working = match &self.working {
            Working::Cropped => Working::Cropped,
            Working::Analytic(kind, c) => Working::Analytic(kind.adjoint(), c.conj()),
            Working::Dense(m) => Working::Dense(m.adjoint()),
        };
        FockOperator { entries: self.entries.adjoint(), trusted: self.trusted, working }
    }

    pub fn scale(&self, c: Complex64) -> FockOperator {
        let working = match &self.working {
            Working::Cropped => Working::Cropped,
            Working::Analytic(kind, k) => Working::Analytic(*kind, k * c),
            Working::Dense(m) => Working::Dense(m * c),
        };
        FockOperator { entries: &self.entries * c, trusted: self.trusted, working }
    }

    /// Working matrix at size `dim` (at least the truncation).
    fn working_at(&self, dim: usize) -> Option<DMatrix<Complex64>> {
        match &self.working {
            Working::Cropped => None,
            Working::Analytic(kind, c) => Some(kind.build(dim) * *c),
            Working::Dense(m) => Some(m.view((0, 0), (dim, dim)).into_owned()),
        }
    }

    /// Size at which a binary operation with `other` is carried out, or
    /// `None` when one side only exists truncated.
    fn common_dim(&self, other: &FockOperator) -> Option<usize> {
        assert_eq!(self.dim(), other.dim(), "operators have different truncations");
        match (&self.working, &other.working) {
            (Working::Cropped, _) | (_, Working::Cropped) => None,
            _ => Some(
                [self.working_dim(), other.working_dim()]
                    .into_iter()
                    .flatten()
                    .min()
                    .unwrap_or(2 * self.dim()),
            ),
        }
    }

    fn combine(
        &self,
        other: &FockOperator,
        op: impl Fn(&DMatrix<Complex64>, &DMatrix<Complex64>) -> DMatrix<Complex64>,
    ) -> FockOperator {
        let trusted = self.trusted.min(other.trusted);
        match self.common_dim(other) {
            Some(dim) => {
                let a = self.working_at(dim).expect("working form exists");
                let b = other.working_at(dim).expect("working form exists");
                FockOperator::from_working(op(&a, &b), self.dim(), trusted)
            }
            None => FockOperator { entries: op(&self.entries, &other.entries), trusted, working: Working::Cropped },
        }
    }

    /// `self * op * self^dag`. Only the truncated result is formed, so the
    /// result multiplies as a plain truncated matrix.
    pub fn conjugate(&self, op: &FockOperator) -> FockOperator {
        let trusted = self.trusted.min(op.trusted);
        let n = self.dim();
        let entries = match self.common_dim(op) {
            Some(dim) => {
                let top = self.working_at(dim).expect("working form exists").rows(0, n).into_owned();
                &top * op.working_at(dim).expect("working form exists") * top.adjoint()
            }
            None => &self.entries * &op.entries * self.entries.adjoint(),
        };
        FockOperator { entries, trusted, working: Working::Cropped }
    }

    /// Max deviation from `other` on the common trusted block.
    pub fn trusted_diff(&self, other: &FockOperator) -> f64 {
        let m = self.trusted.min(other.trusted);
        max_abs_diff_block(&self.entries, &other.entries, m, m)
    }

    /// `max |(O^dag O - I)_{mn}|` over the trusted block.
    pub fn unitarity_residual(&self) -> f64 {
        let m = self.trusted;
        let full = match &self.working {
            Working::Dense(w) => w,
            _ => &self.entries,
        };
        let cols = full.columns(0, m);
        let gram = cols.adjoint() * cols;
        (gram - DMatrix::<Complex64>::identity(m, m)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if v.len() != self.dim() {
            return Err(Error::SizeMismatch { expected: self.dim(), found: v.len() });
        }
        Ok(&self.entries * v)
    }

    /// `<v|O|v>`.
    pub fn expectation(&self, v: &DVector<Complex64>) -> Result<Complex64> {
        Ok(v.dotc(&self.apply(v)?))
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;

    fn mul(self, rhs: &FockOperator) -> FockOperator {
        self.combine(rhs, |a, b| a * b)
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;

    fn add(self, rhs: &FockOperator) -> FockOperator {
        self.combine(rhs, |a, b| a + b)
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;

    fn sub(self, rhs: &FockOperator) -> FockOperator {
        self.combine(rhs, |a, b| a - b)
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::SizeTooSmall(n))
    } else {
        Ok(())
    }
}

/// Annihilation, creation and number operators.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub a: FockOperator,
    pub a_dag: FockOperator,
    pub number: FockOperator,
}

pub fn ladder(n: usize) -> Result<Ladder> {
    check_size(n)?;
    let a = FockOperator::analytic(Analytic::Annihilation, n);
    let a_dag = FockOperator::analytic(Analytic::Creation, n);
    // truncated product: exact, since a^dag a never leaves the space
    let number = FockOperator { entries: a_dag.entries() * a.entries(), trusted: default_trusted(n), working: Working::Cropped };
    Ok(Ladder { a, a_dag, number })
}

/// `X = (a + a^dag)/sqrt(2)` and `P = (a - a^dag)/(i sqrt(2))`.
pub fn quadratures(n: usize) -> Result<(FockOperator, FockOperator)> {
    check_size(n)?;
    Ok((FockOperator::analytic(Analytic::X, n), FockOperator::analytic(Analytic::P, n)))
}

/// `e^{i alpha a^dag a}`.
pub fn fractional_op(alpha: f64, n: usize) -> Result<FockOperator> {
    check_size(n)?;
    if !alpha.is_finite() {
        return Err(Error::NonFiniteAngle(alpha));
    }
    Ok(FockOperator::analytic(Analytic::Rotation(alpha), n))
}

/// Mean and symmetrized covariance of `(X, P)` (or `(X1, P1, X2, P2)` for the
/// given operators) in the normalized state `v`.
pub fn moments(ops: &[&DMatrix<Complex64>], v: &DVector<Complex64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let k = ops.len();
    let norm2 = v.norm_squared();
    if norm2 == 0.0 {
        return Err(Error::SizeMismatch { expected: 1, found: 0 });
    }
    let mut images = Vec::with_capacity(k);
    for op in ops {
        if op.ncols() != v.len() {
            return Err(Error::SizeMismatch { expected: op.ncols(), found: v.len() });
        }
        images.push(*op * v);
    }
    let mean = DVector::from_fn(k, |i, _| v.dotc(&images[i]).re / norm2);
    // <{Q_i, Q_j}>/2 = Re <Q_i v | Q_j v> for Hermitian Q
    let cov = DMatrix::from_fn(k, k, |i, j| images[i].dotc(&images[j]).re / norm2 - mean[i] * mean[j]);
    Ok((mean, cov))
}

/// Real squeezer `exp(ln(mu) (a^2 - a^dag^2)/2)` at working dimension `dim`,
/// stored as its even- and odd-parity blocks.
#[derive(Debug, Clone)]
struct ParitySqueezer {
    dim: usize,
    blocks: [DMatrix<f64>; 2],
}

impl ParitySqueezer {
    fn new(mu: f64, dim: usize) -> Self {
        let r = mu.ln();
        let blocks = [0usize, 1].map(|parity| {
            let size = (dim + 1 - parity) / 2;
            let mut g = DMatrix::zeros(size, size);
            for i in 1..size {
                let n = (2 * i + parity) as f64;
                // <n-2| a^2 |n> = sqrt(n (n-1))
                let v = 0.5 * r * (n * (n - 1.0)).sqrt();
                g[(i - 1, i)] = v;
                g[(i, i - 1)] = -v;
            }
            expm(g)
        });
        ParitySqueezer { dim, blocks }
    }

    fn get(&self, row: usize, col: usize) -> f64 {
        if row % 2 != col % 2 {
            0.0
        } else {
            self.blocks[row % 2][(row / 2, col / 2)]
        }
    }

    /// Largest norm in the last few working rows over columns `< cols`.
    fn tail_leak(&self, cols: usize) -> f64 {
        let from = self.dim.saturating_sub(TAIL_ROWS);
        (0..cols)
            .map(|k| {
                let block = &self.blocks[k % 2];
                column_tail(block, k / 2, (from + 1 - k % 2) / 2)
            })
            .fold(0.0, f64::max)
    }

    fn dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }
}

/// Squeezers for every scale in `scales`, sharing a working dimension large
/// enough that the trusted columns of `n` stay away from its edge.
fn padded_squeezers(scales: &[f64], n: usize) -> Result<Vec<ParitySqueezer>> {
    let cols = default_trusted(n);
    let mut dim = 2 * n;
    loop {
        let squeezers: Vec<ParitySqueezer> = scales.iter().map(|&mu| ParitySqueezer::new(mu, dim)).collect();
        let leak = squeezers.iter().map(|s| s.tail_leak(cols)).fold(0.0, f64::max);
        if leak <= PAD_LEAK || dim >= MAX_PAD_FACTOR * n {
            if leak > MAX_LEAK {
                return Err(Error::TruncationLeak { leak, working_dim: dim });
            }
            return Ok(squeezers);
        }
        dim *= 2;
    }
}

/// Checks `S X S^dag = mu X` on the leading block.
fn check_squeezer_sign(s: &ParitySqueezer, mu: f64, block: usize) -> Result<()> {
    let dense = s.dense();
    let x = Analytic::X.build(s.dim).map(|z| z.re);
    let top = dense.rows(0, block).into_owned();
    let conj = &top * &x * top.transpose();
    let residual = (0..block)
        .flat_map(|i| (0..block).map(move |j| (i, j)))
        .map(|(i, j)| (conj[(i, j)] - mu * x[(i, j)]).abs())
        .fold(0.0, f64::max);
    if residual > 1e-8 {
        return Err(Error::ConventionCheck(format!(
            "squeezer does not map X to {mu} X (residual {residual:.3e}); generator sign is wrong"
        )));
    }
    Ok(())
}

/// Single-mode squeezer with `S(mu) X S^-1(mu) = mu X`.
pub fn squeezer1(mu: f64, n: usize) -> Result<FockOperator> {
    check_size(n)?;
    check_scale("mu", mu)?;
    let s = padded_squeezers(&[mu], n)?.remove(0);
    check_squeezer_sign(&s, mu, default_trusted(n))?;
    let working = s.dense().map(|v| Complex64::new(v, 0.0));
    Ok(FockOperator::from_working(working, n, default_trusted(n)))
}

/// `S^-1(nu) e^{i alpha a^dag a} S(mu)`, regular at every angle.
pub fn frhad_decomposed(p: &TransformParams, n: usize) -> Result<FockOperator> {
    check_size(n)?;
    validate_params(p, Route::Fock)?;
    let mut squeezers = padded_squeezers(&[p.mu, p.nu], n)?;
    let s_nu = squeezers.pop().expect("two squeezers");
    let s_mu = squeezers.pop().expect("two squeezers");
    let dim = s_mu.dim;
    // S is real orthogonal, so S^-1(nu) = S(nu)^T; both preserve parity
    let mut working = DMatrix::zeros(dim, dim);
    for parity in 0..2 {
        let phases: Vec<f64> = (0..s_mu.blocks[parity].nrows()).map(|i| p.alpha * (2 * i + parity) as f64).collect();
        let block = real_phase_sandwich(&s_nu.blocks[parity].transpose(), &phases, &s_mu.blocks[parity]);
        for (bi, bj) in (0..block.nrows()).flat_map(|i| (0..block.ncols()).map(move |j| (i, j))) {
            working[(2 * bi + parity, 2 * bj + parity)] = block[(bi, bj)];
        }
    }
    Ok(FockOperator::from_working(working, n, default_trusted(n)))
}

/// Coefficients of the normally ordered form
/// `prefactor * exp(c_plus a^dag^2) * lambda^{a^dag a} * exp(c_minus a^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalOrderFactors {
    pub a: Complex64,
    pub b: Complex64,
    pub u: Complex64,
    pub c_plus: Complex64,
    pub lambda: Complex64,
    pub c_minus: Complex64,
    pub prefactor: Complex64,
}

impl NormalOrderFactors {
    pub fn new(p: &TransformParams) -> Result<Self> {
        validate_params(p, Route::Kernel)?;
        let (s, c) = p.alpha.sin_cos();
        let i = Complex64::i();
        let (mu2, nu2) = (p.mu * p.mu, p.nu * p.nu);
        let a = i * (c / s) + mu2;
        let b = i * (c / s) + nu2;
        let u = Complex64::new(1.0 / (s * s), 0.0) + a * b;
        let c_plus = a * nu2 / u - 0.5;
        let c_minus = b * mu2 / u - 0.5;
        let lambda = i * 2.0 * p.mu * p.nu / (u * s);
        // principal branch; agrees with <0|S^-1(nu) e^{i alpha n} S(mu)|0> for every alpha
        let prefactor = (Complex64::from_polar(2.0 * p.mu * p.nu, FRAC_PI_2 - p.alpha) / (u * s)).sqrt();
        Ok(NormalOrderFactors { a, b, u, c_plus, lambda, c_minus, prefactor })
    }
}

/// Lower-triangular `exp(c a^dag^2)`; each entry is a single series term.
fn squeeze_series(c: Complex64, n: usize) -> Result<DMatrix<Complex64>> {
    let mut e = DMatrix::zeros(n, n);
    for col in 0..n {
        let mut term = Complex64::new(1.0, 0.0);
        e[(col, col)] = term;
        let mut k = 1;
        while col + 2 * k < n {
            let top = (col + 2 * k) as f64;
            term *= c * (top * (top - 1.0)).sqrt() / k as f64;
            let magnitude = term.norm();
            if !magnitude.is_finite() || magnitude > 1e150 {
                return Err(Error::SeriesOverflow { magnitude });
            }
            e[(col + 2 * k, col)] = term;
            k += 1;
        }
    }
    Ok(e)
}

/// The transform from its normally ordered closed form.
pub fn frhad_normal_ordered(p: &TransformParams, n: usize) -> Result<FockOperator> {
    check_size(n)?;
    let f = NormalOrderFactors::new(p)?;
    let raise = squeeze_series(f.c_plus, n)?;
    let lower = squeeze_series(f.c_minus, n)?.transpose();
    let powers: Vec<Complex64> = (0..n).map(|k| f.lambda.powu(k as u32)).collect();

    let trusted = default_trusted(n);
    let mut worst = 0.0f64;
    for m in 0..trusted {
        for k in 0..trusted {
            let s: f64 = (0..=m.min(k)).map(|j| (raise[(m, j)] * powers[j] * lower[(j, k)]).norm()).sum();
            worst = worst.max(s);
        }
    }
    if worst > SERIES_LIMIT {
        return Err(Error::SeriesOverflow { magnitude: worst });
    }

    let mut scaled_lower = lower;
    for (j, mut row) in scaled_lower.row_iter_mut().enumerate() {
        row *= powers[j];
    }
    let entries = (raise * scaled_lower) * f.prefactor;
    if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::SeriesOverflow { magnitude: f64::INFINITY });
    }
    Ok(FockOperator { entries, trusted, working: Working::Cropped })
}
