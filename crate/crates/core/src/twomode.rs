//! Two modes in the entangled-state representation.
//!
//! `|eta>` (with `eta = eta1 + i eta2`) is the common eigenvector of the
//! relative position `X1 - X2` and the total momentum `P1 + P2`:
//!
//! ```text
//! |eta> = exp(-|eta|^2/2 + eta a1^dag - eta* a2^dag + a1^dag a2^dag) |00>,
//! ```
//!
//! complete under the measure `d^2 eta / pi`. With that measure the
//! transform kernel in the eta plane is exactly the product of two
//! single-mode kernels, one along `eta1` and one along `eta2`, so it is applied
//! as two 1-D matrix multiplications.
//!
//! Fock-space operators use the composite index `n1 * N + n2` (mode 1 major).
//! The two-mode squeezer conserves `n1 - n2`, so it is exponentiated one
//! difference sector at a time, padded, then cropped to `N` per mode.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::hermite::hermite_functions;
use crate::kernel1d::{frht_kernel, KernelMatrix};
use crate::linalg::{expm, real_phase_sandwich};
use crate::params::{check_scale, validate_params, Route, TransformParams};

/// Default per-mode truncation.
pub const DEFAULT_MODE_DIM: usize = 32;

const PAD_LEAK: f64 = 1e-12;
const MAX_LEAK: f64 = 1e-8;
const MAX_PAD_FACTOR: usize = 8;
const TAIL_ROWS: usize = 4;
/// Factorials are accumulated directly up to this index, in logs beyond.
const DIRECT_FACTORIAL_MAX: usize = 32;

/// Largest trusted total photon number for per-mode truncation `n`.
pub fn default_max_total(n: usize) -> usize {
    (n / 4).max(1)
}

/// Composite index of `|n1, n2>`.
pub fn index(n: usize, n1: usize, n2: usize) -> usize {
    n1 * n + n2
}

/// Composite indices with `n1 + n2 <= max_total`, in index order.
pub fn trusted_indices(n: usize, max_total: usize) -> Vec<usize> {
    (0..n * n).filter(|k| k / n + k % n <= max_total).collect()
}

/// How an operator extends beyond the per-mode truncation.
#[derive(Debug, Clone, PartialEq)]
enum Working {
    Cropped,
    /// `sum_k c_k Q_k` over `(X1, P1, X2, P2)`.
    Quadratures([Complex64; 4]),
    /// Blocks of an operator conserving `n1 - n2`, at per-mode size `dim`;
    /// block `d` (for `|d| < keep`) has size `dim - |d|`.
    Sectors { dim: usize, keep: usize, blocks: Vec<DMatrix<Complex64>> },
}

impl Working {
    fn block(&self, d: isize) -> Option<&DMatrix<Complex64>> {
        match self {
            Working::Sectors { keep, blocks, .. } if d.unsigned_abs() < *keep => {
                Some(&blocks[(d + *keep as isize - 1) as usize])
            }
            _ => None,
        }
    }

    fn sector_dim(&self) -> Option<usize> {
        match self {
            Working::Sectors { dim, .. } => Some(*dim),
            _ => None,
        }
    }
}

/// Dense operator on two truncated modes, composite index `n1 * N + n2`.
///
/// Squeezer-built operators also keep padded per-sector blocks; trusted-block
/// products, conjugations and unitarity are then evaluated at the padded size,
/// where the trusted columns have no weight at the edge. Operators from
/// [`TwoModeFockOperator::from_matrix`] are treated as plain truncated matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeFockOperator {
    n: usize,
    entries: DMatrix<Complex64>,
    max_total: usize,
    working: Working,
}

/// `(n1, n2)` of the composite index `k`.
fn split(n: usize, k: usize) -> (usize, usize) {
    (k / n, k % n)
}

fn sector_of(n1: usize, n2: usize) -> (isize, usize) {
    (n1 as isize - n2 as isize, n1.min(n2))
}

impl TwoModeFockOperator {
    pub fn from_matrix(n: usize, entries: DMatrix<Complex64>, max_total: usize) -> Result<Self> {
        check_size(n)?;
        if entries.nrows() != n * n || entries.ncols() != n * n {
            return Err(Error::SizeMismatch { expected: n * n, found: entries.nrows() });
        }
        Ok(TwoModeFockOperator { n, entries, max_total: max_total.min(2 * (n - 1)), working: Working::Cropped })
    }

    fn from_sectors(n: usize, dim: usize, blocks: Vec<DMatrix<Complex64>>) -> Self {
        let keep = blocks.len().div_ceil(2);
        let working = Working::Sectors { dim, keep, blocks };
        let entries = assemble(n, |d| working.block(d).expect("sector kept").clone());
        TwoModeFockOperator { n, entries, max_total: default_max_total(n), working }
    }

    /// Per-mode truncation.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Trusted block: total photon number `<= max_total`.
    pub fn max_total(&self) -> usize {
        self.max_total
    }

    /// Per-mode size of the padded sector blocks, if kept.
    pub fn working_dim(&self) -> Option<usize> {
        self.working.sector_dim()
    }

    pub fn trusted_indices(&self) -> Vec<usize> {
        trusted_indices(self.n, self.max_total)
    }

    pub fn adjoint(&self) -> Self {
        let working = match &self.working {
            Working::Cropped => Working::Cropped,
            // quadratures are Hermitian
            Working::Quadratures(c) => Working::Quadratures(c.map(|z| z.conj())),
            Working::Sectors { dim, keep, blocks } => {
                Working::Sectors { dim: *dim, keep: *keep, blocks: blocks.iter().map(|b| b.adjoint()).collect() }
            }
        };
        TwoModeFockOperator { n: self.n, entries: self.entries.adjoint(), max_total: self.max_total, working }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let working = match &self.working {
            Working::Cropped => Working::Cropped,
            Working::Quadratures(q) => Working::Quadratures(q.map(|z| z * c)),
            Working::Sectors { dim, keep, blocks } => {
                Working::Sectors { dim: *dim, keep: *keep, blocks: blocks.iter().map(|b| b * c).collect() }
            }
        };
        TwoModeFockOperator { n: self.n, entries: &self.entries * c, max_total: self.max_total, working }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let working = match (&self.working, &other.working) {
            (Working::Quadratures(a), Working::Quadratures(b)) => {
                Working::Quadratures([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
            }
            _ => Working::Cropped,
        };
        Ok(TwoModeFockOperator {
            n: self.n,
            entries: &self.entries + &other.entries,
            max_total: self.max_total.min(other.max_total),
            working,
        })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    fn common(&self, other: &Self) -> Result<Vec<usize>> {
        self.check_same(other)?;
        Ok(trusted_indices(self.n, self.max_total.min(other.max_total)))
    }

    /// Trusted block of this operator.
    pub fn trusted_block(&self) -> DMatrix<Complex64> {
        let idx = self.trusted_indices();
        self.entries.select_rows(&idx).select_columns(&idx)
    }

    /// Trusted block of `self * other`.
    pub fn product_block(&self, other: &Self) -> Result<DMatrix<Complex64>> {
        let idx = self.common(other)?;
        if let (Some(da), Some(db)) = (self.working.sector_dim(), other.working.sector_dim()) {
            let dim = da.min(db);
            return Ok(self.sector_block(&idx, |d, i, j| {
                let (a, b) = (self.working.block(d)?, other.working.block(d)?);
                let size = dim - d.unsigned_abs();
                Some((0..size).map(|k| a[(i, k)] * b[(k, j)]).sum())
            }));
        }
        Ok(self.entries.select_rows(&idx) * other.entries.select_columns(&idx))
    }

    /// `f(d, m_row, m_col)` on pairs of trusted indices sharing a sector, zero elsewhere.
    fn sector_block(&self, idx: &[usize], f: impl Fn(isize, usize, usize) -> Option<Complex64>) -> DMatrix<Complex64> {
        let n = self.n;
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| {
            let (dr, mr) = sector_of(split(n, idx[r]).0, split(n, idx[r]).1);
            let (dc, mc) = sector_of(split(n, idx[c]).0, split(n, idx[c]).1);
            if dr != dc {
                Complex64::default()
            } else {
                f(dr, mr, mc).unwrap_or_default()
            }
        })
    }

    /// Trusted block of `self * op * self^dag`.
    pub fn conjugate_block(&self, op: &Self) -> Result<DMatrix<Complex64>> {
        let idx = self.common(op)?;
        if let (Some(dim), Working::Quadratures(c)) = (self.working.sector_dim(), &op.working) {
            let n = self.n;
            // v_t = (self^dag)|t>, as an amplitude table over (n1, n2) < dim
            let columns: Vec<DMatrix<Complex64>> = idx
                .iter()
                .map(|&t| {
                    let (d, m) = sector_of(split(n, t).0, split(n, t).1);
                    let block = self.working.block(d).expect("trusted sector kept");
                    let mut v = DMatrix::zeros(dim, dim);
                    for k in 0..block.ncols() {
                        let (a, b) = sector_state(d, k);
                        v[(a, b)] = block[(m, k)].conj();
                    }
                    v
                })
                .collect();
            let images: Vec<DMatrix<Complex64>> = columns.iter().map(|v| apply_quadratures(c, v)).collect();
            // <t|self op self^dag|t'> = <v_t| op v_t'>
            return Ok(DMatrix::from_fn(idx.len(), idx.len(), |r, s| columns[r].dotc(&images[s])));
        }
        let top = self.entries.select_rows(&idx);
        Ok(&top * &op.entries * top.adjoint())
    }

    /// `max |(O^dag O - I)|` over the trusted block.
    pub fn unitarity_residual(&self) -> f64 {
        let idx = self.trusted_indices();
        let gram = if self.working.sector_dim().is_some() {
            self.sector_block(&idx, |d, i, j| {
                let b = self.working.block(d)?;
                Some(b.column(i).dotc(&b.column(j)))
            })
        } else {
            let cols = self.entries.select_columns(&idx);
            cols.adjoint() * &cols
        };
        max_norm(&(gram - DMatrix::identity(idx.len(), idx.len())))
    }

    /// Max deviation from `other` on the common trusted block.
    pub fn trusted_diff(&self, other: &Self) -> Result<f64> {
        let idx = self.common(other)?;
        let a = self.entries.select_rows(&idx).select_columns(&idx);
        let b = other.entries.select_rows(&idx).select_columns(&idx);
        Ok(max_norm(&(a - b)))
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if v.len() != self.entries.ncols() {
            return Err(Error::SizeMismatch { expected: self.entries.ncols(), found: v.len() });
        }
        Ok(&self.entries * v)
    }
}

/// `sum_k c_k Q_k v` for an amplitude table `v[(n1, n2)]`.
fn apply_quadratures(c: &[Complex64; 4], v: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let dim = v.nrows();
    let s2 = std::f64::consts::SQRT_2;
    let i = Complex64::i();
    let mut out = DMatrix::zeros(dim, dim);
    for n1 in 0..dim {
        for n2 in 0..dim {
            // a v and a^dag v for each mode
            let lower1 = if n1 + 1 < dim { v[(n1 + 1, n2)] * ((n1 + 1) as f64).sqrt() } else { Complex64::default() };
            let raise1 = if n1 > 0 { v[(n1 - 1, n2)] * (n1 as f64).sqrt() } else { Complex64::default() };
            let lower2 = if n2 + 1 < dim { v[(n1, n2 + 1)] * ((n2 + 1) as f64).sqrt() } else { Complex64::default() };
            let raise2 = if n2 > 0 { v[(n1, n2 - 1)] * (n2 as f64).sqrt() } else { Complex64::default() };
            out[(n1, n2)] = c[0] * (lower1 + raise1) / s2
                + c[1] * (lower1 - raise1) / (i * s2)
                + c[2] * (lower2 + raise2) / s2
                + c[3] * (lower2 - raise2) / (i * s2);
        }
    }
    out
}

pub(crate) fn max_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::SizeTooSmall(n))
    } else {
        Ok(())
    }
}

/// `(X1, P1, X2, P2)` on the two-mode truncated space.
pub fn quadratures2(n: usize) -> Result<[TwoModeFockOperator; 4]> {
    check_size(n)?;
    let (x, p) = crate::fock::quadratures(n)?;
    let id = DMatrix::<Complex64>::identity(n, n);
    let max_total = default_max_total(n);
    let wrap = |m: DMatrix<Complex64>, k: usize| {
        let mut c = [Complex64::default(); 4];
        c[k] = Complex64::new(1.0, 0.0);
        TwoModeFockOperator { n, entries: m, max_total, working: Working::Quadratures(c) }
    };
    Ok([
        wrap(x.entries().kronecker(&id), 0),
        wrap(p.entries().kronecker(&id), 1),
        wrap(id.kronecker(x.entries()), 2),
        wrap(id.kronecker(p.entries()), 3),
    ])
}

/// `e^{i alpha (n1 + n2)}`.
pub fn rotation2_op(alpha: f64, n: usize) -> Result<TwoModeFockOperator> {
    check_size(n)?;
    if !alpha.is_finite() {
        return Err(Error::NonFiniteAngle(alpha));
    }
    let dim = 2 * n;
    let blocks = (0..2 * n - 1)
        .map(|s| {
            let d = (s as isize - (n as isize - 1)).unsigned_abs();
            DMatrix::from_fn(dim - d, dim - d, |i, j| {
                if i == j {
                    Complex64::from_polar(1.0, alpha * (2 * i + d) as f64)
                } else {
                    Complex64::default()
                }
            })
        })
        .collect();
    Ok(TwoModeFockOperator::from_sectors(n, dim, blocks))
}

/// `exp(ln(mu) (a1^dag a2^dag - a1 a2))` restricted to each sector
/// `d = n1 - n2`, at per-mode working dimension `dim`. Sector state `m` is
/// `|m + max(d,0), m + max(-d,0)>`.
#[derive(Debug, Clone)]
struct SectorSqueezer {
    dim: usize,
    /// Indexed by `d + (keep - 1)` for `|d| < keep`.
    sectors: Vec<DMatrix<f64>>,
    keep: usize,
}

impl SectorSqueezer {
    fn new(mu: f64, dim: usize, keep: usize) -> Self {
        let r = mu.ln();
        let sectors = (0..2 * keep - 1)
            .map(|s| {
                let d = (s as isize - (keep as isize - 1)).unsigned_abs();
                let size = dim - d;
                let mut g = DMatrix::zeros(size, size);
                for m in 0..size - 1 {
                    let v = r * (((m + d + 1) * (m + 1)) as f64).sqrt();
                    g[(m + 1, m)] = v;
                    g[(m, m + 1)] = -v;
                }
                expm(g)
            })
            .collect();
        SectorSqueezer { dim, sectors, keep }
    }

    fn sector(&self, d: isize) -> &DMatrix<f64> {
        &self.sectors[(d + self.keep as isize - 1) as usize]
    }

    /// Largest weight in the last sector rows over trusted columns.
    fn tail_leak(&self, max_total: usize) -> f64 {
        let mut worst = 0.0f64;
        for d in -(self.keep as isize - 1)..self.keep as isize {
            let ad = d.unsigned_abs();
            let block = self.sector(d);
            let size = block.nrows();
            for m in (0..size).take_while(|m| 2 * m + ad <= max_total) {
                let tail: f64 = (size.saturating_sub(TAIL_ROWS)..size).map(|i| block[(i, m)].powi(2)).sum();
                worst = worst.max(tail.sqrt());
            }
        }
        worst
    }
}

fn sector_state(d: isize, m: usize) -> (usize, usize) {
    if d >= 0 {
        (m + d as usize, m)
    } else {
        (m, m + d.unsigned_abs())
    }
}

fn padded_sector_squeezers(scales: &[f64], n: usize) -> Result<Vec<SectorSqueezer>> {
    let max_total = default_max_total(n);
    let mut dim = 2 * n;
    loop {
        let sq: Vec<SectorSqueezer> = scales.iter().map(|&mu| SectorSqueezer::new(mu, dim, n)).collect();
        let leak = sq.iter().map(|s| s.tail_leak(max_total)).fold(0.0, f64::max);
        if leak <= PAD_LEAK || dim >= MAX_PAD_FACTOR * n {
            if leak > MAX_LEAK {
                return Err(Error::TruncationLeak { leak, working_dim: dim });
            }
            return Ok(sq);
        }
        dim *= 2;
    }
}

/// Crops sector blocks (given at the working dimension) to per-mode `n`.
fn assemble(n: usize, block: impl Fn(isize) -> DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut entries = DMatrix::zeros(n * n, n * n);
    for d in -(n as isize - 1)..n as isize {
        let b = block(d);
        let size = n - d.unsigned_abs();
        for i in 0..size {
            let (r1, r2) = sector_state(d, i);
            for j in 0..size {
                let (c1, c2) = sector_state(d, j);
                entries[(index(n, r1, r2), index(n, c1, c2))] = b[(i, j)];
            }
        }
    }
    entries
}

/// Two-mode squeezer: `S2(mu) (X1 - X2) S2^-1(mu) = mu (X1 - X2)`.
pub fn squeezer2(mu: f64, n: usize) -> Result<TwoModeFockOperator> {
    check_size(n)?;
    check_scale("mu", mu)?;
    let s = padded_sector_squeezers(&[mu], n)?.remove(0);
    // S2(mu)|00> = sum_k tanh^k(r) / cosh(r) |kk>
    let r = mu.ln();
    let vacuum_column = s.sector(0).column(0);
    for k in 0..=5.min(s.dim - 1) {
        let expected = r.tanh().powi(k as i32) / r.cosh();
        if (vacuum_column[k] - expected).abs() > 1e-8 {
            return Err(Error::ConventionCheck(format!(
                "two-mode squeezed vacuum amplitude <{k}{k}|S2|00> = {} instead of {expected}",
                vacuum_column[k]
            )));
        }
    }
    let blocks = s.sectors.iter().map(|b| b.map(|v| Complex64::new(v, 0.0))).collect();
    Ok(TwoModeFockOperator::from_sectors(n, s.dim, blocks))
}

/// `S2^-1(nu) e^{i alpha (n1 + n2)} S2(mu)`.
pub fn frhad2_decomposed(p: &TransformParams, n: usize) -> Result<TwoModeFockOperator> {
    check_size(n)?;
    validate_params(p, Route::Fock)?;
    let sq = padded_sector_squeezers(&[p.mu, p.nu], n)?;
    let (s_mu, s_nu) = (&sq[0], &sq[1]);
    let blocks = (0..2 * n - 1)
        .map(|s| {
            let d = s as isize - (n as isize - 1);
            let b_mu = s_mu.sector(d);
            let phases: Vec<f64> = (0..b_mu.nrows()).map(|m| p.alpha * (2 * m + d.unsigned_abs()) as f64).collect();
            real_phase_sandwich(&s_nu.sector(d).transpose(), &phases, b_mu)
        })
        .collect();
    Ok(TwoModeFockOperator::from_sectors(n, s_mu.dim, blocks))
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|v| (v as f64).ln()).sum()
}

/// `<n1, n2 | eta>` by the finite expansion of the defining exponential.
pub fn eta_overlap(n1: usize, n2: usize, eta: Complex64) -> Complex64 {
    let gauss = (-0.5 * eta.norm_sqr()).exp();
    let minus_conj = -eta.conj();
    let sum: Complex64 = if n1.max(n2) <= DIRECT_FACTORIAL_MAX {
        let fact: Vec<f64> = std::iter::once(1.0)
            .chain((1..=n1.max(n2)).scan(1.0, |acc, v| {
                *acc *= v as f64;
                Some(*acc)
            }))
            .collect();
        (0..=n1.min(n2))
            .map(|k| {
                let c = (fact[n1] * fact[n2]).sqrt() / (fact[n1 - k] * fact[n2 - k] * fact[k]);
                eta.powu((n1 - k) as u32) * minus_conj.powu((n2 - k) as u32) * c
            })
            .sum()
    } else {
        (0..=n1.min(n2))
            .map(|k| {
                let ln_c = 0.5 * (ln_factorial(n1) + ln_factorial(n2))
                    - ln_factorial(n1 - k)
                    - ln_factorial(n2 - k)
                    - ln_factorial(k);
                let powers = eta.powu((n1 - k) as u32) * minus_conj.powu((n2 - k) as u32);
                powers * ln_c.exp()
            })
            .sum()
    };
    sum * gauss
}

/// `<n1, n2 | eta>` for all `n1, n2 < size`, from the ladder relations
/// `sqrt(n1) <n1,n2|eta> = eta <n1-1,n2|eta> + sqrt(n2) <n1-1,n2-1|eta>` and
/// `sqrt(n2) <0,n2|eta> = -eta* <0,n2-1|eta>`.
pub fn overlap_table(size: usize, eta: Complex64) -> DMatrix<Complex64> {
    let mut t = DMatrix::zeros(size, size);
    if size == 0 {
        return t;
    }
    t[(0, 0)] = Complex64::new((-0.5 * eta.norm_sqr()).exp(), 0.0);
    for n2 in 1..size {
        t[(0, n2)] = -eta.conj() * t[(0, n2 - 1)] / (n2 as f64).sqrt();
    }
    for n1 in 1..size {
        let s1 = (n1 as f64).sqrt();
        t[(n1, 0)] = eta * t[(n1 - 1, 0)] / s1;
        for n2 in 1..size {
            t[(n1, n2)] = (eta * t[(n1 - 1, n2)] + (n2 as f64).sqrt() * t[(n1 - 1, n2 - 1)]) / s1;
        }
    }
    t
}

/// Uniform grid on the eta plane; axis 0 is `eta1 = Re eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaGrid {
    re_axis: Grid1D,
    im_axis: Grid1D,
}

impl EtaGrid {
    pub fn new(re_axis: Grid1D, im_axis: Grid1D) -> Self {
        EtaGrid { re_axis, im_axis }
    }

    /// `[-half, half]^2` with `n` points per axis.
    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        let g = Grid1D::symmetric(half_width, n)?;
        Ok(EtaGrid { re_axis: g, im_axis: g })
    }

    pub fn re_axis(&self) -> &Grid1D {
        &self.re_axis
    }

    pub fn im_axis(&self) -> &Grid1D {
        &self.im_axis
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.re_axis.len(), self.im_axis.len())
    }

    /// `d^2 eta = d eta1 * d eta2`.
    pub fn area_element(&self) -> f64 {
        self.re_axis.spacing() * self.im_axis.spacing()
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re_axis.point(i), self.im_axis.point(j))
    }
}

/// `f(eta) = <eta|f>` sampled on an [`EtaGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeWavefunction {
    grid: EtaGrid,
    values: DMatrix<Complex64>,
}

impl TwoModeWavefunction {
    pub fn new(grid: EtaGrid, values: DMatrix<Complex64>) -> Result<Self> {
        if values.shape() != grid.shape() {
            return Err(Error::SizeMismatch { expected: grid.shape().0 * grid.shape().1, found: values.len() });
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidGrid("non-finite sample".into()));
        }
        Ok(TwoModeWavefunction { grid, values })
    }

    pub fn from_fn(grid: EtaGrid, f: impl Fn(Complex64) -> Complex64) -> Self {
        let (n1, n2) = grid.shape();
        let values = DMatrix::from_fn(n1, n2, |i, j| f(grid.point(i, j)));
        TwoModeWavefunction { grid, values }
    }

    pub fn grid(&self) -> &EtaGrid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<Complex64> {
        &self.values
    }

    /// `<self|other>` under `d^2 eta / pi`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.values.dotc(&other.values) * (self.grid.area_element() / PI))
    }

    pub fn norm(&self) -> f64 {
        (self.values.norm_squared() * self.grid.area_element() / PI).sqrt()
    }

    /// `f(-eta)`.
    pub fn reflected(&self) -> Self {
        let (n1, n2) = self.grid.shape();
        let values = DMatrix::from_fn(n1, n2, |i, j| self.values[(n1 - 1 - i, n2 - 1 - j)]);
        TwoModeWavefunction { grid: self.grid, values }
    }

    /// Largest deviation over the interior, excluding `margin` (fraction of
    /// points) at each edge of each axis.
    pub fn max_abs_diff(&self, other: &Self, margin: f64) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut worst = 0.0f64;
        for i in self.grid.re_axis.interior(margin) {
            for j in self.grid.im_axis.interior(margin) {
                worst = worst.max((self.values[(i, j)] - other.values[(i, j)]).norm());
            }
        }
        Ok(worst)
    }
}

/// Two-mode kernel value `<eta'|H|eta>` with respect to `d^2 eta / pi`.
pub fn eta_kernel_value(p: &TransformParams, eta_out: Complex64, eta_in: Complex64) -> Result<Complex64> {
    validate_params(p, Route::Kernel)?;
    let (s, c) = p.alpha.sin_cos();
    let (mu, nu) = (p.mu, p.nu);
    let prefactor = Complex64::from_polar(1.0 / (2.0 * mu * nu * s), FRAC_PI_2 - p.alpha);
    let chirp = -(eta_out.norm_sqr() / (nu * nu) + eta_in.norm_sqr() / (mu * mu)) * c / (2.0 * s);
    let cross = (eta_out.conj() * eta_in).re / (mu * nu * s);
    Ok(prefactor * Complex64::from_polar(1.0, chirp + cross))
}

/// Eta-plane kernel in factorized form: one 1-D kernel per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaKernel {
    grid: EtaGrid,
    along_re: KernelMatrix,
    along_im: KernelMatrix,
}

pub fn eta_kernel(p: &TransformParams, grid: EtaGrid) -> Result<EtaKernel> {
    Ok(EtaKernel {
        grid,
        along_re: frht_kernel(p, grid.re_axis, grid.re_axis)?,
        along_im: frht_kernel(p, grid.im_axis, grid.im_axis)?,
    })
}

impl EtaKernel {
    pub fn grid(&self) -> &EtaGrid {
        &self.grid
    }

    pub fn along_re(&self) -> &KernelMatrix {
        &self.along_re
    }

    pub fn along_im(&self) -> &KernelMatrix {
        &self.along_im
    }

    /// `K_re F K_im^T`; the quadrature weights sit in the 1-D factors.
    pub fn apply(&self, f: &TwoModeWavefunction) -> Result<TwoModeWavefunction> {
        if f.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.along_re.entries() * &f.values * self.along_im.entries().transpose();
        TwoModeWavefunction::new(self.grid, values)
    }

    /// Dense `(n1 n2) x (n1 n2)` matrix, index `i * n2 + j`.
    pub fn dense(&self) -> DMatrix<Complex64> {
        self.along_re.entries().kronecker(self.along_im.entries())
    }

    /// Unitarity defect on the span of `basis` (see [`KernelMatrix::unitarity_residual`]).
    pub fn unitarity_residual(&self, basis: &[TwoModeWavefunction]) -> Result<f64> {
        let images = basis.iter().map(|b| self.apply(b)).collect::<Result<Vec<_>>>()?;
        let mut worst = 0.0f64;
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let before = basis[i].inner(&basis[j])?;
                let after = images[i].inner(&images[j])?;
                worst = worst.max((after - before).norm());
            }
        }
        Ok(worst)
    }
}

/// Dense eta-plane kernel sampled directly from the two-mode formula, with
/// weights `d^2 eta / pi`. Quartic cost; intended as a check on small grids.
pub fn eta_kernel_dense(p: &TransformParams, grid: EtaGrid) -> Result<DMatrix<Complex64>> {
    validate_params(p, Route::Kernel)?;
    let (n1, n2) = grid.shape();
    let w = grid.area_element() / PI;
    let pts: Vec<Complex64> = (0..n1 * n2).map(|k| grid.point(k / n2, k % n2)).collect();
    let mut out = DMatrix::zeros(n1 * n2, n1 * n2);
    for (r, &eo) in pts.iter().enumerate() {
        for (c, &ei) in pts.iter().enumerate() {
            out[(r, c)] = eta_kernel_value(p, eo, ei)? * w;
        }
    }
    Ok(out)
}

/// Bell-basis measurement `<eta'|H|f>`.
pub fn measure_bell(p: &TransformParams, f: &TwoModeWavefunction) -> Result<TwoModeWavefunction> {
    eta_kernel(p, f.grid)?.apply(f)
}

/// Products `sqrt(pi) h_j(eta1) h_k(eta2)`, orthonormal under `d^2 eta / pi`,
/// for `j + k <= max_total`.
pub fn hermite_product_basis(grid: EtaGrid, max_total: usize) -> Vec<TwoModeWavefunction> {
    let table = |g: &Grid1D| g.points().map(|x| hermite_functions(max_total, x)).collect::<Vec<_>>();
    let (t1, t2) = (table(&grid.re_axis), table(&grid.im_axis));
    let (n1, n2) = grid.shape();
    let mut out = Vec::new();
    for j in 0..=max_total {
        for k in 0..=max_total - j {
            let values = DMatrix::from_fn(n1, n2, |a, b| Complex64::new(PI.sqrt() * t1[a][j] * t2[b][k], 0.0));
            out.push(TwoModeWavefunction { grid, values });
        }
    }
    out
}

/// Samples `f(eta) = sum_n <eta|n> f_n` for a Fock vector of per-mode size `n`.
pub fn fock_to_eta(f: &DVector<Complex64>, n: usize, grid: EtaGrid) -> Result<TwoModeWavefunction> {
    if f.len() != n * n {
        return Err(Error::SizeMismatch { expected: n * n, found: f.len() });
    }
    let support: Vec<(usize, usize, Complex64)> = f
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(k, v)| (k / n, k % n, *v))
        .collect();
    let size = support.iter().map(|&(a, b, _)| a.max(b) + 1).max().unwrap_or(1);
    let (r, c) = grid.shape();
    let mut values = DMatrix::zeros(r, c);
    for i in 0..r {
        for j in 0..c {
            let t = overlap_table(size, grid.point(i, j));
            values[(i, j)] = support.iter().map(|&(a, b, v)| t[(a, b)].conj() * v).sum();
        }
    }
    TwoModeWavefunction::new(grid, values)
}

/// Grid route vs Fock route for `<eta'|H|f>`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeReport {
    /// Max deviation over the interior.
    pub residual: f64,
    /// Max magnitude of the Fock-route result over the interior.
    pub scale: f64,
    pub margin: f64,
}

/// Fraction of points excluded at each edge when comparing routes.
pub const BRIDGE_MARGIN: f64 = 0.2;

pub fn bridge_check(p: &TransformParams, f_fock: &DVector<Complex64>, n: usize, grid: EtaGrid) -> Result<BridgeReport> {
    if f_fock.len() != n * n {
        return Err(Error::SizeMismatch { expected: n * n, found: f_fock.len() });
    }
    let max_total = default_max_total(n);
    let outside: f64 = f_fock
        .iter()
        .enumerate()
        .filter(|(k, _)| k / n + k % n > max_total)
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if outside > 0.0 {
        return Err(Error::TruncationLeak { leak: outside, working_dim: n });
    }
    let grid_route = measure_bell(p, &fock_to_eta(f_fock, n, grid)?)?;
    let h = frhad2_decomposed(p, n)?;
    let fock_route = fock_to_eta(&h.apply(f_fock)?, n, grid)?;
    let residual = grid_route.max_abs_diff(&fock_route, BRIDGE_MARGIN)?;
    let zero = TwoModeWavefunction { grid, values: DMatrix::zeros(grid.shape().0, grid.shape().1) };
    let scale = fock_route.max_abs_diff(&zero, BRIDGE_MARGIN)?;
    Ok(BridgeReport { residual, scale, margin: BRIDGE_MARGIN })
}

/// `max |sum_grid <a|eta><eta|b> d^2eta/pi - delta_ab|` over `n1 + n2 <= max_total`.
pub fn completeness_residual(grid: EtaGrid, max_total: usize) -> f64 {
    let size = max_total + 1;
    let states: Vec<(usize, usize)> =
        (0..size).flat_map(|a| (0..size).map(move |b| (a, b))).filter(|(a, b)| a + b <= max_total).collect();
    let mut gram = DMatrix::<Complex64>::zeros(states.len(), states.len());
    let (r, c) = grid.shape();
    let w = grid.area_element() / PI;
    for i in 0..r {
        for j in 0..c {
            let t = overlap_table(size, grid.point(i, j));
            let v = DVector::from_iterator(states.len(), states.iter().map(|&(a, b)| t[(a, b)]));
            gram += &v * v.adjoint() * Complex64::new(w, 0.0);
        }
    }
    max_norm(&(gram - DMatrix::identity(states.len(), states.len())))
}

/// `sum_k c_k Q_k` for `Q = (X1, P1, X2, P2)`, e.g. `[1, 0, -1, 0]` for `X1 - X2`.
pub fn epr_combination(ops: &[TwoModeFockOperator; 4], coeffs: [f64; 4]) -> Result<TwoModeFockOperator> {
    let mut acc = ops[0].scale(Complex64::new(coeffs[0], 0.0));
    for (op, &c) in ops.iter().zip(&coeffs).skip(1) {
        acc = acc.add(&op.scale(Complex64::new(c, 0.0)))?;
    }
    Ok(acc)
}
