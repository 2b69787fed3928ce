//! Dense complex matrices and the handful of decompositions the learner needs.
//!
//! Storage is row-major `Complex64`. Matrices are small (the largest in this
//! crate is 16x16), so everything is written as plain loops. Zero-sized
//! matrices are allowed; an empty precoder is a `t x 0` matrix.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Absolute floor used wherever a tolerance is relative to a norm that may be zero.
pub const NORM_FLOOR: f64 = 1e-14;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;
const HERMITIAN_REL_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row-major real data.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// A single-column matrix holding `x`.
    pub fn column_vector(x: &[Complex64]) -> Self {
        Self {
            rows: x.len(),
            cols: 1,
            data: x.to_vec(),
        }
    }

    /// Stacks equally long columns side by side.
    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    op: "from_columns",
                    lhs: (rows, columns.len()),
                    rhs: (col.len(), 1),
                });
            }
            for (i, &z) in col.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Keeps the listed columns, in the listed order.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        Self::from_fn(self.rows, indices.len(), |i, j| self[(i, indices[j])])
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.cols != x.len() {
            return Err(Error::DimensionMismatch {
                op: "mul_vec",
                lhs: self.shape(),
                rhs: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op,
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `||A - A*||_F`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        libm::sqrt(acc)
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Result<Self> {
        self.require_square()?;
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        }))
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.matmul(b)
}

pub fn conj_transpose(a: &ComplexMatrix) -> ComplexMatrix {
    a.conj_transpose()
}

/// `x* A x`. For Hermitian `A` the imaginary part is rounding noise and the
/// real part is the energy value.
pub fn quadratic_form(a: &ComplexMatrix, x: &[Complex64]) -> Result<Complex64> {
    a.require_square()?;
    let ax = a.mul_vec(x)?;
    Ok(x.iter().zip(&ax).map(|(xi, yi)| xi.conj() * yi).sum())
}

pub fn vector_norm_sq(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// `x* y`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// `values` are sorted in descending order and column `k` of `vectors` is the
/// eigenvector of `values[k]`. Each eigenvector is rotated so its
/// largest-magnitude entry is real and positive.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(values) V*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)].conj())
                .sum()
        })
    }
}

/// Unitary 2x2 block acting on coordinates `(p, q)`.
#[derive(Clone, Copy, Debug)]
struct Rotation {
    pp: Complex64,
    pq: Complex64,
    qp: Complex64,
    qq: Complex64,
}

impl Rotation {
    /// Rotation `J` with `(J* B J)_pq = 0` for the Hermitian block
    /// `B = [[b_pp, b_pq], [conj(b_pq), b_qq]]`, `b_pq != 0`.
    ///
    /// `J = diag(1, conj(u)) R` where `u` is the phase of `b_pq` and `R` the real
    /// Jacobi rotation of the now real symmetric block.
    fn annihilating(b_pp: f64, b_qq: f64, b_pq: Complex64) -> Self {
        let mag = b_pq.norm();
        let phase_conj = (b_pq / mag).conj();
        let tau = (b_qq - b_pp) / (2.0 * mag);
        let t = if tau >= 0.0 {
            1.0 / (tau + libm::hypot(1.0, tau))
        } else {
            -1.0 / (-tau + libm::hypot(1.0, tau))
        };
        let c = 1.0 / libm::hypot(1.0, t);
        let s = t * c;
        Self {
            pp: Complex64::new(c, 0.0),
            pq: Complex64::new(s, 0.0),
            qp: phase_conj * (-s),
            qq: phase_conj * c,
        }
    }

    /// `M <- M J` on columns `p`, `q`.
    fn apply_right(&self, m: &mut ComplexMatrix, p: usize, q: usize) {
        for i in 0..m.rows {
            let a = m[(i, p)];
            let b = m[(i, q)];
            m[(i, p)] = a * self.pp + b * self.qp;
            m[(i, q)] = a * self.pq + b * self.qq;
        }
    }

    /// `M <- J* M` on rows `p`, `q`.
    fn apply_left_adjoint(&self, m: &mut ComplexMatrix, p: usize, q: usize) {
        for k in 0..m.cols {
            let a = m[(p, k)];
            let b = m[(q, k)];
            m[(p, k)] = self.pp.conj() * a + self.qp.conj() * b;
            m[(q, k)] = self.pq.conj() * a + self.qq.conj() * b;
        }
    }
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..m.rows {
        for j in 0..m.cols {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    libm::sqrt(acc)
}

/// Rotates a vector so its largest-magnitude entry is real positive.
fn normalize_phase(col: &mut [Complex64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in col.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag {
            best = i;
            best_mag = mag;
        }
    }
    if best_mag > 0.0 {
        let phase = (col[best] / best_mag).conj();
        for z in col.iter_mut() {
            *z *= phase;
        }
        col[best] = Complex64::new(col[best].re, 0.0);
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Sweeps pairs `(p, q)` in row-major order until the off-diagonal Frobenius
/// norm drops below `1e-12 ||A||_F` or 100 sweeps have run. The input is
/// symmetrized as `(A + A*) / 2` first; inputs further than `1e-10 ||A||_F`
/// from Hermitian are rejected. Equal eigenvalues keep their Jacobi column order.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEig> {
    a.require_square()?;
    let n = a.rows;
    let norm = a.frobenius_norm();
    let deviation = a.hermitian_deviation();
    if deviation > HERMITIAN_REL_TOL * norm.max(NORM_FLOOR) {
        return Err(Error::NotHermitian {
            deviation: deviation / norm.max(NORM_FLOOR),
        });
    }

    let mut w = a.hermitian_part()?;
    for i in 0..n {
        w[(i, i)] = Complex64::new(w[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);

    if norm > 0.0 {
        let tol = JACOBI_REL_TOL * norm;
        for _ in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_norm(&w) <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let b_pq = w[(p, q)];
                    if b_pq == ZERO {
                        continue;
                    }
                    let rot = Rotation::annihilating(w[(p, p)].re, w[(q, q)].re, b_pq);
                    rot.apply_right(&mut w, p, q);
                    rot.apply_left_adjoint(&mut w, p, q);
                    rot.apply_right(&mut v, p, q);
                    w[(p, q)] = ZERO;
                    w[(q, p)] = ZERO;
                    w[(p, p)] = Complex64::new(w[(p, p)].re, 0.0);
                    w[(q, q)] = Complex64::new(w[(q, q)].re, 0.0);
                }
            }
        }
    }

    let raw: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal values keep Jacobi column order
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));

    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        normalize_phase(&mut col);
        for (i, z) in col.into_iter().enumerate() {
            vectors[(i, k)] = z;
        }
    }
    Ok(HermitianEig {
        values: order.iter().map(|&i| raw[i]).collect(),
        vectors,
    })
}

/// Thin singular value decomposition `A = U diag(s) V*`.
///
/// For an `m x n` input, `u` is `m x k`, `v` is `n x k` with `k = min(m, n)`
/// and `singular_values` is descending. Columns of `u` paired with an exactly
/// zero singular value are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Works directly on the columns of `A`, so small singular values are
/// resolved to roughly `eps * sigma_max` rather than `sqrt(eps) * sigma_max`
/// as a Gram-matrix route would.
pub fn svd(a: &ComplexMatrix) -> Svd {
    if a.rows < a.cols {
        let t = svd(&a.conj_transpose());
        return Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        };
    }
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(n);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for i in 0..m {
                    let x = w[(i, p)];
                    let y = w[(i, q)];
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                if gamma == ZERO || gamma.norm() <= 1e-15 * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let rot = Rotation::annihilating(alpha, beta, gamma);
                rot.apply_right(&mut w, p, q);
                rot.apply_right(&mut v, p, q);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| libm::sqrt(vector_norm_sq(&w.column(j))))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u = ComplexMatrix::zeros(m, n);
    let mut v_sorted = ComplexMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let s = norms[src];
        for i in 0..m {
            u[(i, k)] = if s > 0.0 { w[(i, src)] / s } else { ZERO };
        }
        for i in 0..n {
            v_sorted[(i, k)] = v[(i, src)];
        }
    }
    Svd {
        u,
        singular_values: order.iter().map(|&i| norms[i]).collect(),
        v: v_sorted,
    }
}

fn kept_indices(singular_values: &[f64], rel_tol: f64) -> Vec<usize> {
    let smax = singular_values.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return Vec::new();
    }
    singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > rel_tol * smax)
        .map(|(k, _)| k)
        .collect()
}

/// Moore-Penrose pseudo-inverse; singular values at or below `tol * sigma_max`
/// are treated as zero.
pub fn pseudo_inverse(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(
            "pseudo-inverse tolerance must be >= 0",
        ));
    }
    let d = svd(a);
    let keep = kept_indices(&d.singular_values, tol);
    let (m, n) = a.shape();
    Ok(ComplexMatrix::from_fn(n, m, |i, j| {
        keep.iter()
            .map(|&k| d.v[(i, k)] * d.u[(j, k)].conj() / d.singular_values[k])
            .sum()
    }))
}

/// Orthogonal projector onto the column space of `b`, i.e. `B (B*B)^+ B*`.
pub fn column_space_projector(b: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let d = svd(b);
    let keep = kept_indices(&d.singular_values, tol);
    let m = b.rows;
    ComplexMatrix::from_fn(m, m, |i, j| {
        keep.iter().map(|&k| d.u[(i, k)] * d.u[(j, k)].conj()).sum()
    })
}

/// Number of singular values strictly above `rel_tol * sigma_max`.
pub fn numeric_rank(a: &ComplexMatrix, rel_tol: f64) -> usize {
    kept_indices(&svd(a).singular_values, rel_tol).len()
}

/// Lower Cholesky factor `L` with `A = L L*`.
pub fn cholesky(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_square()?;
    let n = a.rows;
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let ljj = libm::sqrt(d);
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `L X = B` for lower-triangular `L`.
pub fn solve_lower(l: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    l.require_square()?;
    if l.rows != b.rows {
        return Err(Error::DimensionMismatch {
            op: "solve_lower",
            lhs: l.shape(),
            rhs: b.shape(),
        });
    }
    let n = l.rows;
    let mut x = ComplexMatrix::zeros(n, b.cols);
    for c in 0..b.cols {
        for i in 0..n {
            let mut s = b[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    Ok(x)
}

/// `ln det A` for Hermitian positive definite `A`.
pub fn log_det_hpd(a: &ComplexMatrix) -> Result<f64> {
    let l = cholesky(a)?;
    Ok((0..a.rows).map(|i| 2.0 * libm::log(l[(i, i)].re)).sum())
}

/// Principal angles between the spans of two matrices with orthonormal
/// columns, ascending. Computed from sines, `svd((I - BB*) A)`, so small
/// angles keep full precision. Returns `min(cols)` angles.
pub fn principal_angles(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Vec<f64>> {
    if a.rows != b.rows {
        return Err(Error::DimensionMismatch {
            op: "principal_angles",
            lhs: a.shape(),
            rhs: b.shape(),
        });
    }
    let (small, big) = if a.cols <= b.cols { (a, b) } else { (b, a) };
    let coeff = big.conj_transpose().matmul(small)?;
    let residual = small.sub(&big.matmul(&coeff)?)?;
    let mut angles: Vec<f64> = svd(&residual)
        .singular_values
        .iter()
        .map(|&s| libm::asin(s.min(1.0)))
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}
