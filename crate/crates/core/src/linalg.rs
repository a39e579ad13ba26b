//! Dense complex matrices, Hermitian solves and seeded Gaussian sampling.
//!
//! Matrices are small (at most a few thousand rows by a few hundred columns)
//! and always double precision, so a plain row-major `Vec<Complex64>` with
//! cache-friendly loop orders is enough. Gram systems are solved through a
//! Cholesky factorization; explicit inverses are only ever formed by solving
//! against the identity.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use matrixmultiply::CGemmOption;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Condition-number estimate above which a Gram matrix is rejected.
///
/// The estimate is `max_j G_jj / L_jj²`, the loss of each column to its
/// predecessors. It ignores column scaling, so users with very different
/// path losses are not mistaken for a degenerate draw.
pub const MAX_CONDITION: f64 = 1e12;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "from_row_major",
                lhs: (rows, cols),
                rhs: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real diagonal matrix.
    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Scales column `j` by `factors[j]`.
    pub fn scale_columns(&mut self, factors: &[f64]) {
        assert_eq!(factors.len(), self.cols);
        for row in self.data.chunks_exact_mut(self.cols) {
            for (z, &f) in row.iter_mut().zip(factors) {
                *z *= f;
            }
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let (rs, cs) = (self.cols as isize, 1);
        Ok(gemm(self.rows, self.cols, other, &self.data, rs, cs))
    }

    /// `selfᴴ · other` without materializing the conjugate transpose.
    pub fn adjoint_mul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                op: "adjoint_mul",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let conj: Vec<C64> = self.data.iter().map(|z| z.conj()).collect();
        Ok(gemm(
            self.cols,
            self.rows,
            other,
            &conj,
            1,
            self.cols as isize,
        ))
    }

    /// Gram matrix `selfᴴ · self`, exactly Hermitian.
    pub fn gram(&self) -> Self {
        let mut out = self.adjoint_mul(self).expect("same rows");
        let k = self.cols;
        for i in 0..k {
            out.data[i * k + i].im = 0.0;
            for j in 0..i {
                out.data[i * k + j] = out.data[j * k + i].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                op: "trace",
                lhs: self.shape(),
                rhs: self.shape(),
            });
        }
        Ok((0..self.rows).map(|i| self[(i, i)]).sum())
    }

    /// Sum of squared magnitudes of all entries.
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "mul_vec",
                lhs: self.shape(),
                rhs: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

#[inline]
/// `A · b` where `A` is `rows × inner` with strides `(rs, cs)` into `a`.
fn gemm(
    rows: usize,
    inner: usize,
    b: &ComplexMatrix,
    a: &[C64],
    rs: isize,
    cs: isize,
) -> ComplexMatrix {
    let n = b.cols;
    let mut out = ComplexMatrix::zeros(rows, n);
    if rows == 0 || n == 0 || inner == 0 {
        return out;
    }
    // Complex64 is repr(C) { re, im }, layout-compatible with [f64; 2]
    unsafe {
        matrixmultiply::zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            rows,
            inner,
            n,
            [1.0, 0.0],
            a.as_ptr().cast(),
            rs,
            cs,
            b.data.as_ptr().cast(),
            n as isize,
            1,
            [0.0, 0.0],
            out.data.as_mut_ptr().cast(),
            n as isize,
            1,
        );
    }
    out
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add: shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub: shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("mul: shape mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, " ")?;
            for z in self.row(i) {
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Cholesky factor `L` of a Hermitian positive definite matrix, `Gram = L·Lᴴ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    lower: ComplexMatrix,
}

impl Cholesky {
    /// Factors `gram`, rejecting it when the condition estimate exceeds
    /// [`MAX_CONDITION`]. Only the lower triangle is read.
    pub fn factor(gram: &ComplexMatrix) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::DimensionMismatch {
                op: "cholesky",
                lhs: gram.shape(),
                rhs: gram.shape(),
            });
        }
        let n = gram.rows();
        let mut l = ComplexMatrix::zeros(n, n);
        let mut condition = 1.0_f64;
        for j in 0..n {
            let mut d = gram[(j, j)].re;
            for p in 0..j {
                d -= l[(j, p)].norm_sqr();
            }
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::SingularGram {
                    condition: f64::INFINITY,
                });
            }
            condition = condition.max(gram[(j, j)].re / d);
            let ljj = d.sqrt();
            l[(j, j)] = C64::new(ljj, 0.0);
            for i in j + 1..n {
                let mut s = gram[(i, j)];
                let (li, lj) = (l.row(i), l.row(j));
                for p in 0..j {
                    s -= li[p] * lj[p].conj();
                }
                l[(i, j)] = s / ljj;
            }
        }
        if condition > MAX_CONDITION {
            return Err(Error::SingularGram { condition });
        }
        Ok(Self { lower: l })
    }

    pub fn lower(&self) -> &ComplexMatrix {
        &self.lower
    }

    /// Solves `Gram · X = rhs` for every column of `rhs`.
    pub fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.lower.rows();
        if rhs.rows() != n {
            return Err(Error::DimensionMismatch {
                op: "cholesky_solve",
                lhs: self.lower.shape(),
                rhs: rhs.shape(),
            });
        }
        let l = &self.lower;
        let w = rhs.cols();
        let mut x = rhs.clone();
        // L·Y = rhs
        for i in 0..n {
            let (done, rest) = x.data.split_at_mut(i * w);
            let xi = &mut rest[..w];
            for p in 0..i {
                axpy(xi, -l[(i, p)], &done[p * w..(p + 1) * w]);
            }
            let inv = 1.0 / l[(i, i)].re;
            xi.iter_mut().for_each(|z| *z *= inv);
        }
        // Lᴴ·X = Y
        for i in (0..n).rev() {
            let (head, tail) = x.data.split_at_mut((i + 1) * w);
            let xi = &mut head[i * w..];
            for p in i + 1..n {
                axpy(xi, -l[(p, i)].conj(), &tail[(p - i - 1) * w..(p - i) * w]);
            }
            let inv = 1.0 / l[(i, i)].re;
            xi.iter_mut().for_each(|z| *z *= inv);
        }
        Ok(x)
    }

    /// `Gram⁻¹`, obtained by solving against the identity.
    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.lower.rows();
        let mut inv = self
            .solve(&ComplexMatrix::identity(n))
            .expect("identity has matching rows");
        for i in 0..n {
            inv[(i, i)].im = 0.0;
            for j in 0..i {
                let avg = (inv[(i, j)] + inv[(j, i)].conj()) * 0.5;
                inv[(i, j)] = avg;
                inv[(j, i)] = avg.conj();
            }
        }
        inv
    }
}

/// Solves `gram · X = rhs` for Hermitian positive definite `gram`.
pub fn hermitian_solve(gram: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
    Cholesky::factor(gram)?.solve(rhs)
}

/// Counter-based random stream: one root seed plus a stream id (the trial
/// index). Identical `(seed, stream)` pairs replay identical samples.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// One CN(0, 1) draw: real and imaginary parts each N(0, 1/2).
    #[inline]
    pub fn complex_gaussian(&mut self) -> C64 {
        let re = self.standard_normal();
        let im = self.standard_normal();
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Matrix of i.i.d. CN(0, 1) entries, filled row-major.
pub fn sample_circular_gaussian(rows: usize, cols: usize, rng: &mut RngStream) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| rng.complex_gaussian()).collect();
    ComplexMatrix { rows, cols, data }
}

/// Mixes a root seed with a tag and indices into an independent sub-seed
/// (splitmix64 finalizer chain).
pub fn derive_seed(root: u64, tag: &str, indices: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut h = mix(root);
    for b in tag.bytes() {
        h = mix(h ^ u64::from(b));
    }
    for &i in indices {
        h = mix(h ^ i);
    }
    h
}
