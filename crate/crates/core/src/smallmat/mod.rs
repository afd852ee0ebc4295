//! Dense complex matrices of size 2×2 and 4×4, plus the special functions and
//! quadrature used throughout the crate.

mod eig;
mod quad;
mod special;
mod svd;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eig::{hermitian_eig, psd_sqrt, EigResult};
pub(crate) use eig::psd_sqrt_from_eig;
pub use quad::{adaptive_quad, integrate, QuadOptions, QuadResult, Singular};
pub use special::{agm, elliptic_k, elliptic_k_complement};
pub use svd::{compress_factor, singular_values};

pub type C64 = Complex64;

const MAX_DIM: usize = 4;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Row-major complex matrix with at most 4 rows and columns.
///
/// Storage is inline so that the hot loops (channel application, concurrence)
/// never touch the allocator.
#[derive(Clone, Copy, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: [C64; MAX_DIM * MAX_DIM],
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&rows) && (1..=MAX_DIM).contains(&cols),
            "CMat supports 1..=4 rows and columns, got {rows}x{cols}"
        );
        CMat { rows, cols, data: [ZERO; MAX_DIM * MAX_DIM] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&rows) || !(1..=MAX_DIM).contains(&cols) {
            return Err(Error::InvalidInput(format!("unsupported shape {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = entries[r * cols + c];
            }
        }
        Ok(m)
    }

    pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let z: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_rows(rows, cols, &z)
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                m[(i, j)] = x * y.conj();
            }
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                v.push(self[(r, c)]);
            }
        }
        v
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)];
            }
        }
        m
    }

    /// Entry-wise complex conjugate.
    pub fn conj(&self) -> Self {
        let mut m = *self;
        for z in m.data.iter_mut() {
            *z = z.conj();
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        for z in m.data.iter_mut() {
            *z *= s;
        }
        m
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-norm distance between two matrices of the same shape.
    pub fn max_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        (*self - *other).max_abs()
    }

    /// ‖A − A†‖ in max norm; `f64::INFINITY` for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// (A + A†)/2.
    pub fn hermitize(&self) -> Self {
        debug_assert!(self.is_square());
        let mut m = *self;
        for r in 0..self.rows {
            for c in r..self.cols {
                let v = (self[(r, c)] + self[(c, r)].conj()) * 0.5;
                m[(r, c)] = v;
                m[(c, r)] = v.conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut m = CMat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..other.cols {
                    m[(r, c)] += a * other[(k, c)];
                }
            }
        }
        m
    }

    /// A·B·A†, the congruence that appears in every Kraus sum.
    pub fn sandwich(&self, inner: &CMat) -> CMat {
        self.matmul(inner).matmul(&self.adjoint())
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * MAX_DIM + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * MAX_DIM + c]
    }
}

impl Add for CMat {
    type Output = CMat;
    fn add(self, rhs: CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut m = self;
        for (a, b) in m.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
        m
    }
}

impl Sub for CMat {
    type Output = CMat;
    fn sub(self, rhs: CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut m = self;
        for (a, b) in m.data.iter_mut().zip(rhs.data.iter()) {
            *a -= b;
        }
        m
    }
}

impl Mul for CMat {
    type Output = CMat;
    fn mul(self, rhs: CMat) -> CMat {
        self.matmul(&rhs)
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product of two 2×2 matrices in the basis |00⟩,|01⟩,|10⟩,|11⟩.
pub fn kron(a: &CMat, b: &CMat) -> Result<CMat> {
    if (a.rows, a.cols) != (2, 2) || (b.rows, b.cols) != (2, 2) {
        return Err(Error::InvalidInput(format!(
            "kron expects 2x2 factors, got {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut m = CMat::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    Ok(m)
}

/// Pauli matrices σ₁, σ₂, σ₃.
pub mod pauli {
    use super::{CMat, C64, I, ONE, ZERO};

    pub fn sigma_x() -> CMat {
        CMat::from_rows(2, 2, &[ZERO, ONE, ONE, ZERO]).expect("static shape")
    }

    pub fn sigma_y() -> CMat {
        CMat::from_rows(2, 2, &[ZERO, -I, I, ZERO]).expect("static shape")
    }

    pub fn sigma_z() -> CMat {
        CMat::from_rows(2, 2, &[ONE, ZERO, ZERO, -ONE]).expect("static shape")
    }

    /// σ₂⊗σ₂, the two-qubit spin flip. Real, with ±1 on the anti-diagonal.
    pub fn spin_flip() -> CMat {
        let m = C64::new(-1.0, 0.0);
        CMat::from_rows(
            4,
            4,
            &[
                ZERO, ZERO, ZERO, m, //
                ZERO, ZERO, ONE, ZERO, //
                ZERO, ONE, ZERO, ZERO, //
                m, ZERO, ZERO, ZERO,
            ],
        )
        .expect("static shape")
    }
}
