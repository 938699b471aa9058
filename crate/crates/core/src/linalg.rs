//! Small dense linear algebra kit, generic over [`Scalar`].
//!
//! Everything here is row-major and sized for desk-scale problems
//! (a few thousand unknowns at most).

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                what: "matrix data",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
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

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetric_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |r, c| half * (self[(r, c)] + self[(c, r)]))
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension");
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    pub fn mul_mat(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "mul_mat dimension");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                for (o, &b) in out.row_mut(r).iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Entrywise max-abs norm.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// Leading `k × k` principal submatrix.
    pub fn leading(&self, k: usize) -> Self {
        Self::from_fn(k, k, |r, c| self[(r, c)])
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn max_abs<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Factorization("LU of a non-square matrix".into()));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = a.max_abs() * T::epsilon() * T::from_usize_lossy(n.max(1));
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|r| (r, lu[(r, k)].abs()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= tiny || pmax == T::zero() {
                return Err(Error::Factorization(format!(
                    "singular matrix: pivot {} at column {k}",
                    pmax.to_f64_lossy()
                )));
            }
            if p != k {
                perm.swap(p, k);
                for c in 0..n {
                    let tmp = lu[(p, c)];
                    lu[(p, c)] = lu[(k, c)];
                    lu[(k, c)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for r in k + 1..n {
                let f = lu[(r, k)] / pivot;
                lu[(r, k)] = f;
                if f != T::zero() {
                    for c in k + 1..n {
                        let v = lu[(k, c)];
                        lu[(r, c)] -= f * v;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n, "rhs dimension");
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let s = dot(&self.lu.row(r)[..r], &x[..r]);
            x[r] -= s;
        }
        for r in (0..n).rev() {
            let s = dot(&self.lu.row(r)[r + 1..], &x[r + 1..]);
            x[r] = (x[r] - s) / self.lu[(r, r)];
        }
        x
    }
}

/// Cholesky factorization `A = L Lᵀ` of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Factorization("Cholesky of a non-square matrix".into()));
        }
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let s = dot(&l.row(j)[..j], &l.row(j)[..j]);
            let d = a[(j, j)] - s;
            if !(d > T::zero()) {
                return Err(Error::Factorization(format!(
                    "matrix not positive definite (pivot {} at {j})",
                    d.to_f64_lossy()
                )));
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for r in j + 1..n {
                let s = dot(&l.row(r)[..j], &l.row(j)[..j]);
                l[(r, j)] = (a[(r, j)] - s) / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.l.rows();
        assert_eq!(b.len(), n, "rhs dimension");
        let mut y = b.to_vec();
        for r in 0..n {
            let s = dot(&self.l.row(r)[..r], &y[..r]);
            y[r] = (y[r] - s) / self.l[(r, r)];
        }
        for r in (0..n).rev() {
            let mut s = T::zero();
            for k in r + 1..n {
                s += self.l[(k, r)] * y[k];
            }
            y[r] = (y[r] - s) / self.l[(r, r)];
        }
        y
    }
}

/// Unpivoted LU of a square matrix taken in reversed index order, so that
/// every trailing principal block `A[i.., i..]` is factored at once.
///
/// With `R = J A J` (`J` the exchange matrix), Doolittle elimination gives
/// `R = L U` and the leading `m × m` blocks satisfy `R_m = L_m U_m`. The
/// leading blocks of `R` are exactly the trailing blocks of `A`, reversed.
/// Existence needs every trailing principal minor to be nonzero, which
/// holds when the symmetric part of `A` is positive definite.
#[derive(Debug, Clone)]
pub struct TrailingLu<T> {
    /// Packed factors of `R`: strictly lower part is `L` (unit diagonal),
    /// upper part including the diagonal is `U`.
    packed: Matrix<T>,
}

impl<T: Scalar> TrailingLu<T> {
    /// Factors `a`. A failing pivot at reversed position `p` reports the
    /// original index `n - 1 - p`, i.e. the first row of the singular
    /// trailing block.
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Factorization("trailing LU of a non-square matrix".into()));
        }
        let n = a.rows();
        let mut r = Matrix::from_fn(n, n, |p, q| a[(n - 1 - p, n - 1 - q)]);
        let tiny = a.max_abs() * T::epsilon() * T::from_usize_lossy(n.max(1));
        for k in 0..n {
            let pivot = r[(k, k)];
            if !(pivot.abs() > tiny) {
                return Err(Error::SingularOperator {
                    step: n - 1 - k,
                    pivot: pivot.to_f64_lossy(),
                });
            }
            for row in k + 1..n {
                let f = r[(row, k)] / pivot;
                r[(row, k)] = f;
                if f != T::zero() {
                    for c in k + 1..n {
                        let v = r[(k, c)];
                        r[(row, c)] -= f * v;
                    }
                }
            }
        }
        Ok(Self { packed: r })
    }

    pub fn dim(&self) -> usize {
        self.packed.rows()
    }

    /// Solves `A[i.., i..] x = f` where `f` is given in original order
    /// (`f[0]` pairs with row `i`).
    pub fn solve_trailing(&self, i: usize, f: &[T]) -> Vec<T> {
        let n = self.dim();
        let m = n - i;
        assert_eq!(f.len(), m, "trailing rhs dimension");
        let mut y: Vec<T> = f.iter().rev().copied().collect();
        for p in 0..m {
            let s = dot(&self.packed.row(p)[..p], &y[..p]);
            y[p] -= s;
        }
        for p in (0..m).rev() {
            let s = dot(&self.packed.row(p)[p + 1..m], &y[p + 1..m]);
            y[p] = (y[p] - s) / self.packed[(p, p)];
        }
        y.reverse();
        y
    }

    /// Solves `A[i.., i..]ᵀ x = g`, `g` in original order.
    pub fn solve_trailing_transpose(&self, i: usize, g: &[T]) -> Vec<T> {
        let n = self.dim();
        let m = n - i;
        assert_eq!(g.len(), m, "trailing rhs dimension");
        let mut y: Vec<T> = g.iter().rev().copied().collect();
        // Uᵀ z = g (lower triangular with diagonal)
        for p in 0..m {
            let mut s = T::zero();
            for k in 0..p {
                s += self.packed[(k, p)] * y[k];
            }
            y[p] = (y[p] - s) / self.packed[(p, p)];
        }
        // Lᵀ x = z (unit upper triangular)
        for p in (0..m).rev() {
            let mut s = T::zero();
            for k in p + 1..m {
                s += self.packed[(k, p)] * y[k];
            }
            y[p] -= s;
        }
        y.reverse();
        y
    }
}

/// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
/// Only the lower triangle of `a` is read.
pub fn symmetric_eigenvalues<T: Scalar>(a: &Matrix<T>) -> Result<Vec<T>> {
    if !a.is_square() {
        return Err(Error::Factorization("eigenvalues of a non-square matrix".into()));
    }
    let n = a.rows();
    let mut m = Matrix::from_fn(n, n, |r, c| if r >= c { a[(r, c)] } else { a[(c, r)] });
    let scale = m.frobenius();
    if scale == T::zero() {
        return Ok(vec![T::zero(); n]);
    }
    let tol = T::epsilon() * scale;
    const MAX_SWEEPS: usize = 60;
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= tol {
            let mut ev: Vec<T> = (0..n).map(|k| m[(k, k)]).collect();
            ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    Err(Error::Factorization("Jacobi eigenvalue iteration did not converge".into()))
}

/// Smallest eigenvalue of the symmetric part of `a`.
pub fn min_symmetric_eigenvalue<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    let ev = symmetric_eigenvalues(&a.symmetric_part())?;
    Ok(ev.first().copied().unwrap_or_else(T::zero))
}
