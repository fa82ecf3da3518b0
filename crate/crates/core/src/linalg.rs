//! Tridiagonal operators.
//!
//! Piecewise-linear elements on an interval couple only neighbouring nodes, so
//! every operator in the crate is tridiagonal. Symmetric real matrices carry the
//! assembled forms; general (possibly complex) tridiagonals carry the shifted
//! operators of the transformed problem. Factorization is Gaussian elimination
//! with partial pivoting in the layout used by LAPACK `?gttrf`.

use nalgebra::{ComplexField, DMatrix, RealField};

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Symmetric real tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiag<T> {
    diag: Vec<T>,
    off: Vec<T>,
}

impl<T: Real> SymTridiag<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Result<Self> {
        let expected = diag.len().saturating_sub(1);
        if off.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: off.len(),
            });
        }
        Ok(Self { diag, off })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![T::zero(); n],
            off: vec![T::zero(); n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn off(&self) -> &[T] {
        &self.off
    }

    pub(crate) fn add_to(&mut self, i: usize, j: usize, value: T) {
        if i == j {
            self.diag[i] += value;
        } else {
            debug_assert_eq!(i.abs_diff(j), 1);
            self.off[i.min(j)] += value;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim(), "tridiagonal product dimension");
        let n = self.dim();
        let mut y: Vec<T> = self.diag.iter().zip(x).map(|(d, xi)| *d * *xi).collect();
        for i in 0..n.saturating_sub(1) {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    pub fn mul_cvec(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        assert_eq!(x.len(), self.dim(), "tridiagonal product dimension");
        let n = self.dim();
        let mut y: Vec<Cplx<T>> = self.diag.iter().zip(x).map(|(d, xi)| xi.scale(*d)).collect();
        for i in 0..n.saturating_sub(1) {
            y[i] += x[i + 1].scale(self.off[i]);
            y[i + 1] += x[i].scale(self.off[i]);
        }
        y
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[T]) -> T {
        dot(x, &self.mul_vec(x))
    }

    /// `xᴴ A x`, real because `A` is real symmetric.
    pub fn hermitian_form(&self, x: &[Cplx<T>]) -> T {
        self.mul_cvec(x)
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (ax, xi)| acc + (xi.conj() * ax).re)
    }

    /// Removes the first and last row and column (Dirichlet elimination).
    pub fn interior(&self) -> Self {
        let n = self.dim();
        assert!(n >= 3, "interior block needs at least three nodes");
        Self {
            diag: self.diag[1..n - 1].to_vec(),
            off: self.off[1..n - 2].to_vec(),
        }
    }

    /// Rows `1..n-1` of `A x` for a full-length `x`.
    pub fn interior_rows(&self, x: &[T]) -> Vec<T> {
        let full = self.mul_vec(x);
        full[1..full.len() - 1].to_vec()
    }

    /// `Σ cᵢ Aᵢ` over matrices of equal dimension.
    pub fn lincomb(terms: &[(T, &SymTridiag<T>)]) -> Self {
        let n = terms.first().map_or(0, |(_, m)| m.dim());
        let mut out = Self::zeros(n);
        for (c, m) in terms {
            assert_eq!(m.dim(), n, "linear combination dimension");
            for (o, d) in out.diag.iter_mut().zip(&m.diag) {
                *o += *c * *d;
            }
            for (o, d) in out.off.iter_mut().zip(&m.off) {
                *o += *c * *d;
            }
        }
        out
    }

    /// `Σ cᵢ Aᵢ` with complex weights.
    pub fn complex_lincomb(terms: &[(Cplx<T>, &SymTridiag<T>)]) -> Tridiag<Cplx<T>> {
        let n = terms.first().map_or(0, |(_, m)| m.dim());
        let zero = Cplx::new(T::zero(), T::zero());
        let mut diag = vec![zero; n];
        let mut off = vec![zero; n.saturating_sub(1)];
        for (c, m) in terms {
            assert_eq!(m.dim(), n, "linear combination dimension");
            for (o, d) in diag.iter_mut().zip(&m.diag) {
                *o += c.scale(*d);
            }
            for (o, d) in off.iter_mut().zip(&m.off) {
                *o += c.scale(*d);
            }
        }
        Tridiag {
            lower: off.clone(),
            diag,
            upper: off,
        }
    }

    pub fn to_general(&self) -> Tridiag<T> {
        Tridiag {
            lower: self.off.clone(),
            diag: self.diag.clone(),
            upper: self.off.clone(),
        }
    }

    /// Pivots of the `LDLᵀ` factorization; fails unless every pivot is positive.
    pub fn ldl_pivots(&self) -> Result<Vec<T>> {
        let mut pivots = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let mut p = self.diag[i];
            if i > 0 {
                p -= self.off[i - 1] * self.off[i - 1] / pivots[i - 1];
            }
            if !(p > T::zero()) {
                return Err(Error::SingularSystem(format!(
                    "non-positive pivot {:e} at row {i}",
                    p
                )));
            }
            pivots.push(p);
        }
        Ok(pivots)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.ldl_pivots().is_ok()
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i.abs_diff(j) == 1 {
                self.off[i.min(j)]
            } else {
                T::zero()
            }
        })
    }

    pub fn factor(&self) -> Result<TridiagLu<T>> {
        TridiagLu::factor(self.to_general())
    }
}

/// General tridiagonal matrix over a real or complex field.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiag<E> {
    pub lower: Vec<E>,
    pub diag: Vec<E>,
    pub upper: Vec<E>,
}

impl<E: ComplexField + Copy> Tridiag<E> {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul_vec(&self, x: &[E]) -> Vec<E> {
        let n = self.dim();
        assert_eq!(x.len(), n, "tridiagonal product dimension");
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.upper[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }
}

/// `LU` factors of a tridiagonal matrix with row interchanges.
#[derive(Clone, Debug)]
pub struct TridiagLu<E> {
    dl: Vec<E>,
    d: Vec<E>,
    du: Vec<E>,
    du2: Vec<E>,
    swapped: Vec<bool>,
}

impl<E: ComplexField + Copy> TridiagLu<E> {
    pub fn factor(m: Tridiag<E>) -> Result<Self> {
        let n = m.dim();
        if n == 0 {
            return Err(Error::SingularSystem("empty system".into()));
        }
        let Tridiag {
            lower: mut dl,
            diag: mut d,
            upper: mut du,
        } = m;
        let mut du2 = vec![E::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let scale = d
            .iter()
            .chain(&dl)
            .chain(&du)
            .map(|v| v.modulus())
            .fold(nalgebra::zero::<E::RealField>(), |a, b| a.max(b));

        for i in 0..n.saturating_sub(1) {
            if d[i].modulus() >= dl[i].modulus() {
                if d[i] != E::zero() {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }

        let tiny = scale * nalgebra::convert::<f64, E::RealField>(f64::EPSILON);
        for (i, pivot) in d.iter().enumerate() {
            let m = pivot.modulus();
            if !(m > tiny) || !m.is_finite() {
                return Err(Error::SingularSystem(format!("zero pivot at row {i}")));
            }
        }
        Ok(Self {
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn solve(&self, rhs: &[E]) -> Vec<E> {
        let n = self.dim();
        assert_eq!(rhs.len(), n, "right-hand side dimension");
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                let bi = b[i];
                b[i + 1] -= self.dl[i] * bi;
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        b
    }
}

pub fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (a, b)| acc + *a * *b)
}

pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

pub fn scaled<T: Real>(alpha: T, x: &[T]) -> Vec<T> {
    x.iter().map(|v| alpha * *v).collect()
}

pub fn sub<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(a, b)| *a - *b).collect()
}

pub fn add<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(a, b)| *a + *b).collect()
}

pub fn max_abs<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}
