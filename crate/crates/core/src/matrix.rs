//! Exact `d x d` rational matrices, `d` in `{2, 3, 4}`.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Mul;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, int, Rational};

/// Row-major exact matrix.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalMatrix {
    dim: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(dim: usize, entries: Vec<Rational>) -> Result<Self> {
        if !(2..=4).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if entries.len() != dim * dim {
            return Err(Error::EntryCount { expected: dim * dim, got: entries.len() });
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<Rational>]) -> Result<Self> {
        let dim = rows.len();
        let entries: Vec<Rational> = rows.iter().flatten().cloned().collect();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::EntryCount { expected: dim * dim, got: entries.len() });
        }
        Self::new(dim, entries)
    }

    /// Integer convenience constructor used throughout tests and fixtures.
    pub fn from_i64(dim: usize, entries: &[i64]) -> Result<Self> {
        Self::new(dim, entries.iter().map(|&v| int(v)).collect())
    }

    /// Like [`RationalMatrix::new`] but additionally requires `det = 1`.
    pub fn group_element(dim: usize, entries: Vec<Rational>) -> Result<Self> {
        let m = Self::new(dim, entries)?;
        let det = m.det();
        if !det.is_one() {
            return Err(Error::DeterminantNotOne(rational::to_string(&det)));
        }
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = alloc::vec![Rational::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Rational::one();
        }
        Self { dim, entries }
    }

    pub fn diag(values: &[Rational]) -> Result<Self> {
        let dim = values.len();
        let mut m = Self::new(dim, alloc::vec![Rational::zero(); dim * dim])?;
        for (i, v) in values.iter().enumerate() {
            m.entries[i * dim + i] = v.clone();
        }
        Ok(m)
    }

    /// `I + value * E_ij` (0-based indices).
    pub fn elementary(dim: usize, i: usize, j: usize, value: Rational) -> Self {
        let mut m = Self::identity(dim);
        m.entries[i * dim + j] += value;
        m
    }

    /// Upper unitriangular 3x3 matrix with `(1,2) = x`, `(1,3) = y`, `(2,3) = z`.
    pub fn unitriangular(x: Rational, y: Rational, z: Rational) -> Self {
        let mut m = Self::identity(3);
        m.entries[1] = x;
        m.entries[2] = y;
        m.entries[5] = z;
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                let v = self.get(i, j);
                if i == j {
                    v.is_one()
                } else {
                    v.is_zero()
                }
            })
        })
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(self.get(j, i).clone());
            }
        }
        Self { dim: d, entries }
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: rhs.dim });
        }
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = Rational::zero();
                for k in 0..d {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    acc += a * b;
                }
                entries.push(acc);
            }
        }
        Ok(Self { dim: d, entries })
    }

    /// Determinant by plain Gaussian elimination over the rationals.
    pub fn det(&self) -> Rational {
        let d = self.dim;
        let mut a = self.entries.clone();
        let mut det = Rational::one();
        for col in 0..d {
            let Some(pivot) = (col..d).find(|&r| !a[r * d + col].is_zero()) else {
                return Rational::zero();
            };
            if pivot != col {
                for k in 0..d {
                    a.swap(pivot * d + k, col * d + k);
                }
                det = -det;
            }
            let p = a[col * d + col].clone();
            det *= &p;
            for r in (col + 1)..d {
                if a[r * d + col].is_zero() {
                    continue;
                }
                let f = &a[r * d + col] / &p;
                for k in col..d {
                    let sub = &f * &a[col * d + k];
                    a[r * d + k] -= sub;
                }
            }
        }
        det
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.dim;
        let mut a = self.entries.clone();
        let mut inv = Self::identity(d).entries;
        for col in 0..d {
            let pivot = (col..d).find(|&r| !a[r * d + col].is_zero()).ok_or(Error::Singular)?;
            if pivot != col {
                for k in 0..d {
                    a.swap(pivot * d + k, col * d + k);
                    inv.swap(pivot * d + k, col * d + k);
                }
            }
            let p = a[col * d + col].clone();
            if !p.is_one() {
                for k in 0..d {
                    a[col * d + k] /= &p;
                    inv[col * d + k] /= &p;
                }
            }
            for r in 0..d {
                if r == col || a[r * d + col].is_zero() {
                    continue;
                }
                let f = a[r * d + col].clone();
                for k in 0..d {
                    let s1 = &f * &a[col * d + k];
                    a[r * d + k] -= s1;
                    let s2 = &f * &inv[col * d + k];
                    inv[r * d + k] -= s2;
                }
            }
        }
        Ok(Self { dim: d, entries: inv })
    }

    /// `self^n`, negative exponents through the exact inverse.
    pub fn pow(&self, n: i64) -> Result<Self> {
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::identity(self.dim);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Exact squared Frobenius norm `sum g_ij^2`.
    pub fn frobenius_norm_sq(&self) -> Rational {
        self.entries.iter().map(|v| v * v).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(rational::to_f64).collect()
    }

    /// `(g^{-1})^T`, the matrix of the dual representation.
    pub fn inverse_transpose(&self) -> Result<Self> {
        Ok(self.inverse()?.transpose())
    }

    pub fn max_abs_entry(&self) -> Rational {
        self.entries.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero)
    }
}

impl Mul for &RationalMatrix {
    type Output = RationalMatrix;

    fn mul(self, rhs: &RationalMatrix) -> RationalMatrix {
        self.try_mul(rhs).expect("matrix dimensions must agree")
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.dim {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", rational::to_string(self.get(i, j)))?;
            }
        }
        write!(f, "]")
    }
}
