//! Fixed-capacity `f64` matrices and vectors for `n <= 4`.

use crate::matrix::RationalMatrix;
use crate::rational;

pub(crate) const MAX: usize = 4;

pub(crate) type Vector = [f64; MAX];

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Mat {
    pub n: usize,
    pub a: [[f64; MAX]; MAX],
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: [[0.0; MAX]; MAX] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn from_rational(g: &RationalMatrix) -> Self {
        let n = g.dim();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = rational::to_f64(g.get(i, j));
            }
        }
        m
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.a[i][k] * rhs.a[k][j];
                }
                m.a[i][j] = acc;
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] = self.a[j][i];
            }
        }
        m
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        let mut out = [0.0; MAX];
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            *o = (0..self.n).map(|k| self.a[i][k] * v[k]).sum();
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.a[i][j] * self.a[i][j];
            }
        }
        libm::sqrt(s)
    }

    pub fn scale(&mut self, f: f64) {
        for i in 0..self.n {
            for j in 0..self.n {
                self.a[i][j] *= f;
            }
        }
    }

    pub fn column(&self, j: usize) -> Vector {
        let mut v = [0.0; MAX];
        for (i, x) in v.iter_mut().enumerate().take(self.n) {
            *x = self.a[i][j];
        }
        v
    }
}

pub(crate) fn dot(n: usize, u: &Vector, v: &Vector) -> f64 {
    (0..n).map(|i| u[i] * v[i]).sum()
}

pub(crate) fn norm(n: usize, v: &Vector) -> f64 {
    libm::sqrt(dot(n, v, v))
}

pub(crate) fn from_slice(v: &[f64]) -> Vector {
    let mut out = [0.0; MAX];
    out[..v.len()].copy_from_slice(v);
    out
}
