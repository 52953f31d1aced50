//! Certified singular values and Cartan projections for `d <= 4`.
//!
//! Singular values come from one-sided cyclic Jacobi (Hestenes), which is the
//! Jacobi eigen-iteration on `g^T g` with the rotations applied to the columns
//! of `g` instead of to the Gram matrix. Because every group element has an
//! exact rational inverse, the small end of the spectrum is read off
//! `g^{-1}` (`sigma_{d+1-i}(g) = 1 / sigma_i(g^{-1})`) whenever that route has
//! the better relative accuracy.

use alloc::vec::Vec;

use crate::dense::{self, Mat, Vector, MAX};
use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::rational;

/// Off-diagonal threshold, relative to `sqrt(a_pp a_qq)` of the implicit Gram matrix.
const JACOBI_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriple {
    /// Descending, positive.
    pub sigma: Vec<f64>,
    /// Absolute error bound per entry derived from the off-diagonal residual
    /// after the last sweep. Floating-point roundoff is not included.
    pub certified_error: f64,
}

impl SingularTriple {
    pub fn gap(&self) -> f64 {
        self.sigma[0] / self.sigma[1]
    }

    pub fn product(&self) -> f64 {
        self.sigma.iter().product()
    }
}

/// `mu(g) = (log sigma_1, ..., log sigma_d)`, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanVector {
    pub mu: Vec<f64>,
}

impl CartanVector {
    /// `-reverse(mu)`, the Cartan projection of the inverse.
    pub fn opposite(&self) -> Self {
        Self { mu: self.mu.iter().rev().map(|m| -m).collect() }
    }

    pub fn sum(&self) -> f64 {
        self.mu.iter().sum()
    }
}

pub(crate) struct Hestenes {
    pub sigma: Vector,
    pub left: Mat,
    pub right: Mat,
    pub residual: f64,
}

/// One-sided Jacobi on the columns of `a`. Singular values come out sorted
/// descending with matching columns of `left`/`right`.
pub(crate) fn hestenes(a: &Mat) -> Hestenes {
    let n = a.n;
    let mut b = *a;
    let mut v = Mat::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    alpha += b.a[i][p] * b.a[i][p];
                    beta += b.a[i][q] * b.a[i][q];
                    gamma += b.a[i][p] * b.a[i][q];
                }
                if gamma == 0.0 || libm::fabs(gamma) <= JACOBI_TOL * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if libm::fabs(zeta) > 1e150 {
                    0.5 / zeta
                } else {
                    libm::copysign(1.0, zeta) / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..n {
                    let (bp, bq) = (b.a[i][p], b.a[i][q]);
                    b.a[i][p] = c * bp - s * bq;
                    b.a[i][q] = s * bp + c * bq;
                    let (vp, vq) = (v.a[i][p], v.a[i][q]);
                    v.a[i][p] = c * vp - s * vq;
                    v.a[i][q] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut off = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                let g: f64 = (0..n).map(|i| b.a[i][p] * b.a[i][q]).sum();
                off += g * g;
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    let mut sig = [0.0; MAX];
    for (j, s) in sig.iter_mut().enumerate().take(n) {
        *s = dense::norm(n, &b.column(j));
    }
    order[..n].sort_by(|&i, &j| sig[j].partial_cmp(&sig[i]).unwrap_or(core::cmp::Ordering::Equal));

    let mut out = Hestenes {
        sigma: [0.0; MAX],
        left: Mat::zeros(n),
        right: Mat::zeros(n),
        residual: libm::sqrt(off),
    };
    for (k, &j) in order[..n].iter().enumerate() {
        out.sigma[k] = sig[j];
        for i in 0..n {
            out.right.a[i][k] = v.a[i][j];
            out.left.a[i][k] = if sig[j] > 0.0 { b.a[i][j] / sig[j] } else { 0.0 };
        }
    }
    out
}

/// Full data used by the flag and scan modules.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularDecomposition {
    pub values: SingularTriple,
    /// `u_1`: top left-singular direction.
    pub top_left: Vec<f64>,
    /// `v_1`: top right-singular direction.
    pub top_right: Vec<f64>,
    /// `u_d`: bottom left-singular direction.
    pub bottom_left: Vec<f64>,
    /// `v_d`: bottom right-singular direction.
    pub bottom_right: Vec<f64>,
}

pub fn decompose(g: &RationalMatrix) -> Result<SingularDecomposition> {
    let inv = g.inverse()?;
    Ok(decompose_pair(&Mat::from_rational(g), &Mat::from_rational(&inv)))
}

/// Decomposition of a matrix given together with its inverse.
pub(crate) fn decompose_pair(a: &Mat, a_inv: &Mat) -> SingularDecomposition {
    let n = a.n;
    let fwd = hestenes(a);
    let bwd = hestenes(a_inv);
    let mut sigma = Vec::with_capacity(n);
    let mut err: f64 = 0.0;
    for i in 0..n {
        let j = n - 1 - i;
        let direct = fwd.sigma[i];
        let via_inverse = 1.0 / bwd.sigma[j];
        // relative accuracy of each route is ~ eps * (largest / this one)
        let direct_cond = fwd.sigma[0] / direct;
        let inverse_cond = bwd.sigma[0] / bwd.sigma[j];
        if direct_cond <= inverse_cond {
            sigma.push(direct);
            err = err.max(fwd.residual / direct);
        } else {
            sigma.push(via_inverse);
            let t = bwd.sigma[j];
            err = err.max(bwd.residual / (t * t * t));
        }
    }
    sigma.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    let col = |m: &Mat, j: usize| m.column(j)[..n].to_vec();
    SingularDecomposition {
        values: SingularTriple { sigma, certified_error: err },
        top_left: col(&fwd.left, 0),
        top_right: col(&fwd.right, 0),
        bottom_left: col(&bwd.right, 0),
        bottom_right: col(&bwd.left, 0),
    }
}

pub fn singular_values(g: &RationalMatrix) -> Result<SingularTriple> {
    Ok(decompose(g)?.values)
}

/// `sigma_1 / sigma_2`.
pub fn gap_ratio(g: &RationalMatrix) -> Result<f64> {
    Ok(singular_values(g)?.gap())
}

pub fn cartan_projection(g: &RationalMatrix) -> Result<CartanVector> {
    let s = singular_values(g)?;
    Ok(CartanVector { mu: s.sigma.iter().map(|&x| libm::log(x)).collect() })
}

/// Bracket `[lower, upper]` for `sigma_1/sigma_2` of a 3x3 determinant-one
/// matrix from exact Frobenius norms of `g` and `g^{-1}`:
/// `sigma_1/sigma_2 = sigma_1(g)^2 / sigma_1(g^{-1})` and
/// `|g|_F / sqrt(3) <= sigma_1(g) <= |g|_F`.
pub fn sigma_gap_bounds(g: &RationalMatrix) -> Result<(f64, f64)> {
    if g.dim() != 3 {
        return Err(Error::Precondition(alloc::format!(
            "gap bounds need d = 3, got {}",
            g.dim()
        )));
    }
    let q = rational::to_f64(&g.frobenius_norm_sq());
    let q_inv = rational::to_f64(&g.inverse()?.frobenius_norm_sq());
    let sqrt3 = libm::sqrt(3.0);
    Ok((q / (3.0 * libm::sqrt(q_inv)), sqrt3 * q / libm::sqrt(q_inv)))
}
