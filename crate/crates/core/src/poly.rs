//! Characteristic polynomials and certified root enclosures.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::matrix::RationalMatrix;
use crate::rational::{self, int, Rational};

/// Coefficients of `det(tI - g)`, lowest degree first (monic).
/// Faddeev-LeVerrier in exact arithmetic.
pub fn charpoly(g: &RationalMatrix) -> Vec<Rational> {
    let n = g.dim();
    let mut c = vec![Rational::zero(); n + 1];
    c[n] = Rational::one();
    let mut m = RationalMatrix::identity(n);
    for k in 1..=n {
        let am = g * &m;
        let tr: Rational = (0..n).map(|i| am.get(i, i).clone()).sum();
        c[n - k] = -tr / int(k as i64);
        m = am;
        for i in 0..n {
            let v = m.get(i, i) + &c[n - k];
            m.set(i, i, v);
        }
    }
    c
}

/// A root approximation with a disc guaranteed to contain a root. Discs
/// that are disjoint from all others contain exactly one root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootDisc {
    pub center: Complex64,
    pub radius: f64,
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of a polynomial (lowest degree first, nonzero leading term) by
/// Aberth-Ehrlich iteration, each with the inclusion radius
/// `n |p(z_j)| / |a_n prod_{k != j} (z_j - z_k)|`, with `|p(z_j)|` replaced
/// by an upper bound that covers floating-point evaluation error.
pub fn roots(coeffs: &[Rational]) -> Vec<RootDisc> {
    let mut coeffs: Vec<f64> = coeffs.iter().map(rational::to_f64).collect();
    while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
        coeffs.pop();
    }
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let a: Vec<Complex64> = coeffs.iter().map(|c| Complex64::new(c / lead, 0.0)).collect();
    // Cauchy bound
    let bound = 1.0 + a[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * core::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(bound * 0.5, theta)
        })
        .collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for j in 0..n {
            let (p, dp) = horner(&a, z[j]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::zero();
            for k in 0..n {
                if k != j {
                    s += (z[j] - z[k]).inv();
                }
            }
            let w = ratio / (Complex64::one() - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[j] -= w;
                moved = moved.max(w.norm() / z[j].norm().max(1e-300));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
    (0..n)
        .map(|j| {
            let (p, _) = horner(&a, z[j]);
            // running-error bound for Horner plus coefficient rounding
            let zn = z[j].norm();
            let magnitude = a.iter().rev().fold(0.0, |acc, c| acc * zn + c.norm());
            let p_bound = p.norm() + 4.0 * (n as f64 + 1.0) * f64::EPSILON * magnitude;
            let mut prod = Complex64::one();
            for k in 0..n {
                if k != j {
                    prod *= z[j] - z[k];
                }
            }
            let radius = n as f64 * p_bound / prod.norm();
            let radius = if radius.is_finite() { radius } else { f64::INFINITY };
            RootDisc { center: z[j], radius: radius + 4.0 * f64::EPSILON * z[j].norm() }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn charpoly_of_diagonal() {
        let g = RationalMatrix::diag(&[int(4), int(1), frac(1, 4)]).unwrap();
        // (t - 4)(t - 1)(t - 1/4) = t^3 - 21/4 t^2 + 21/4 t - 1
        assert_eq!(charpoly(&g), vec![int(-1), frac(21, 4), frac(-21, 4), int(1)]);
    }

    #[test]
    fn charpoly_matches_determinant() {
        let g = RationalMatrix::from_i64(3, &[2, 1, 0, 1, 1, 3, 0, -1, 5]).unwrap();
        let c = charpoly(&g);
        // c(0) = det(-g) = -det(g)
        assert_eq!(c[0], -g.det());
        let tr: Rational = (0..3).map(|i| g.get(i, i).clone()).sum();
        assert_eq!(c[2], -tr);
    }

    #[test]
    fn roots_enclose_known_values() {
        let g = RationalMatrix::diag(&[int(4), int(1), frac(1, 4)]).unwrap();
        let mut r = roots(&charpoly(&g));
        r.sort_by(|a, b| b.center.norm().partial_cmp(&a.center.norm()).unwrap());
        for (disc, exact) in r.iter().zip([4.0, 1.0, 0.25]) {
            assert!((disc.center - Complex64::new(exact, 0.0)).norm() <= disc.radius.max(1e-12));
            assert!(disc.radius < 1e-9);
        }
    }

    #[test]
    fn rotation_roots_on_unit_circle() {
        let g = RationalMatrix::from_i64(3, &[0, -1, 0, 1, 0, 0, 0, 0, 1]).unwrap();
        for disc in roots(&charpoly(&g)) {
            assert!((disc.center.norm() - 1.0).abs() <= disc.radius + 1e-12);
        }
    }
}
