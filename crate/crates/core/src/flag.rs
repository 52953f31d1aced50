//! Projective points, hyperplanes and point-hyperplane flags in `P(R^d)`,
//! with the Fubini-Study metric and opposition tests.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::dense::{self, Mat};
use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::rational::Rational;
use crate::svd;

/// Default threshold separating incidence from opposition on unit data.
pub const OPPOSITION_EPS: f64 = 1e-9;

/// Gap ratio below which a matrix is treated as having no contraction axis.
pub const MIN_GAP: f64 = 1.0 + 1e-9;

fn canonical(mut v: Vec<f64>) -> Result<Vec<f64>> {
    let n = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Degenerate("zero or non-finite projective representative".into()));
    }
    for x in v.iter_mut() {
        *x /= n;
    }
    if let Some(first) = v.iter().find(|x| libm::fabs(**x) > 1e-12) {
        if *first < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
    Ok(v)
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Angle between the lines spanned by two unit vectors. Uses the chord length
/// rather than `acos` so tiny angles keep full precision.
pub(crate) fn line_angle(u: &[f64], v: &[f64]) -> f64 {
    let s = if dot(u, v) < 0.0 { -1.0 } else { 1.0 };
    let chord = libm::sqrt(u.iter().zip(v).map(|(a, b)| (a - s * b) * (a - s * b)).sum::<f64>());
    2.0 * libm::asin((chord / 2.0).min(1.0))
}

/// A point of `P(R^d)`: unit representative, first nonzero coordinate positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint {
    direction: Vec<f64>,
}

impl ProjPoint {
    pub fn new(coords: &[f64]) -> Result<Self> {
        Ok(Self { direction: canonical(coords.to_vec())? })
    }

    /// Basis vector `e_i` (0-based).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = alloc::vec![0.0; dim];
        v[i] = 1.0;
        Self { direction: v }
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.direction
    }

    /// Image under a matrix. Errors when `g p = 0` numerically.
    pub fn transform(&self, g: &RationalMatrix) -> Result<Self> {
        let m = Mat::from_rational(g);
        self.transform_dense(&m)
    }

    pub(crate) fn transform_dense(&self, m: &Mat) -> Result<Self> {
        let v = m.apply(&dense::from_slice(&self.direction));
        Self::new(&v[..m.n])
    }
}

/// A hyperplane of `P(R^d)`, stored as the projective class of its conormal.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjHyperplane {
    conormal: Vec<f64>,
}

impl ProjHyperplane {
    pub fn new(conormal: &[f64]) -> Result<Self> {
        Ok(Self { conormal: canonical(conormal.to_vec())? })
    }

    /// `ker e_i^T`.
    pub fn kernel_of_basis(dim: usize, i: usize) -> Self {
        Self { conormal: ProjPoint::basis(dim, i).direction }
    }

    pub fn dim(&self) -> usize {
        self.conormal.len()
    }

    pub fn conormal(&self) -> &[f64] {
        &self.conormal
    }

    /// `|<conormal, p>|` for unit data; zero iff `p` lies on the hyperplane.
    pub fn incidence(&self, p: &ProjPoint) -> Result<f64> {
        check_dims(self.dim(), p.dim())?;
        Ok(libm::fabs(dot(&self.conormal, &p.direction)))
    }
}

/// Incident (point, hyperplane) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjFlag {
    pub point: ProjPoint,
    pub hyperplane: ProjHyperplane,
}

impl ProjFlag {
    /// Requires `|conormal(point)| <= 1e-9`.
    pub fn new(point: ProjPoint, hyperplane: ProjHyperplane) -> Result<Self> {
        let inc = hyperplane.incidence(&point)?;
        if inc > OPPOSITION_EPS {
            return Err(Error::Precondition(alloc::format!(
                "point is not on the hyperplane (|c(p)| = {inc:e})"
            )));
        }
        Ok(Self { point, hyperplane })
    }

    /// Builds a flag from numerically computed data, projecting the point onto
    /// the hyperplane. The correction must be small (`<= 1e-6`).
    pub fn from_numeric(point: &[f64], conormal: &[f64]) -> Result<Self> {
        let hyperplane = ProjHyperplane::new(conormal)?;
        let p = canonical(point.to_vec())?;
        let c = hyperplane.conormal();
        let t = dot(c, &p);
        if libm::fabs(t) > 1e-6 {
            return Err(Error::Precondition(alloc::format!(
                "numeric flag data far from incident (|c(p)| = {t:e})"
            )));
        }
        let projected: Vec<f64> = p.iter().zip(c).map(|(x, ci)| x - t * ci).collect();
        Ok(Self { point: ProjPoint::new(&projected)?, hyperplane })
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    /// Distance between flags: the larger of the point and hyperplane angles.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        let dp = line_angle(&self.point.direction, &other.point.direction);
        let dh = line_angle(&self.hyperplane.conormal, &other.hyperplane.conormal);
        Ok(dp.max(dh))
    }
}

/// Attracting and repelling flags of a matrix with a singular-value gap.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionLimit {
    /// `(u_1, span(u_1..u_{d-1}))`.
    pub attracting: ProjFlag,
    /// `(v_d, span(v_2..v_d))`: the point is where `g^{-1}` attracts, the
    /// hyperplane is the set `g` fails to contract.
    pub repelling: ProjFlag,
}

pub fn fs_distance(p: &ProjPoint, q: &ProjPoint) -> Result<f64> {
    check_dims(p.dim(), q.dim())?;
    Ok(line_angle(&p.direction, &q.direction))
}

/// `min(|c'(p)|, |c(p')|)`: positive iff the flags are opposite.
pub fn opposition_margin(f: &ProjFlag, g: &ProjFlag) -> Result<f64> {
    let a = g.hyperplane.incidence(&f.point)?;
    let b = f.hyperplane.incidence(&g.point)?;
    Ok(a.min(b))
}

pub fn flag_opposite(f: &ProjFlag, g: &ProjFlag) -> Result<bool> {
    Ok(opposition_margin(f, g)? > OPPOSITION_EPS)
}

/// All-pairs opposition between two flag lists, with the minimum margin.
pub fn antipodal_sets(a: &[ProjFlag], b: &[ProjFlag]) -> Result<(bool, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("flag list"));
    }
    let mut min = f64::INFINITY;
    for f in a {
        for g in b {
            min = min.min(opposition_margin(f, g)?);
        }
    }
    Ok((min > OPPOSITION_EPS, min))
}

pub fn attracting_flag(g: &RationalMatrix) -> Result<ContractionLimit> {
    let dec = svd::decompose(g)?;
    contraction_from(&dec)
}

pub(crate) fn contraction_from(dec: &svd::SingularDecomposition) -> Result<ContractionLimit> {
    let gap = dec.values.gap();
    if !(gap > MIN_GAP) {
        return Err(Error::NoContractionAxis(gap));
    }
    Ok(ContractionLimit {
        attracting: ProjFlag::from_numeric(&dec.top_left, &dec.bottom_left)?,
        repelling: ProjFlag::from_numeric(&dec.bottom_right, &dec.top_right)?,
    })
}

/// Limit of the attracting flags of `g^{2^s}` as `s` grows: the attracting
/// point comes from normalized powers of `g`, the hyperplane from normalized
/// powers of `g^{-T}`. Both are top singular directions, so neither depends
/// on resolving tiny singular values. Falls back to `attracting_flag(g)` when
/// the powers do not settle within 64 squarings.
pub fn cyclic_limit_flag(g: &RationalMatrix) -> Result<ProjFlag> {
    let inv = g.inverse()?;
    let mut p = Mat::from_rational(g);
    let mut q = Mat::from_rational(&inv).transpose();
    let mut prev: Option<ProjFlag> = None;
    for _ in 0..64 {
        let norm_p = p.frobenius();
        let norm_q = q.frobenius();
        p.scale(1.0 / norm_p);
        q.scale(1.0 / norm_q);
        let point = svd::hestenes(&p).left.column(0);
        let conormal = svd::hestenes(&q).left.column(0);
        let n = p.n;
        if let Ok(flag) = ProjFlag::from_numeric(&point[..n], &conormal[..n]) {
            if let Some(old) = &prev {
                if flag.distance(old)? < 1e-12 {
                    return Ok(flag);
                }
            }
            prev = Some(flag);
        }
        p = p.mul(&p);
        q = q.mul(&q);
    }
    Ok(attracting_flag(g)?.attracting)
}

/// Chart `P(R^d) \ P(ker c)`: `p -> (p_i / c(p))` for the coordinates other
/// than the last index where `c` is nonzero.
pub fn affine_chart(excluded: &ProjHyperplane, p: &ProjPoint) -> Result<Vec<f64>> {
    let c = excluded.conormal();
    check_dims(c.len(), p.dim())?;
    let t = dot(c, p.coords());
    if libm::fabs(t) <= OPPOSITION_EPS {
        return Err(Error::AtInfinity);
    }
    let skip = c.iter().rposition(|x| libm::fabs(*x) > 1e-12).unwrap_or(0);
    Ok(p.coords().iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, x)| x / t).collect())
}

/// Exact variant of [`affine_chart`] on rational homogeneous coordinates.
pub fn affine_chart_exact(conormal: &[Rational], p: &[Rational]) -> Result<Vec<Rational>> {
    check_dims(conormal.len(), p.len())?;
    let t: Rational = conormal.iter().zip(p).map(|(a, b)| a * b).sum();
    if t.is_zero() {
        return Err(Error::AtInfinity);
    }
    let skip = conormal.iter().rposition(|x| !x.is_zero()).unwrap_or(0);
    Ok(p.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, x)| x / &t).collect())
}

/// `g` applied to rational homogeneous coordinates.
pub fn apply_exact(g: &RationalMatrix, p: &[Rational]) -> Vec<Rational> {
    let d = g.dim();
    (0..d).map(|i| (0..d).map(|k| g.get(i, k) * &p[k]).sum()).collect()
}
