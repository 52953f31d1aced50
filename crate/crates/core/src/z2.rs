//! Regularity of `Z^2` representations into the upper unitriangular group of
//! `SL_3`, with constructive witnesses for the non-regular cases.
//!
//! A representation is given by the images of the two generators,
//! `x -> [[1, a_x, b_x], [0, 1, c_x], [0, 0, 1]]` and likewise for `y`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::rational::{self, int, Rational};
use crate::svd;
use crate::word::{GroupWord, Generators};

/// Entries `(1,2), (1,3), (2,3)` of an upper unitriangular 3x3 matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnipotentTriple {
    pub x: Rational,
    pub y: Rational,
    pub z: Rational,
}

impl UnipotentTriple {
    pub fn new(x: Rational, y: Rational, z: Rational) -> Self {
        Self { x, y, z }
    }

    pub fn from_i64(x: i64, y: i64, z: i64) -> Self {
        Self::new(int(x), int(y), int(z))
    }

    pub fn to_matrix(&self) -> RationalMatrix {
        RationalMatrix::unitriangular(self.x.clone(), self.y.clone(), self.z.clone())
    }

    pub fn from_matrix(m: &RationalMatrix) -> Result<Self> {
        if m.dim() != 3 {
            return Err(Error::DimensionMismatch { left: m.dim(), right: 3 });
        }
        let unitriangular = (0..3).all(|i| m.get(i, i).is_one())
            && m.get(1, 0).is_zero()
            && m.get(2, 0).is_zero()
            && m.get(2, 1).is_zero();
        if !unitriangular {
            return Err(Error::Precondition("matrix is not upper unitriangular".into()));
        }
        Ok(Self::new(m.get(0, 1).clone(), m.get(0, 2).clone(), m.get(1, 2).clone()))
    }
}

/// `(x^2 + y^2 + z^2) / (|x| + |z| + |xz - y|)`, comparable to `sigma1/sigma2`.
pub fn lemma1div_ratio(t: &UnipotentTriple) -> Result<Rational> {
    let den = t.x.abs() + t.z.abs() + (&t.x * &t.z - &t.y).abs();
    if den.is_zero() {
        return Err(Error::RatioUndefinedAtIdentity);
    }
    Ok((&t.x * &t.x + &t.y * &t.y + &t.z * &t.z) / den)
}

/// A `Z^2` representation in unitriangular normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Z2UnipotentRep {
    a_x: Rational,
    b_x: Rational,
    c_x: Rational,
    a_y: Rational,
    b_y: Rational,
    c_y: Rational,
    lambda: Option<Rational>,
    big_b_x: Rational,
    big_b_y: Rational,
    z_xy: Option<Rational>,
}

fn half() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2))
}

impl Z2UnipotentRep {
    pub fn new(x: UnipotentTriple, y: UnipotentTriple) -> Result<Self> {
        if &x.x * &y.z != &y.x * &x.z {
            return Err(Error::NotZ2);
        }
        let big_b_x = &x.y - &x.x * &x.x * half();
        let big_b_y = &y.y - &y.x * &y.x * half();
        let (lambda, z_xy) = if x.x.is_zero() {
            (None, None)
        } else {
            let z = int(2) * (&big_b_y - &y.x / &x.x * &big_b_x);
            (Some(&x.z / &x.x), Some(z))
        };
        Ok(Self {
            a_x: x.x,
            b_x: x.y,
            c_x: x.z,
            a_y: y.x,
            b_y: y.y,
            c_y: y.z,
            lambda,
            big_b_x,
            big_b_y,
            z_xy,
        })
    }

    /// `(a_x, b_x, c_x, a_y, b_y, c_y)`.
    pub fn from_i64(p: [i64; 6]) -> Result<Self> {
        Self::new(UnipotentTriple::from_i64(p[0], p[1], p[2]), UnipotentTriple::from_i64(p[3], p[4], p[5]))
    }

    pub fn x(&self) -> UnipotentTriple {
        UnipotentTriple::new(self.a_x.clone(), self.b_x.clone(), self.c_x.clone())
    }

    pub fn y(&self) -> UnipotentTriple {
        UnipotentTriple::new(self.a_y.clone(), self.b_y.clone(), self.c_y.clone())
    }

    pub fn a_x(&self) -> &Rational {
        &self.a_x
    }
    pub fn b_x(&self) -> &Rational {
        &self.b_x
    }
    pub fn c_x(&self) -> &Rational {
        &self.c_x
    }
    pub fn a_y(&self) -> &Rational {
        &self.a_y
    }
    pub fn b_y(&self) -> &Rational {
        &self.b_y
    }
    pub fn c_y(&self) -> &Rational {
        &self.c_y
    }

    /// `c_x / a_x` when `a_x != 0`.
    pub fn lambda(&self) -> Option<&Rational> {
        self.lambda.as_ref()
    }

    pub fn big_b_x(&self) -> &Rational {
        &self.big_b_x
    }

    pub fn big_b_y(&self) -> &Rational {
        &self.big_b_y
    }

    /// `2 (B_y - (a_y / a_x) B_x)` when `a_x != 0`.
    pub fn z_xy(&self) -> Option<&Rational> {
        self.z_xy.as_ref()
    }

    pub fn generators(&self) -> Generators {
        let mut g = Generators::new();
        g.insert("x".into(), self.x().to_matrix());
        g.insert("y".into(), self.y().to_matrix());
        g
    }

    /// Logarithm coordinates `(a, b - ac/2, c)` of each generator.
    fn logs(&self) -> [[Rational; 3]; 2] {
        let log = |a: &Rational, b: &Rational, c: &Rational| [a.clone(), b - a * c * half(), c.clone()];
        [log(&self.a_x, &self.b_x, &self.c_x), log(&self.a_y, &self.b_y, &self.c_y)]
    }

    /// Exact image of `x^n y^m`, via `exp(n log X + m log Y)`.
    pub fn eval(&self, n: i64, m: i64) -> UnipotentTriple {
        let [lx, ly] = self.logs();
        let (n, m) = (int(n), int(m));
        let a = &n * &lx[0] + &m * &ly[0];
        let l = &n * &lx[1] + &m * &ly[1];
        let c = &n * &lx[2] + &m * &ly[2];
        let b = l + &a * &c * half();
        UnipotentTriple::new(a, b, c)
    }

    /// Conjugation by `diag(1, 1, lambda)`, after which `a = c` for both
    /// generators. Requires `a_x c_x != 0`.
    pub fn normalize(&self) -> Result<(Self, Rational)> {
        let lambda = match &self.lambda {
            Some(l) if !l.is_zero() => l.clone(),
            _ => return Err(Error::Precondition("normalization needs a_x * c_x != 0".into())),
        };
        let conj = |t: UnipotentTriple| UnipotentTriple::new(t.x, t.y / &lambda, t.z / &lambda);
        Ok((Self::new(conj(self.x()), conj(self.y()))?, lambda))
    }

    pub fn is_normalized(&self) -> bool {
        self.a_x == self.c_x && self.a_y == self.c_y
    }

    /// The dual representation (inverse transpose), conjugated back to upper
    /// triangular form by the antidiagonal permutation:
    /// `a' = -c`, `b' = ac - b`, `c' = -a`.
    pub fn dual(&self) -> Self {
        let d = |t: UnipotentTriple| UnipotentTriple::new(-&t.z, &t.x * &t.z - &t.y, -&t.x);
        Self::new(d(self.x()), d(self.y())).expect("dual of a commuting pair commutes")
    }
}

impl fmt::Display for Z2UnipotentRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = rational::to_string;
        write!(
            f,
            "({},{},{};{},{},{})",
            s(&self.a_x),
            s(&self.b_x),
            s(&self.c_x),
            s(&self.a_y),
            s(&self.b_y),
            s(&self.c_y)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerdictKind {
    RegularLatticeLineType,
    RegularLatticePlaneType,
    NotRegular,
    NotFaithfulOrNotDiscrete,
}

impl VerdictKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictKind::RegularLatticeLineType => "REGULAR_LATTICE_LINE_TYPE",
            VerdictKind::RegularLatticePlaneType => "REGULAR_LATTICE_PLANE_TYPE",
            VerdictKind::NotRegular => "NOT_REGULAR",
            VerdictKind::NotFaithfulOrNotDiscrete => "NOT_FAITHFUL_OR_NOT_DISCRETE",
        }
    }

    /// The kind expected for the dual representation.
    pub fn dual(&self) -> Self {
        match self {
            VerdictKind::RegularLatticeLineType => VerdictKind::RegularLatticePlaneType,
            VerdictKind::RegularLatticePlaneType => VerdictKind::RegularLatticeLineType,
            k => *k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WitnessKind {
    Claim2,
    Diagonal,
    Jordan,
    MixedReduced,
    ZZeroDiscreteness,
}

impl WitnessKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WitnessKind::Claim2 => "CLAIM2",
            WitnessKind::Diagonal => "DIAGONAL",
            WitnessKind::Jordan => "JORDAN",
            WitnessKind::MixedReduced => "MIXED_REDUCED",
            WitnessKind::ZZeroDiscreteness => "Z_ZERO_DISCRETENESS",
        }
    }
}

/// A change of coordinates applied before building a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalizationStep {
    /// Conjugation by `diag(1, 1, lambda)`.
    Lambda(Rational),
    /// New generators `x' = x^p y^q`, `y' = x^r y^s` for rows `[[p, q], [r, s]]`.
    BasisChange([[i64; 2]; 2]),
}

impl fmt::Display for NormalizationStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalizationStep::Lambda(l) => write!(f, "conjugate by diag(1,1,{})", rational::to_string(l)),
            NormalizationStep::BasisChange([[p, q], [r, s]]) => {
                write!(f, "basis x' = x^{p} y^{q}, y' = x^{r} y^{s}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Family {
    /// `t -> (n_m, m)` with `m = m_sign * t`, on a normalized working rep.
    Claim2 { working: Z2UnipotentRep, m_sign: i64 },
    /// `t -> t * step`.
    Multiples { step: (i64, i64) },
}

/// A closed-form family of group elements `x^n y^m` indexed by `t >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSequence {
    pub kind: WitnessKind,
    pub description: String,
    /// Claimed supremum of `sigma1/sigma2` along the family.
    pub bound: f64,
    family: Family,
    /// Exponents in the original generators are `basis^T (n, m)`.
    basis: [[i64; 2]; 2],
}

impl WitnessSequence {
    /// Exponents `(n, m)` of `x^n y^m` (original generators) for member `t`.
    pub fn exponents(&self, t: u64) -> Result<(i64, i64)> {
        let t = i64::try_from(t).map_err(|_| Error::Precondition("index too large".into()))?;
        let (n, m) = match &self.family {
            Family::Claim2 { working, m_sign } => {
                let m = m_sign * t;
                (witness_claim2(working, m)?.0, m)
            }
            Family::Multiples { step } => (step.0 * t, step.1 * t),
        };
        let [[p, q], [r, s]] = self.basis;
        Ok((n * p + m * r, n * q + m * s))
    }

    pub fn word(&self, t: u64) -> Result<GroupWord> {
        let (n, m) = self.exponents(t)?;
        Ok(GroupWord::from_pairs([("x", n), ("y", m)]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub witness: Option<WitnessSequence>,
    pub normalization: Vec<NormalizationStep>,
    /// A nontrivial `(n, m)` with `x^n y^m -> I`, when the image has rank < 2.
    pub kernel: Option<(i64, i64)>,
}

impl Verdict {
    fn plain(kind: VerdictKind) -> Self {
        Self { kind, witness: None, normalization: Vec::new(), kernel: None }
    }
}

/// Primitive integer vector `(n, m)` spanning the rational kernel of
/// `n u + m v = 0`, first nonzero component positive. `None` if `u = v = 0`.
fn null_vector(u: &Rational, v: &Rational) -> Option<(i64, i64)> {
    if u.is_zero() && v.is_zero() {
        return None;
    }
    // n u + m v = 0  with  (n, m) proportional to (v, -u)
    let l = u.denom().lcm(v.denom());
    let nv = (v * Rational::from(l.clone())).to_integer();
    let nu = -(u * Rational::from(l)).to_integer();
    let g = nv.gcd(&nu);
    let (mut n, mut m) = ((nv / &g).to_i64()?, (nu / &g).to_i64()?);
    if n < 0 || (n == 0 && m < 0) {
        n = -n;
        m = -m;
    }
    Some((n, m))
}

fn kernel_element(logs: &[[Rational; 3]; 2]) -> Option<(i64, i64)> {
    let [lx, ly] = logs;
    if lx.iter().all(Zero::is_zero) {
        return Some((1, 0));
    }
    let i = lx.iter().position(|v| !v.is_zero())?;
    // ly = s lx, and then x^{-s} y is trivial
    null_vector(&lx[i], &ly[i])
}

fn rank_below_two(logs: &[[Rational; 3]; 2]) -> bool {
    let [u, v] = logs;
    let minor = |i: usize, j: usize| &u[i] * &v[j] - &u[j] * &v[i];
    minor(0, 1).is_zero() && minor(0, 2).is_zero() && minor(1, 2).is_zero()
}

fn has_ac(t: &UnipotentTriple) -> bool {
    !t.x.is_zero() && !t.z.is_zero()
}

fn central(t: &UnipotentTriple) -> bool {
    t.x.is_zero() && t.z.is_zero()
}

/// Decides regularity of the representation. Regular exactly for lattices in
/// a minimal horospherical subgroup (all `a` zero, or all `c` zero).
pub fn classify_z2(rep: &Z2UnipotentRep) -> Result<Verdict> {
    let logs = rep.logs();
    let (x, y) = (rep.x(), rep.y());
    if has_ac(&x) && has_ac(&y) {
        // after normalization Z = 0 exactly when the image has rank < 2
        let mut v = claim2_verdict(rep, rep, [[1, 0], [0, 1]], Vec::new(), WitnessKind::Claim2)?;
        if v.kind == VerdictKind::NotFaithfulOrNotDiscrete {
            v.kernel = kernel_element(&logs);
        }
        return Ok(v);
    }
    if rank_below_two(&logs) {
        let mut v = Verdict::plain(VerdictKind::NotFaithfulOrNotDiscrete);
        v.kernel = kernel_element(&logs);
        return Ok(v);
    }
    if rep.a_x.is_zero() && rep.a_y.is_zero() {
        return Ok(Verdict::plain(VerdictKind::RegularLatticePlaneType));
    }
    if rep.c_x.is_zero() && rep.c_y.is_zero() {
        return Ok(Verdict::plain(VerdictKind::RegularLatticeLineType));
    }
    if (central(&x) && has_ac(&y)) || (central(&y) && has_ac(&x)) {
        let (reduced, basis) = reduce_mixed(rep)?;
        let steps = alloc::vec![NormalizationStep::BasisChange(basis)];
        return claim2_verdict(rep, &reduced, basis, steps, WitnessKind::MixedReduced);
    }
    // The commutation relation rules out every other pattern of zeros.
    Err(Error::Degenerate(format!("unexpected normal form {rep}")))
}

fn claim2_verdict(
    original: &Z2UnipotentRep,
    rep: &Z2UnipotentRep,
    basis: [[i64; 2]; 2],
    mut steps: Vec<NormalizationStep>,
    kind: WitnessKind,
) -> Result<Verdict> {
    let (working, lambda) = rep.normalize()?;
    steps.push(NormalizationStep::Lambda(lambda));
    let z = working.z_xy().cloned().unwrap_or_default();
    let (vkind, witness) = if z.is_zero() {
        let pairs = witness_z_zero(&working)?;
        let step = pairs.step;
        let description = format!("x'^({}t) y'^({}t): |n a_x + m a_y| = 0, norm bounded", step.0, step.1);
        let w = WitnessSequence {
            kind: WitnessKind::ZZeroDiscreteness,
            description,
            bound: 0.0,
            family: Family::Multiples { step },
            basis,
        };
        (VerdictKind::NotFaithfulOrNotDiscrete, w)
    } else {
        let m_sign = if z.is_positive() { -1 } else { 1 };
        let description = format!(
            "x'^n_m y'^m, m = {}t, n_m = floor(-m a_y/a_x + sqrt|m Z|/a_x), Z = {}",
            m_sign,
            rational::to_string(&z)
        );
        let w = WitnessSequence { kind, description, bound: 0.0, family: Family::Claim2 { working, m_sign }, basis };
        (VerdictKind::NotRegular, w)
    };
    let mut witness = witness;
    witness.bound = estimate_bound(original, &witness)?;
    Ok(Verdict { kind: vkind, witness: Some(witness), normalization: steps, kernel: None })
}

/// Members sampled to estimate the supremum of `sigma1/sigma2`.
const BOUND_SAMPLES: [u64; 24] = [
    1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 16, 24, 32, 48, 64, 100, 128, 256, 512, 1000, 2048, 4096, 10000,
];

fn estimate_bound(rep: &Z2UnipotentRep, w: &WitnessSequence) -> Result<f64> {
    let mut sup: f64 = 1.0;
    for &t in &BOUND_SAMPLES {
        let (n, m) = w.exponents(t)?;
        sup = sup.max(svd::gap_ratio(&rep.eval(n, m).to_matrix())?);
    }
    Ok(f64::max(50.0, 4.0 * sup))
}

/// `n_m = floor(-m a_y / a_x + sqrt|m Z| / a_x)` and the image of
/// `x^{n_m} y^m`, for a normalized rep (`a = c` on both generators).
pub fn witness_claim2(rep: &Z2UnipotentRep, m: i64) -> Result<(i64, UnipotentTriple)> {
    if rep.a_x.is_zero() {
        return Err(Error::Precondition("witness_claim2 needs a_x != 0".into()));
    }
    if !rep.is_normalized() {
        return Err(Error::Precondition("witness_claim2 needs a normalized rep (a = c)".into()));
    }
    let z = rep.z_xy().cloned().unwrap_or_default();
    if z.is_zero() {
        return Err(Error::Precondition("witness_claim2 needs Z_xy != 0".into()));
    }
    if !(int(m) * &z).is_negative() {
        return Err(Error::Precondition("witness_claim2 needs m * Z_xy < 0".into()));
    }
    let target = (int(m) * &z).abs();
    let a_of = |n: i64| int(n) * &rep.a_x + int(m) * &rep.a_y;
    let ax_pos = rep.a_x.is_positive();
    // n <= q  <=>  a(n) <= sqrt|mZ| (a_x > 0)  or  a(n) >= sqrt|mZ| (a_x < 0)
    let pred = |n: i64| {
        let a = a_of(n);
        if ax_pos {
            rational::sqrt_ge(&target, &a)
        } else {
            rational::sqrt_le(&target, &a)
        }
    };
    let guess = {
        let ax = rational::to_f64(&rep.a_x);
        let q = (-(m as f64) * rational::to_f64(&rep.a_y) + libm::sqrt(rational::to_f64(&target))) / ax;
        if q.is_finite() && q.abs() < 1e15 {
            libm::floor(q) as i64
        } else {
            0
        }
    };
    let n = rational::monotone_sup(guess, pred);
    Ok((n, rep.eval(n, m)))
}

/// Integer pairs `t * (k, r)` with `k a_x + r a_y = 0`, which give a
/// norm-bounded family of distinct elements when `Z_xy = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairFamily {
    pub step: (i64, i64),
    next: i64,
}

impl PairFamily {
    fn new(step: (i64, i64)) -> Self {
        Self { step, next: 1 }
    }
}

impl Iterator for PairFamily {
    type Item = (i64, i64);

    fn next(&mut self) -> Option<(i64, i64)> {
        let t = self.next;
        self.next = t.checked_add(1)?;
        Some((self.step.0.checked_mul(t)?, self.step.1.checked_mul(t)?))
    }
}

pub fn witness_z_zero(rep: &Z2UnipotentRep) -> Result<PairFamily> {
    let z = match rep.z_xy() {
        None => return Err(Error::Precondition("witness_z_zero needs a_x != 0".into())),
        Some(z) => z,
    };
    if !z.is_zero() {
        return Err(Error::Precondition("witness_z_zero needs Z_xy = 0".into()));
    }
    let step = null_vector(&rep.a_x, &rep.a_y).ok_or_else(|| Error::Degenerate("a_x = a_y = 0".into()))?;
    Ok(PairFamily::new(step))
}

/// Rewrites a mixed rep (one generator with `a = c = 0`, the other with
/// `a c != 0`) on the basis `(xy, y)` or `(x, yx)`, so that both generators
/// have `a c != 0`. Returns the new rep and the basis change.
pub fn reduce_mixed(rep: &Z2UnipotentRep) -> Result<(Z2UnipotentRep, [[i64; 2]; 2])> {
    let (x, y) = (rep.x(), rep.y());
    let product = |p: &UnipotentTriple, q: &UnipotentTriple| {
        UnipotentTriple::new(&p.x + &q.x, &p.y + &q.y + &p.x * &q.z, &p.z + &q.z)
    };
    if central(&x) && has_ac(&y) {
        Ok((Z2UnipotentRep::new(product(&x, &y), y)?, [[1, 1], [0, 1]]))
    } else if central(&y) && has_ac(&x) {
        Ok((Z2UnipotentRep::new(x.clone(), product(&y, &x))?, [[1, 0], [1, 1]]))
    } else {
        Err(Error::Precondition(
            "reduce_mixed needs one generator with a = c = 0 and the other with a c != 0".into(),
        ))
    }
}

/// Inverse transpose of every generator.
pub fn dual_rep(generators: &Generators) -> Result<Generators> {
    let mut out = Generators::new();
    for (name, g) in generators {
        if g.dim() != 3 {
            return Err(Error::DimensionMismatch { left: g.dim(), right: 3 });
        }
        out.insert(name.clone(), g.inverse_transpose()?);
    }
    Ok(out)
}

/// Continued-fraction convergents `p/q` of a real number, stopping once the
/// remainder vanishes or the denominators leave `i64` comfort range.
fn convergents(x: f64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut v = x;
    for _ in 0..64 {
        let a = libm::floor(v);
        if !a.is_finite() || a.abs() > 1e15 {
            break;
        }
        let a = a as i128;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if h2.abs() > 1 << 40 || k2 > 1 << 40 {
            break;
        }
        out.push((h2 as i64, k2 as i64));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = v - a as f64;
        if frac.abs() < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    out
}

/// Pairs with bounded linear form `|n alpha + m beta| <= 1` and
/// `n l1 + m l2 -> +infinity`: first the usable continued-fraction
/// convergents, then multiples of the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalFamily {
    pub alpha: f64,
    pub beta: f64,
    head: Vec<(i64, i64)>,
    pos: usize,
    multiple: i64,
}

impl DiagonalFamily {
    pub fn linear_form(&self, n: i64, m: i64) -> f64 {
        n as f64 * self.alpha + m as f64 * self.beta
    }
}

impl Iterator for DiagonalFamily {
    type Item = (i64, i64);

    fn next(&mut self) -> Option<(i64, i64)> {
        if self.pos < self.head.len() {
            self.pos += 1;
            return Some(self.head[self.pos - 1]);
        }
        let last = *self.head.last()?;
        self.multiple = self.multiple.checked_add(1)?;
        Some((last.0.checked_mul(self.multiple)?, last.1.checked_mul(self.multiple)?))
    }
}

/// Bounded-gap family for commuting diagonal generators with eigenvalue
/// triples `lx`, `ly`. The linear form uses the first two entries.
pub fn witness_diagonal(lx: [f64; 3], ly: [f64; 3]) -> Result<DiagonalFamily> {
    if lx.iter().chain(&ly).any(|v| *v == 0.0 || !v.is_finite()) {
        return Err(Error::Degenerate("eigenvalues must be finite and nonzero".into()));
    }
    let alpha = libm::log(libm::fabs(lx[0] / lx[1]));
    let beta = libm::log(libm::fabs(ly[0] / ly[1]));
    let l1 = (libm::log(libm::fabs(lx[0])), libm::log(libm::fabs(ly[0])));
    const EPS: f64 = 1e-12;
    if alpha.abs() < EPS && beta.abs() < EPS {
        return Err(Error::Degenerate("both log-ratios vanish".into()));
    }
    // integer (n, m) nearly orthogonal to (alpha, beta)
    let raw: Vec<(i64, i64)> = if alpha.abs() >= beta.abs() {
        convergents(-beta / alpha)
    } else {
        convergents(-alpha / beta).into_iter().map(|(p, q)| (q, p)).collect()
    };
    let mut head = Vec::new();
    for (n, m) in raw {
        let form = n as f64 * alpha + m as f64 * beta;
        if form.abs() > 1.0 || (n == 0 && m == 0) {
            continue;
        }
        let growth = n as f64 * l1.0 + m as f64 * l1.1;
        if growth.abs() < EPS {
            continue;
        }
        head.push(if growth > 0.0 { (n, m) } else { (-n, -m) });
    }
    if head.is_empty() {
        return Err(Error::Degenerate("no diverging direction along the wall".into()));
    }
    Ok(DiagonalFamily { alpha, beta, head, pos: 0, multiple: 1 })
}

/// `[[lambda, alpha, 0], [0, lambda, 0], [0, 0, lambda^-2]]`, the shared
/// Jordan normal form of the non-diagonalizable commuting case.
pub fn jordan_matrix(lambda: &Rational, alpha: &Rational) -> Result<RationalMatrix> {
    if lambda.is_zero() {
        return Err(Error::Singular);
    }
    let z = Rational::zero();
    RationalMatrix::from_rows(&[
        alloc::vec![lambda.clone(), alpha.clone(), z.clone()],
        alloc::vec![z.clone(), lambda.clone(), z.clone()],
        alloc::vec![z.clone(), z, (lambda * lambda).recip()],
    ])
}

/// Pairs `t (n, m)` with `n / lx + m alpha_y / ly = 0` and
/// `|lx|^n |ly|^m -> infinity`, for `x = jordan_matrix(lx, 1)` and
/// `y = jordan_matrix(ly, alpha_y)`.
pub fn witness_jordan(lx: &Rational, ly: &Rational, alpha_y: &Rational) -> Result<PairFamily> {
    if lx.is_zero() || ly.is_zero() {
        return Err(Error::Singular);
    }
    let c1 = lx.recip();
    let c2 = alpha_y / ly;
    let (n, m) = null_vector(&c1, &c2).ok_or_else(|| Error::Degenerate("vanishing linear form".into()))?;
    let pow = |base: &Rational, e: i64| -> Result<Rational> {
        let e32 = i32::try_from(e).map_err(|_| Error::Degenerate("exponent overflow".into()))?;
        Ok(num_traits::pow::Pow::pow(base.abs(), e32))
    };
    let growth = pow(lx, n)? * pow(ly, m)?;
    let step = match growth.cmp(&Rational::one()) {
        core::cmp::Ordering::Greater => (n, m),
        core::cmp::Ordering::Less => (-n, -m),
        core::cmp::Ordering::Equal => {
            return Err(Error::Degenerate("no divergence: |lx|^n |ly|^m = 1 along the kernel".into()))
        }
    };
    Ok(PairFamily::new(step))
}

/// Minimum of `lemma1div_ratio` over `x^n y^m` with `|n| + |m| = r`, `r >= 1`.
pub fn min_sphere_ratio(rep: &Z2UnipotentRep, r: i64) -> Result<Rational> {
    if r < 1 {
        return Err(Error::Precondition("radius must be positive".into()));
    }
    let mut best: Option<Rational> = None;
    for n in -r..=r {
        let rest = r - n.abs();
        for m in if rest == 0 { alloc::vec![0] } else { alloc::vec![-rest, rest] } {
            let v = lemma1div_ratio(&rep.eval(n, m))?;
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
    }
    Ok(best.expect("sphere is nonempty"))
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn describe(verdict: &Verdict) -> String {
    match &verdict.witness {
        Some(w) => format!("{} ({}: {})", verdict.kind, w.kind, w.description),
        None => verdict.kind.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn ratio_examples() {
        assert_eq!(lemma1div_ratio(&UnipotentTriple::from_i64(1, 1, 1)).unwrap(), frac(3, 2));
        assert_eq!(lemma1div_ratio(&UnipotentTriple::from_i64(0, -7, 0)).unwrap(), int(7));
        assert_eq!(lemma1div_ratio(&UnipotentTriple::from_i64(4, -2, 4)).unwrap(), frac(18, 13));
        assert_eq!(
            lemma1div_ratio(&UnipotentTriple::from_i64(0, 0, 0)),
            Err(Error::RatioUndefinedAtIdentity)
        );
    }

    #[test]
    fn derived_constants() {
        let rep = Z2UnipotentRep::from_i64([1, 0, 1, 1, 1, 1]).unwrap();
        assert_eq!(rep.big_b_x(), &frac(-1, 2));
        assert_eq!(rep.big_b_y(), &frac(1, 2));
        assert_eq!(rep.z_xy(), Some(&int(2)));
        assert_eq!(rep.lambda(), Some(&int(1)));
        assert_eq!(Z2UnipotentRep::from_i64([1, 0, 2, 1, 0, 1]), Err(Error::NotZ2));
    }

    #[test]
    fn eval_matches_word_product() {
        let rep = Z2UnipotentRep::from_i64([3, -1, 2, -3, 5, -2]).unwrap();
        let gens = rep.generators();
        for (n, m) in [(0, 0), (1, 0), (2, -3), (-4, 5), (7, 7)] {
            let w = GroupWord::from_pairs([("x", n), ("y", m)]);
            assert_eq!(rep.eval(n, m).to_matrix(), w.eval(&gens).unwrap(), "{n} {m}");
        }
    }

    #[test]
    fn classify_examples() {
        let plane = classify_z2(&Z2UnipotentRep::from_i64([0, 1, 0, 0, 0, 1]).unwrap()).unwrap();
        assert_eq!(plane.kind, VerdictKind::RegularLatticePlaneType);
        assert!(plane.witness.is_none());

        let line = classify_z2(&Z2UnipotentRep::from_i64([1, 0, 0, 0, 1, 0]).unwrap()).unwrap();
        assert_eq!(line.kind, VerdictKind::RegularLatticeLineType);

        let c2 = classify_z2(&Z2UnipotentRep::from_i64([1, 0, 1, 1, 1, 1]).unwrap()).unwrap();
        assert_eq!(c2.kind, VerdictKind::NotRegular);
        let w = c2.witness.unwrap();
        assert_eq!(w.kind, WitnessKind::Claim2);
        assert_eq!(w.exponents(8).unwrap(), (12, -8));
        assert!(w.bound >= 50.0);

        let rank1 = classify_z2(&Z2UnipotentRep::from_i64([0, 1, 0, 0, 2, 0]).unwrap()).unwrap();
        assert_eq!(rank1.kind, VerdictKind::NotFaithfulOrNotDiscrete);
        assert_eq!(rank1.kernel, Some((2, -1)));
    }

    #[test]
    fn witness_spot_values() {
        let rep = Z2UnipotentRep::from_i64([1, 0, 1, 1, 1, 1]).unwrap();
        assert_eq!(witness_claim2(&rep, -8).unwrap(), (12, UnipotentTriple::from_i64(4, -2, 4)));
        let (n, t) = witness_claim2(&rep, -2).unwrap();
        assert_eq!((n, &t.x, &t.z), (4, &int(2), &int(2)));
        assert_eq!(t.y, int(-1));
        assert!(witness_claim2(&rep, 3).is_err());
        assert!(witness_claim2(&rep, 0).is_err());
    }

    #[test]
    fn witness_negative_a_x() {
        let rep = Z2UnipotentRep::from_i64([-2, 4, -2, 1, 0, 1]).unwrap();
        let z = rep.z_xy().unwrap().clone();
        let m = if z.is_positive() { -5 } else { 5 };
        let (n, t) = witness_claim2(&rep, m).unwrap();
        let target = (int(m) * z).abs();
        let ax = rep.a_x().abs();
        assert!(rational::sqrt_le(&target, &(&t.x + &ax)));
        assert!(rational::sqrt_ge(&target, &(&t.x - &ax)));
        // a_x < 0: a(n) >= sqrt|mZ| holds at the floor and fails one step later
        assert!(rational::sqrt_le(&target, &t.x));
        assert!(!rational::sqrt_le(&target, &rep.eval(n + 1, m).x));
    }

    #[test]
    fn z_zero_examples() {
        let unit = |ax: i64, ay: i64| {
            // b chosen so that Z = 0: B_y = (a_y/a_x) B_x with B_x = 0
            Z2UnipotentRep::new(
                UnipotentTriple::new(int(ax), frac(ax * ax, 2), int(ax)),
                UnipotentTriple::new(int(ay), frac(ay * ay, 2), int(ay)),
            )
            .unwrap()
        };
        let fam: Vec<_> = witness_z_zero(&unit(1, -1)).unwrap().take(3).collect();
        assert_eq!(fam, [(1, 1), (2, 2), (3, 3)]);
        let fam: Vec<_> = witness_z_zero(&unit(2, 4)).unwrap().take(2).collect();
        assert_eq!(fam, [(2, -1), (4, -2)]);
        assert!(witness_z_zero(&Z2UnipotentRep::from_i64([1, 0, 1, 1, 1, 1]).unwrap()).is_err());
        let v = classify_z2(&unit(1, -1)).unwrap();
        assert_eq!(v.kind, VerdictKind::NotFaithfulOrNotDiscrete);
        assert_eq!(v.kernel, Some((1, 1)));
        let w = v.witness.unwrap();
        assert_eq!(w.kind, WitnessKind::ZZeroDiscreteness);
        assert_eq!(w.exponents(3).unwrap(), (3, 3));
    }

    #[test]
    fn mixed_reduction() {
        let (r, basis) = reduce_mixed(&Z2UnipotentRep::from_i64([0, 1, 0, 1, 1, 1]).unwrap()).unwrap();
        assert_eq!(r.x(), UnipotentTriple::from_i64(1, 2, 1));
        assert_eq!(basis, [[1, 1], [0, 1]]);
        let (r, _) = reduce_mixed(&Z2UnipotentRep::from_i64([0, 5, 0, 1, 0, 1]).unwrap()).unwrap();
        assert_eq!(r.x(), UnipotentTriple::from_i64(1, 5, 1));
        assert!(reduce_mixed(&Z2UnipotentRep::from_i64([1, 1, 1, 1, 2, 1]).unwrap()).is_err());

        let rep = Z2UnipotentRep::from_i64([0, 5, 0, 1, 0, 1]).unwrap();
        let v = classify_z2(&rep).unwrap();
        assert_eq!(v.kind, VerdictKind::NotRegular);
        let w = v.witness.unwrap();
        assert_eq!(w.kind, WitnessKind::MixedReduced);
        for t in [1, 10, 100] {
            let (n, m) = w.exponents(t).unwrap();
            let g = rep.eval(n, m).to_matrix();
            assert!(svd::gap_ratio(&g).unwrap() <= w.bound);
        }
    }

    #[test]
    fn dual_swaps_line_and_plane() {
        let line = Z2UnipotentRep::from_i64([1, 0, 0, 0, 1, 0]).unwrap();
        let d = line.dual();
        assert_eq!(classify_z2(&d).unwrap().kind, VerdictKind::RegularLatticePlaneType);
        // matches inverse transpose up to the antidiagonal conjugation
        let gens = dual_rep(&line.generators()).unwrap();
        let sv = svd::singular_values(&gens["x"]).unwrap();
        let sd = svd::singular_values(&d.x().to_matrix()).unwrap();
        for i in 0..3 {
            assert!((sv.sigma[i] - sd.sigma[i]).abs() < 1e-12);
        }
        let diag = RationalMatrix::diag(&[int(4), int(1), frac(1, 4)]).unwrap();
        let g: Generators = [("g".to_string(), diag)].into_iter().collect();
        assert_eq!(dual_rep(&g).unwrap()["g"], RationalMatrix::diag(&[frac(1, 4), int(1), int(4)]).unwrap());
    }

    #[test]
    fn diagonal_witness() {
        let fam: Vec<_> = witness_diagonal([2.0, 1.0, 0.5], [1.0, 2.0, 0.5]).unwrap().take(3).collect();
        assert_eq!(fam, [(1, 1), (2, 2), (3, 3)]);
        let fam: Vec<_> = witness_diagonal([4.0, 1.0, 0.25], [1.0, 4.0, 0.25]).unwrap().take(2).collect();
        assert_eq!(fam, [(1, 1), (2, 2)]);
        assert!(witness_diagonal([1.0, 1.0, 1.0], [2.0, 2.0, 0.25]).is_err());
    }

    #[test]
    fn jordan_witness() {
        let fam: Vec<_> = witness_jordan(&int(2), &frac(1, 2), &int(0)).unwrap().take(2).collect();
        assert_eq!(fam, [(0, -1), (0, -2)]);
        let fam: Vec<_> = witness_jordan(&int(2), &int(2), &int(-1)).unwrap().take(2).collect();
        assert_eq!(fam, [(1, 1), (2, 2)]);
        assert!(witness_jordan(&int(1), &int(-1), &int(3)).is_err());
    }

    #[test]
    fn plane_lattice_sphere_minimum() {
        let rep = Z2UnipotentRep::from_i64([0, 1, 0, 0, 0, 1]).unwrap();
        let mut prev = Rational::zero();
        for r in 1..=30 {
            let v = min_sphere_ratio(&rep, r).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }
}
