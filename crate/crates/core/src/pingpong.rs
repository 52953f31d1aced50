//! Ping-pong certificates for free products `Delta * <gamma^N>` acting on
//! projective space: proximality, opposite points, certified set inclusion
//! and the search / verification pipeline.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{self, Mat, Vector, MAX};
use crate::error::{Error, Result};
use crate::flag::{self, line_angle, ProjFlag, ProjHyperplane, ProjPoint};
use crate::matrix::RationalMatrix;
use crate::par;
use crate::poly;
use crate::scan::{self, Ball, BallSpec, LimitSetSample};
use crate::svd;
use crate::word::{generator_dim, GroupWord, Generators};

pub const DEFAULT_RESOLUTION: f64 = 1e-3;
pub const MIN_MARGIN: f64 = 1e-3;
const CELL_BUDGET: usize = 1 << 20;

/// Finite union of closed Fubini-Study balls.
#[derive(Debug, Clone, PartialEq)]
pub struct BallUnionSet {
    centers: Vec<ProjPoint>,
    radii: Vec<f64>,
}

impl BallUnionSet {
    pub fn new(centers: Vec<ProjPoint>, radii: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Empty("ball union"));
        }
        if centers.len() != radii.len() {
            return Err(Error::DimensionMismatch { left: centers.len(), right: radii.len() });
        }
        let d = centers[0].dim();
        for (c, r) in centers.iter().zip(&radii) {
            if c.dim() != d {
                return Err(Error::DimensionMismatch { left: c.dim(), right: d });
            }
            if !(*r > 0.0 && *r <= core::f64::consts::FRAC_PI_2) {
                return Err(Error::Precondition(format!("ball radius {r} outside (0, pi/2]")));
            }
        }
        Ok(Self { centers, radii })
    }

    pub fn single(center: ProjPoint, radius: f64) -> Result<Self> {
        Self::new(vec![center], vec![radius])
    }

    pub fn centers(&self) -> &[ProjPoint] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].dim()
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut centers = self.centers.clone();
        centers.extend(other.centers.iter().cloned());
        let mut radii = self.radii.clone();
        radii.extend(&other.radii);
        Self::new(centers, radii)
    }

    pub fn contains(&self, p: &ProjPoint) -> bool {
        self.centers.iter().zip(&self.radii).any(|(c, r)| line_angle(c.coords(), p.coords()) <= *r)
    }

    pub fn min_radius(&self) -> f64 {
        self.radii.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `min (d(c_i, c'_j) - r_i - r'_j)`; positive certifies disjointness.
    pub fn separation(&self, other: &Self) -> (f64, f64, f64) {
        let mut worst = (f64::INFINITY, 0.0, 0.0);
        for (c, r) in self.centers.iter().zip(&self.radii) {
            for (c2, r2) in other.centers.iter().zip(&other.radii) {
                let d = line_angle(c.coords(), c2.coords());
                if d - r - r2 < worst.0 {
                    worst = (d - r - r2, d, r + r2);
                }
            }
        }
        worst
    }

    /// Largest `r_j - d(y, c_j)` over the balls.
    fn depth(&self, y: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| r - line_angle(c.coords(), y))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Projective action of a matrix, scaled to unit Frobenius norm, with
/// bounds on its extreme singular values.
#[derive(Debug, Clone, Copy)]
struct Action {
    m: Mat,
    s1: f64,
    s2: f64,
    sd_lower: f64,
}

impl Action {
    fn new(mut m: Mat) -> Result<Self> {
        let f = m.frobenius();
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::Degenerate("matrix not representable in floating point".into()));
        }
        m.scale(1.0 / f);
        let h = svd::hestenes(&m);
        let s1 = h.sigma[0] * (1.0 + 1e-12);
        let sd_lower = (h.sigma[m.n - 1] - 8.0 * f64::EPSILON * s1).max(0.0);
        let s2 = h.sigma[1] + 64.0 * f64::EPSILON * s1;
        Ok(Self { m, s1, s2, sd_lower })
    }

    fn from_rational(g: &RationalMatrix) -> Result<Self> {
        Self::new(Mat::from_rational(g))
    }

    /// Unit image of `q` and an erosion radius `e` with
    /// `g B(q, rho) ⊂ B(gq, e)`. Two bounds are combined: `sigma1 / |gp|` on
    /// the derivative along geodesics from `q`, and
    /// `|gp ∧ gq| <= sigma1 sigma2 |p ∧ q|`, which sees contraction.
    fn image_ball(&self, q: &Vector, rho: f64) -> Option<(Vector, f64)> {
        let n = self.m.n;
        let y = self.m.apply(q);
        let ny = dense::norm(n, &y);
        if !(ny > 0.0) {
            return None;
        }
        let chord = 2.0 * libm::sin(rho.min(core::f64::consts::PI) / 2.0);
        let denom = (ny - self.s1 * chord).max(self.sd_lower) - 16.0 * f64::EPSILON * self.s1;
        if !(denom > 0.0) {
            return None;
        }
        let mut u = y;
        for x in u.iter_mut().take(n) {
            *x /= ny;
        }
        let lipschitz = self.s1 / denom * rho;
        let wedge = self.s1 * self.s2 * libm::sin(rho.min(core::f64::consts::FRAC_PI_2)) / (ny * denom);
        let e = if wedge < 1.0 { lipschitz.min(libm::asin(wedge) * (1.0 + 1e-12)) } else { lipschitz };
        Some((u, e + 1e-12))
    }
}

/// `2 sigma1 / sigma_d`, a global Lipschitz constant for the projective
/// action in the Fubini-Study metric.
pub fn global_lipschitz(g: &RationalMatrix) -> Result<f64> {
    let s = svd::singular_values(g)?;
    let d = g.dim();
    Ok(2.0 * s.sigma[0] / s.sigma[d - 1])
}

/// `g` applied to a projective point.
pub fn apply_point(g: &RationalMatrix, p: &ProjPoint) -> Result<ProjPoint> {
    p.transform(g)
}

/// `g^n` as a unit-norm floating matrix, by repeated squaring with
/// renormalization so that large powers stay representable.
fn dense_power(g: &RationalMatrix, n: i64) -> Result<Mat> {
    let base = if n < 0 { g.inverse()? } else { g.clone() };
    let mut b = Mat::from_rational(&base);
    let normalize = |m: &mut Mat| {
        let f = m.frobenius();
        m.scale(1.0 / f);
    };
    normalize(&mut b);
    let mut acc = Mat::identity(g.dim());
    let mut e = n.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&b);
            normalize(&mut acc);
        }
        b = b.mul(&b);
        normalize(&mut b);
        e >>= 1;
    }
    Ok(acc)
}

fn tangent_basis(c: &Vector, n: usize) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::new();
    let mut cands: Vec<(f64, Vector)> = (0..n)
        .map(|i| {
            let mut e = [0.0; MAX];
            e[i] = 1.0;
            (1.0 - c[i] * c[i], e)
        })
        .collect();
    cands.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    for (_, mut e) in cands {
        for b in core::iter::once(c).chain(basis.iter()) {
            let t = dense::dot(n, &e, b);
            for k in 0..n {
                e[k] -= t * b[k];
            }
        }
        let l = dense::norm(n, &e);
        if l > 1e-6 && basis.len() < n - 1 {
            for x in e.iter_mut().take(n) {
                *x /= l;
            }
            basis.push(e);
        }
    }
    basis
}

fn exp_at(c: &Vector, basis: &[Vector], v: &[f64], n: usize) -> Vector {
    let t = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if t == 0.0 {
        return *c;
    }
    let mut out = [0.0; MAX];
    for k in 0..n {
        let dir: f64 = basis.iter().zip(v).map(|(b, x)| b[k] * x).sum::<f64>() / t;
        out[k] = libm::cos(t) * c[k] + libm::sin(t) * dir;
    }
    out
}

/// Outcome of a certified inclusion check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inclusion {
    pub holds: bool,
    /// Worst slack: for `holds`, the least distance by which a certified
    /// piece of `gA` stays inside `B`; otherwise the deficit (negative).
    pub margin: f64,
    pub cells: usize,
}

fn inclusion(act: &Action, a: &BallUnionSet, b: &BallUnionSet, h: f64) -> Result<Inclusion> {
    if !(h > 0.0) {
        return Err(Error::Precondition("grid resolution must be positive".into()));
    }
    let n = act.m.n;
    let min_b = b.min_radius();
    let mut margin = f64::INFINITY;
    let mut cells = 0usize;
    for (c, r) in a.centers.iter().zip(&a.radii) {
        let c = dense::from_slice(c.coords());
        if let Some((y, e)) = act.image_ball(&c, *r) {
            let s = b.depth(&y[..n]) - e;
            if s >= 0.0 {
                margin = margin.min(s);
                continue;
            }
            if s + e < 0.0 {
                return Ok(Inclusion { holds: false, margin: s + e, cells });
            }
        }
        // Cover the tangent ball of radius r at c by cubes, refining until
        // every piece is certified or the resolution is reached.
        let basis = tangent_basis(&c, n);
        let k = n - 1;
        let sqrt_k = libm::sqrt(k as f64);
        let mut stack: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; k], *r)];
        while let Some((v, half)) = stack.pop() {
            cells += 1;
            if cells > CELL_BUDGET {
                return Err(Error::BudgetExceeded { count: cells, budget: CELL_BUDGET });
            }
            let rho = half * sqrt_k;
            let tv = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
            if tv - rho > *r {
                continue;
            }
            let q = exp_at(&c, &basis, &v, n);
            let mut slack = f64::NEG_INFINITY;
            let mut erosion = f64::INFINITY;
            if let Some((y, e)) = act.image_ball(&q, rho) {
                slack = b.depth(&y[..n]) - e;
                erosion = e;
                if slack >= 0.0 {
                    margin = margin.min(slack);
                    continue;
                }
                if tv <= *r && slack + e < 0.0 {
                    return Ok(Inclusion { holds: false, margin: slack + e, cells });
                }
            }
            if rho > h {
                let quarter = half / 2.0;
                for mask in (0..(1usize << k)).rev() {
                    let child: Vec<f64> = v
                        .iter()
                        .enumerate()
                        .map(|(i, x)| if mask >> i & 1 == 1 { x + quarter } else { x - quarter })
                        .collect();
                    stack.push((child, quarter));
                }
            } else {
                if erosion >= min_b {
                    return Err(Error::ResolutionInsufficient { erosion, radius: min_b });
                }
                return Ok(Inclusion { holds: false, margin: slack, cells });
            }
        }
    }
    Ok(Inclusion { holds: true, margin, cells })
}

/// Certifies `gA ⊂ B`. Each ball of `A` is covered adaptively by pieces of
/// radius down to `h`; a piece is accepted when its image, bounded by the
/// local Lipschitz estimate, lies in one ball of `B`. A piece whose centre
/// maps outside `B` is a counterexample.
pub fn map_set_inclusion(g: &RationalMatrix, a: &BallUnionSet, b: &BallUnionSet, h: f64) -> Result<Inclusion> {
    if g.dim() != a.dim() || g.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: g.dim(), right: a.dim() });
    }
    inclusion(&Action::from_rational(g)?, a, b, h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProximalityReport {
    pub is_proximal: bool,
    /// Certified lower bound on the largest eigenvalue modulus.
    pub top_eigenvalue_modulus: f64,
    /// Certified upper bound on the other eigenvalue moduli.
    pub second_modulus: f64,
    pub attracting: Option<ProjFlag>,
}

pub fn is_proximal(g: &RationalMatrix) -> Result<ProximalityReport> {
    if g.det() == crate::rational::int(0) {
        return Err(Error::Singular);
    }
    let mut discs = poly::roots(&poly::charpoly(g));
    discs.sort_by(|a, b| b.center.norm().partial_cmp(&a.center.norm()).unwrap_or(core::cmp::Ordering::Equal));
    let top = discs[0];
    let top_lower = top.center.norm() - top.radius;
    let mut second_upper: f64 = 0.0;
    let mut isolated = true;
    for d in &discs[1..] {
        second_upper = second_upper.max(d.center.norm() + d.radius);
        if (top.center - d.center).norm() <= top.radius + d.radius {
            isolated = false;
        }
    }
    if !isolated {
        second_upper = second_upper.max(top.center.norm() + top.radius);
    }
    let proximal = top_lower > second_upper * (1.0 + 1e-9);
    let attracting = if proximal { flag::cyclic_limit_flag(g).ok() } else { None };
    Ok(ProximalityReport {
        is_proximal: proximal,
        top_eigenvalue_modulus: top_lower,
        second_modulus: second_upper,
        attracting,
    })
}

/// First proximal element of the ball in length-lex order.
pub fn find_proximal(spec: &BallSpec) -> Result<Option<(GroupWord, ProximalityReport)>> {
    let mut ball = Ball::new(spec)?;
    for _ in 0..spec.radius {
        for e in ball.advance() {
            let rep = is_proximal(&e.matrix)?;
            if rep.is_proximal {
                return Ok(Some((e.word.clone(), rep)));
            }
        }
    }
    Ok(None)
}

/// A flag opposite to every sampled flag.
#[derive(Debug, Clone, PartialEq)]
pub struct OppositePoint {
    pub flag: ProjFlag,
    /// Minimum opposition margin against the sample.
    pub raw_margin: f64,
    /// `raw_margin` minus the sample's resolution allowance.
    pub margin: f64,
}

fn sphere_grid(n: usize, k: usize) -> Vec<Vec<f64>> {
    // points of the cube surface [-1,1]^n on a k-step lattice, one per line
    let steps = k + 1;
    let mut out = Vec::new();
    let total = steps.pow(n as u32);
    for idx in 0..total {
        let mut v = Vec::with_capacity(n);
        let mut t = idx;
        for _ in 0..n {
            v.push(-1.0 + 2.0 * (t % steps) as f64 / k as f64);
            t /= steps;
        }
        if !v.iter().any(|x| libm::fabs(*x) == 1.0) {
            continue;
        }
        if let Some(first) = v.iter().find(|x| **x != 0.0) {
            if *first > 0.0 {
                out.push(v);
            }
        }
    }
    out
}

fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let l = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if l > 1e-12 {
        Some(v.iter().map(|x| x / l).collect())
    } else {
        None
    }
}

fn orthogonalize(nv: &[f64], p: &[f64]) -> Option<Vec<f64>> {
    let t: f64 = nv.iter().zip(p).map(|(a, b)| a * b).sum();
    let w: Vec<f64> = nv.iter().zip(p).map(|(a, b)| a - t * b).collect();
    normalized(&w)
}

struct OppositionObjective<'a> {
    flags: &'a [ProjFlag],
}

impl OppositionObjective<'_> {
    /// Worst incidence of a candidate point with the sampled hyperplanes.
    fn point_score(&self, p: &[f64]) -> f64 {
        self.flags
            .iter()
            .map(|f| libm::fabs(f.hyperplane.conormal().iter().zip(p).map(|(a, b)| a * b).sum::<f64>()))
            .fold(f64::INFINITY, f64::min)
    }

    /// Worst incidence of a candidate hyperplane with the sampled points.
    fn hyperplane_score(&self, c: &[f64]) -> f64 {
        self.flags
            .iter()
            .map(|f| libm::fabs(f.point.coords().iter().zip(c).map(|(a, b)| a * b).sum::<f64>()))
            .fold(f64::INFINITY, f64::min)
    }

    fn score(&self, p: &[f64], c: &[f64]) -> f64 {
        self.point_score(p).min(self.hyperplane_score(c))
    }
}

/// The flag maximizing the minimum opposition margin against the sample
/// (grid search, then pattern-search refinement), whether or not it clears
/// the threshold.
pub fn best_opposite_point(sample: &LimitSetSample) -> Result<OppositePoint> {
    if sample.flags.is_empty() {
        return Err(Error::Empty("limit set sample"));
    }
    let flags = sample.flag_list();
    let n = flags[0].dim();
    let obj = OppositionObjective { flags: &flags };
    let k = if n <= 3 { 8 } else { 6 };
    let mut points: Vec<(f64, Vec<f64>)> = sphere_grid(n, k)
        .into_iter()
        .filter_map(|v| normalized(&v))
        .map(|p| (obj.point_score(&p), p))
        .collect();
    points.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    points.truncate(6);

    let tangent_dirs = sphere_grid(n - 1, k);
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for (_, p) in &points {
        let basis = tangent_basis(&dense::from_slice(p), n);
        for t in &tangent_dirs {
            let mut c = vec![0.0; n];
            for (b, x) in basis.iter().zip(t) {
                for i in 0..n {
                    c[i] += b[i] * x;
                }
            }
            let Some(c) = normalized(&c) else { continue };
            let s = obj.score(p, &c);
            if best.as_ref().is_none_or(|b| s > b.0) {
                best = Some((s, p.clone(), c));
            }
        }
    }
    let (mut score, mut p, mut c) = best.ok_or(Error::Empty("candidate grid"))?;

    let mut step = 0.05;
    while step > 1e-6 {
        let mut improved = false;
        for which in 0..2 {
            for i in 0..n {
                for sign in [1.0, -1.0] {
                    let (np, nc) = if which == 0 {
                        let mut q = p.clone();
                        q[i] += sign * step;
                        let Some(q) = normalized(&q) else { continue };
                        let Some(cc) = orthogonalize(&c, &q) else { continue };
                        (q, cc)
                    } else {
                        let mut cc = c.clone();
                        cc[i] += sign * step;
                        let Some(cc) = orthogonalize(&cc, &p) else { continue };
                        (p.clone(), cc)
                    };
                    let s = obj.score(&np, &nc);
                    if s > score {
                        score = s;
                        p = np;
                        c = nc;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    let flag = ProjFlag::new(ProjPoint::new(&p)?, ProjHyperplane::new(&c)?)?;
    let raw = flags.iter().map(|s| flag::opposition_margin(&flag, s)).collect::<Result<Vec<_>>>()?;
    let raw = raw.into_iter().fold(f64::INFINITY, f64::min);
    Ok(OppositePoint { flag, raw_margin: raw, margin: raw - sample.resolution })
}

/// A flag opposite to the whole sample with margin above `1e-3` after the
/// sample's resolution allowance is subtracted.
pub fn find_opposite_point(sample: &LimitSetSample) -> Result<Option<OppositePoint>> {
    let best = best_opposite_point(sample)?;
    Ok(if best.margin > MIN_MARGIN { Some(best) } else { None })
}

/// Ball elements `delta != 1` with `delta U` not certified inside `W0`.
pub fn exceptional_elements(
    delta_ball: &[(GroupWord, RationalMatrix)],
    u: &BallUnionSet,
    w0: &BallUnionSet,
    h: f64,
) -> Result<Vec<GroupWord>> {
    let mut out = Vec::new();
    for (w, m) in delta_ball {
        if m.is_identity() {
            continue;
        }
        let inside = match map_set_inclusion(m, u, w0, h) {
            Ok(inc) => inc.holds,
            Err(Error::ResolutionInsufficient { .. }) | Err(Error::BudgetExceeded { .. }) => false,
            Err(e) => return Err(e),
        };
        if !inside {
            out.push(w.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerChoice {
    pub n: u32,
    /// Worst inclusion margin over the window `g^{±n}`, `n in [N, N + 5]`.
    pub margin: f64,
}

fn power_inclusion(g: &RationalMatrix, n: i64, a: &BallUnionSet, b: &BallUnionSet, h: f64) -> Result<Inclusion> {
    match inclusion(&Action::new(dense_power(g, n)?)?, a, b, h) {
        Ok(inc) => Ok(inc),
        Err(Error::ResolutionInsufficient { .. }) | Err(Error::BudgetExceeded { .. }) => {
            Ok(Inclusion { holds: false, margin: f64::NEG_INFINITY, cells: 0 })
        }
        Err(e) => Err(e),
    }
}

/// Least `N <= max_n` such that `g^{±n} W ⊂ V` for every `n` in `[N, N + 5]`.
pub fn choose_power(
    g: &RationalMatrix,
    w: &BallUnionSet,
    v: &BallUnionSet,
    max_n: u32,
    h: f64,
) -> Result<Option<PowerChoice>> {
    choose_power_with_margin(g, w, v, max_n, h, 0.0)
}

fn choose_power_with_margin(
    g: &RationalMatrix,
    w: &BallUnionSet,
    v: &BallUnionSet,
    max_n: u32,
    h: f64,
    min_margin: f64,
) -> Result<Option<PowerChoice>> {
    let report = is_proximal(g)?;
    if !report.is_proximal {
        return Err(Error::Precondition("choose_power needs a proximal element".into()));
    }
    let plus = flag::cyclic_limit_flag(g)?;
    let minus = flag::cyclic_limit_flag(&g.inverse()?)?;
    if !v.contains(&plus.point) || !v.contains(&minus.point) {
        return Err(Error::Precondition("V must contain the attracting points of g and g^-1".into()));
    }
    if max_n == 0 {
        return Ok(None);
    }
    const WINDOW: u32 = 5;
    let mut window: Vec<f64> = Vec::new(); // margins for n = start..
    let mut start = 1u32;
    let mut n = 1u32;
    while start <= max_n {
        let lo = power_inclusion(g, n as i64, w, v, h)?;
        let good = |inc: &Inclusion| inc.holds && inc.margin >= min_margin;
        let hi = if good(&lo) { power_inclusion(g, -(n as i64), w, v, h)? } else { lo };
        if good(&lo) && good(&hi) {
            window.push(lo.margin.min(hi.margin));
            if window.len() as u32 == WINDOW + 1 {
                let margin = window.iter().copied().fold(f64::INFINITY, f64::min);
                return Ok(Some(PowerChoice { n: start, margin }));
            }
        } else {
            window.clear();
            start = n + 1;
        }
        n += 1;
    }
    Ok(None)
}

/// Generators of `Delta` as words in the ambient group, renamed `d00`, `d01`,
/// ... so that balls in `Delta` can be enumerated and expanded back.
struct SubgroupGens {
    words: Vec<GroupWord>,
    gens: Generators,
}

impl SubgroupGens {
    fn new(group: &Generators, words: &[GroupWord]) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Empty("delta generators"));
        }
        let mut gens = Generators::new();
        for (i, w) in words.iter().enumerate() {
            gens.insert(format!("d{i:02}"), w.eval(group)?);
        }
        Ok(Self { words: words.to_vec(), gens })
    }

    fn expand(&self, w: &GroupWord) -> GroupWord {
        let mut out = GroupWord::identity();
        for s in w.syllables() {
            let idx: usize = s.name[1..].parse().expect("internal generator name");
            out = out.concat(&self.words[idx].pow(s.exp));
        }
        out
    }

    fn ball(&self, radius: usize, cap: usize) -> Result<Vec<(GroupWord, RationalMatrix)>> {
        let spec = BallSpec::with_cap(self.gens.clone(), radius, true, cap.max(radius))?;
        let mut ball = Ball::new(&spec)?;
        let mut out = Vec::new();
        for _ in 0..radius {
            for e in ball.advance() {
                out.push((self.expand(&e.word), e.matrix.clone()));
            }
        }
        Ok(out)
    }

    fn sample(&self, radius: usize, threshold: f64, cap: usize) -> Result<LimitSetSample> {
        let spec = BallSpec::with_cap(self.gens.clone(), radius, true, cap.max(radius))?;
        let mut s = scan::limit_set_sample(&spec, threshold)?;
        for f in &mut s.flags {
            f.word = self.expand(&f.word);
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PingPongCertificate {
    pub group: Generators,
    pub delta_generators: Vec<GroupWord>,
    pub gamma: GroupWord,
    pub power: u32,
    /// Set for `Delta`.
    pub c1: BallUnionSet,
    /// Set for `<gamma^N>`.
    pub c2: BallUnionSet,
    pub margin: f64,
    pub exceptional: Vec<GroupWord>,
    pub grid_resolution: f64,
    /// Radius of the `Delta` ball whose nontrivial elements are checked.
    pub delta_radius: usize,
    /// Syllable length of the exact alternating-word check.
    pub word_check_length: usize,
}

/// Options for the exact alternating-word check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordCheckOptions {
    /// `Delta` syllables are the nontrivial elements of this ball.
    pub delta_radius: usize,
    /// `gamma^N` syllables are `gamma^{kN}` for `1 <= |k| <= gamma_powers`.
    pub gamma_powers: i64,
    pub budget: usize,
}

impl Default for WordCheckOptions {
    fn default() -> Self {
        Self { delta_radius: 1, gamma_powers: 1, budget: 5_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordCheckReport {
    /// No alternating word evaluated to the identity.
    pub free: bool,
    pub enumerated: usize,
    /// Syllables of the first identity word found.
    pub relation: Option<Vec<GroupWord>>,
}

pub const MAX_WORD_CHECK_LENGTH: usize = 12;

fn alternating_count(a: usize, b: usize, max_len: usize) -> Option<usize> {
    let mut total = 0usize;
    for len in 1..=max_len {
        let (hi, lo) = (len.div_ceil(2) as u32, (len / 2) as u32);
        let x = a.checked_pow(hi)?.checked_mul(b.checked_pow(lo)?)?;
        let y = b.checked_pow(hi)?.checked_mul(a.checked_pow(lo)?)?;
        total = total.checked_add(x)?.checked_add(y)?;
    }
    Some(total)
}

struct Syllables {
    sets: [Vec<(GroupWord, RationalMatrix)>; 2],
}

impl Syllables {
    fn dfs(
        &self,
        prefix: &RationalMatrix,
        kind: usize,
        depth: usize,
        max_len: usize,
        path: &mut Vec<usize>,
        count: &mut usize,
    ) -> Option<Vec<GroupWord>> {
        *count += 1;
        if prefix.is_identity() {
            let mut k = kind;
            let mut out: Vec<GroupWord> = path
                .iter()
                .rev()
                .map(|&i| {
                    let w = self.sets[k][i].0.clone();
                    k ^= 1;
                    w
                })
                .collect();
            out.reverse();
            return Some(out);
        }
        if depth == max_len {
            return None;
        }
        let next = kind ^ 1;
        for (i, (_, m)) in self.sets[next].iter().enumerate() {
            path.push(i);
            let found = self.dfs(&(prefix * m), next, depth + 1, max_len, path, count);
            path.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
}

/// Exhaustive exact check that no alternating product of nontrivial
/// `Delta` syllables and nonzero powers of `gamma^N`, of at most `max_len`
/// syllables, is the identity.
pub fn freeproduct_word_check(
    group: &Generators,
    delta_generators: &[GroupWord],
    gamma_n: &GroupWord,
    max_len: usize,
    options: &WordCheckOptions,
) -> Result<WordCheckReport> {
    if max_len > MAX_WORD_CHECK_LENGTH {
        return Err(Error::Precondition(format!("word check length {max_len} exceeds {MAX_WORD_CHECK_LENGTH}")));
    }
    let sub = SubgroupGens::new(group, delta_generators)?;
    let delta: Vec<(GroupWord, RationalMatrix)> = sub
        .ball(options.delta_radius, scan::DEFAULT_RADIUS_CAP)?
        .into_iter()
        .filter(|(_, m)| !m.is_identity())
        .collect();
    let g = gamma_n.eval(group)?;
    let mut gamma = Vec::new();
    for k in 1..=options.gamma_powers {
        for s in [k, -k] {
            gamma.push((gamma_n.pow(s), g.pow(s)?));
        }
    }
    let count = alternating_count(delta.len(), gamma.len(), max_len).unwrap_or(usize::MAX);
    if count > options.budget {
        return Err(Error::BudgetExceeded { count, budget: options.budget });
    }
    let syl = Syllables { sets: [delta, gamma] };
    let roots: Vec<(usize, usize)> =
        (0..2).flat_map(|k| (0..syl.sets[k].len()).map(move |i| (k, i))).collect();
    let results = par::map(&roots, |&(k, i)| {
        let mut count = 0;
        let mut path = vec![i];
        let found = syl.dfs(&syl.sets[k][i].1, k, 1, max_len, &mut path, &mut count);
        (count, found)
    });
    let mut enumerated = 0;
    let mut relation = None;
    for (c, found) in results {
        enumerated += c;
        if relation.is_none() {
            relation = found;
        }
    }
    Ok(WordCheckReport { free: relation.is_none(), enumerated, relation })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub ok: bool,
    pub margin: f64,
    pub words_checked: usize,
    pub failure: Option<String>,
}

struct Measured {
    margin: f64,
    failure: Option<String>,
}

fn measure(cert: &PingPongCertificate, delta_ball: &[(GroupWord, RationalMatrix)]) -> Result<Measured> {
    let (sep, distance, radius_sum) = cert.c1.separation(&cert.c2);
    if !(sep > 0.0) {
        return Err(Error::NotDisjoint { distance, radius_sum });
    }
    let h = cert.grid_resolution;
    let nontrivial: Vec<&(GroupWord, RationalMatrix)> = delta_ball.iter().filter(|(_, m)| !m.is_identity()).collect();
    let delta_results: Vec<Result<Inclusion>> =
        par::map(&nontrivial, |(_, m)| map_set_inclusion(m, &cert.c2, &cert.c1, h));
    let mut margin = sep;
    for ((w, _), inc) in nontrivial.iter().zip(delta_results) {
        let inc = inc?;
        if !inc.holds {
            return Ok(Measured { margin: inc.margin, failure: Some(format!("{w} does not map C2 into C1")) });
        }
        margin = margin.min(inc.margin);
    }
    let g = cert.gamma.eval(&cert.group)?;
    let n = cert.power as i64;
    for k in 1..=3i64 {
        for s in [1, -1] {
            let inc = inclusion(&Action::new(dense_power(&g, s * k * n)?)?, &cert.c1, &cert.c2, h)?;
            if !inc.holds {
                return Ok(Measured {
                    margin: inc.margin,
                    failure: Some(format!("gamma^{} does not map C1 into C2", s * k * n)),
                });
            }
            margin = margin.min(inc.margin);
        }
    }
    Ok(Measured { margin, failure: None })
}

/// Re-checks a certificate: disjointness of `C1` and `C2`, `delta C2 ⊂ C1`
/// for every nontrivial `delta` up to the stored radius, `gamma^{±kN} C1 ⊂ C2`
/// for `k = 1, 2, 3`, the exact word check, and the stored margin.
pub fn verify_certificate(cert: &PingPongCertificate) -> Result<VerifyReport> {
    let sub = SubgroupGens::new(&cert.group, &cert.delta_generators)?;
    let ball = sub.ball(cert.delta_radius, scan::DEFAULT_RADIUS_CAP)?;
    let m = measure(cert, &ball)?;
    if let Some(f) = m.failure {
        return Ok(VerifyReport { ok: false, margin: m.margin, words_checked: 0, failure: Some(f) });
    }
    let gamma_n = cert.gamma.pow(cert.power as i64);
    let words = freeproduct_word_check(
        &cert.group,
        &cert.delta_generators,
        &gamma_n,
        cert.word_check_length,
        &WordCheckOptions::default(),
    )?;
    let mut failure = None;
    if !words.free {
        failure = Some("alternating word evaluates to the identity".to_string());
    } else if m.margin < cert.margin * (1.0 - 1e-9) {
        failure = Some(format!("margin {} below stored {}", m.margin, cert.margin));
    }
    Ok(VerifyReport { ok: failure.is_none(), margin: m.margin, words_checked: words.enumerated, failure })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    NoOppositePoint,
    NoProximal,
    NoPower,
    MarginTooSmall,
}

impl FailureReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailureReason::NoOppositePoint => "no-opposite-point",
            FailureReason::NoProximal => "no-proximal",
            FailureReason::NoPower => "no-power",
            FailureReason::MarginTooSmall => "margin-too-small",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchFailure {
    pub reason: FailureReason,
    pub detail: String,
    /// Best opposition margin found against the `Delta` limit sample.
    pub opposite_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Certificate(PingPongCertificate),
    Failure(SearchFailure),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub sample_radius: usize,
    pub sample_threshold: f64,
    pub gamma_radius: usize,
    pub delta_radius: usize,
    pub resolution: f64,
    pub max_power: u32,
    pub min_margin: f64,
    pub word_check_length: usize,
    pub max_candidates: usize,
    pub cap: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            sample_radius: 12,
            sample_threshold: 2.0,
            gamma_radius: 6,
            delta_radius: 6,
            resolution: DEFAULT_RESOLUTION,
            max_power: 40,
            min_margin: MIN_MARGIN,
            word_check_length: 8,
            max_candidates: 64,
            cap: scan::DEFAULT_RADIUS_CAP,
        }
    }
}

/// Fractions of the available room used for the radii of `W0` and `V`,
/// largest first.
const W_FRACTIONS: [f64; 4] = [0.6, 0.4, 0.25, 0.15];
const V_FRACTIONS: [f64; 4] = [0.5, 0.25, 0.1, 0.05];
/// Resolution floor while searching; acceptance at a coarse resolution
/// implies acceptance at every finer one.
const SEARCH_RESOLUTION: f64 = 0.01;

fn hyperplane_distance(h: &ProjHyperplane, p: &ProjPoint) -> f64 {
    libm::asin(h.incidence(p).unwrap_or(0.0).min(1.0))
}

struct Candidate {
    word: GroupWord,
    matrix: RationalMatrix,
    plus: ProjFlag,
    minus: ProjFlag,
}

fn failure(reason: FailureReason, detail: String, opposite: Option<f64>) -> SearchOutcome {
    SearchOutcome::Failure(SearchFailure { reason, detail, opposite_margin: opposite })
}

/// Builds `C2 = V` around the fixed points of `gamma`, `C1 = W0 ∪ delta_i V`
/// around the `Delta` limit sample and the images of `V` under the
/// exceptional elements, and picks the power `N`.
fn build(
    group: &Generators,
    delta_words: &[GroupWord],
    sample: &LimitSetSample,
    delta_ball: &[(GroupWord, RationalMatrix)],
    cand: &Candidate,
    opts: &SearchOptions,
) -> Result<core::result::Result<PingPongCertificate, (FailureReason, String)>> {
    let h = opts.resolution;
    let h_search = h.max(SEARCH_RESOLUTION);
    let repelling = [&cand.plus.hyperplane, &cand.minus.hyperplane];
    let avoids_repelling =
        |c: &ProjPoint, r: f64| repelling.iter().all(|hp| hyperplane_distance(hp, c) > r + opts.min_margin);
    // room around the sample (away from the hyperplanes gamma^{±n} does not
    // contract) and around the fixed points (away from the sample)
    let mut room_w = f64::INFINITY;
    let mut room_v = f64::INFINITY;
    for s in &sample.flags {
        for hp in repelling {
            room_w = room_w.min(hyperplane_distance(hp, &s.flag.point));
        }
        for p in [&cand.plus.point, &cand.minus.point] {
            room_v = room_v.min(hyperplane_distance(&s.flag.hyperplane, p));
            room_v = room_v.min(line_angle(p.coords(), s.flag.point.coords()) / 2.0);
        }
    }
    room_v = room_v.min(line_angle(cand.plus.point.coords(), cand.minus.point.coords()) / 2.0);
    let mut last = (FailureReason::NoPower, String::from("no set radii succeeded"));
    for fw in W_FRACTIONS {
        let rho_w = (fw * room_w).min(0.3);
        for fv in V_FRACTIONS {
            let rho_v = (fv * room_v).min(0.1);
            if rho_w <= 2.0 * opts.min_margin || rho_v <= 2.0 * opts.min_margin {
                continue;
            }
            let v = BallUnionSet::new(vec![cand.plus.point.clone(), cand.minus.point.clone()], vec![rho_v, rho_v])?;
            let w0 = BallUnionSet::new(
                sample.flags.iter().map(|f| f.flag.point.clone()).collect(),
                vec![rho_w; sample.flags.len()],
            )?;
            let mut exceptional = Vec::new();
            let mut covers_c = Vec::new();
            let mut covers_r = Vec::new();
            let mut ok = true;
            for (w, m) in delta_ball {
                if m.is_identity() {
                    continue;
                }
                let certified = match map_set_inclusion(m, &v, &w0, h_search) {
                    Ok(inc) => inc.holds && inc.margin >= 2.0 * opts.min_margin,
                    Err(Error::ResolutionInsufficient { .. }) | Err(Error::BudgetExceeded { .. }) => false,
                    Err(e) => return Err(e),
                };
                if certified {
                    continue;
                }
                exceptional.push(w.clone());
                let act = Action::from_rational(m)?;
                for (c, r) in v.centers.iter().zip(&v.radii) {
                    let image = act.image_ball(&dense::from_slice(c.coords()), *r);
                    let Some((y, e)) = image else {
                        ok = false;
                        break;
                    };
                    let center = ProjPoint::new(&y[..c.dim()])?;
                    let radius = e + 2.0 * opts.min_margin;
                    if radius >= core::f64::consts::FRAC_PI_4 || !avoids_repelling(&center, radius) {
                        ok = false;
                        break;
                    }
                    covers_c.push(center);
                    covers_r.push(radius);
                }
                if !ok {
                    break;
                }
            }
            if !ok {
                last = (FailureReason::MarginTooSmall, format!("images of V under exceptional elements meet the repelling hyperplanes of {} (rho_V = {rho_v:.3e})", cand.word));
                continue;
            }
            let c1 = if covers_c.is_empty() { w0.clone() } else { w0.union(&BallUnionSet::new(covers_c, covers_r)?)? };
            let (sep, _, _) = c1.separation(&v);
            if sep < opts.min_margin {
                last = (FailureReason::MarginTooSmall, format!("C1 and C2 overlap (rho_V = {rho_v:.3e}, rho_W = {rho_w:.3e})"));
                continue;
            }
            let power = choose_power_with_margin(&cand.matrix, &c1, &v, opts.max_power, h_search, 2.0 * opts.min_margin)?;
            let Some(power) = power else {
                last = (FailureReason::NoPower, format!("no N <= {} for gamma = {}", opts.max_power, cand.word));
                continue;
            };
            let mut cert = PingPongCertificate {
                group: group.clone(),
                delta_generators: delta_words.to_vec(),
                gamma: cand.word.clone(),
                power: power.n,
                c1,
                c2: v,
                margin: 0.0,
                exceptional,
                grid_resolution: h,
                delta_radius: opts.delta_radius,
                word_check_length: opts.word_check_length,
            };
            let m = measure(&cert, delta_ball)?;
            if let Some(f) = m.failure {
                last = (FailureReason::MarginTooSmall, f);
                continue;
            }
            if m.margin < opts.min_margin {
                last = (FailureReason::MarginTooSmall, format!("margin {:.3e} below {:.0e}", m.margin, opts.min_margin));
                continue;
            }
            cert.margin = m.margin;
            return Ok(Ok(cert));
        }
    }
    Ok(Err(last))
}

/// Searches for a ping-pong certificate of `<Delta, gamma^N> = Delta * Z`:
/// samples the limit set of `Delta`, requires a flag opposite to it, takes
/// proximal `gamma` in length-lex order whose attracting and repelling
/// flags are opposite to the sample, and builds the sets around them.
pub fn search(group: &Generators, delta_generators: &[GroupWord], opts: &SearchOptions) -> Result<SearchOutcome> {
    generator_dim(group)?;
    let sub = SubgroupGens::new(group, delta_generators)?;
    let sample = sub.sample(opts.sample_radius, opts.sample_threshold, opts.cap)?;
    if sample.is_empty() {
        return Ok(failure(FailureReason::NoOppositePoint, "empty limit set sample".into(), None));
    }
    let opposite = best_opposite_point(&sample)?;
    if opposite.margin <= opts.min_margin {
        return Ok(failure(
            FailureReason::NoOppositePoint,
            format!(
                "best opposition margin {:.3e} (raw {:.3e}, sample resolution {:.3e}) is below {:.0e}",
                opposite.margin, opposite.raw_margin, sample.resolution, opts.min_margin
            ),
            Some(opposite.margin),
        ));
    }
    let opp_margin = Some(opposite.margin);
    let delta_ball = sub.ball(opts.delta_radius, opts.cap)?;
    let delta_set: BTreeSet<&RationalMatrix> = delta_ball.iter().map(|(_, m)| m).collect();
    let sample_flags = sample.flag_list();

    let spec = BallSpec::with_cap(group.clone(), opts.gamma_radius, true, opts.cap)?;
    let mut ball = Ball::new(&spec)?;
    let mut tried = 0usize;
    let mut last: Option<(FailureReason, String)> = None;
    for _ in 0..opts.gamma_radius {
        let sphere = ball.advance().to_vec();
        for e in sphere {
            if delta_set.contains(&e.matrix) || !is_proximal(&e.matrix)?.is_proximal {
                continue;
            }
            let plus = flag::cyclic_limit_flag(&e.matrix)?;
            let minus = flag::cyclic_limit_flag(&e.matrix.inverse()?)?;
            let mut worst = f64::INFINITY;
            for s in &sample_flags {
                worst = worst.min(flag::opposition_margin(&plus, s)?).min(flag::opposition_margin(&minus, s)?);
            }
            if worst - sample.resolution <= opts.min_margin {
                continue;
            }
            let cand = Candidate { word: e.word.clone(), matrix: e.matrix.clone(), plus, minus };
            match build(group, delta_generators, &sample, &delta_ball, &cand, opts)? {
                Ok(cert) => {
                    let report = verify_certificate(&cert)?;
                    if report.ok {
                        return Ok(SearchOutcome::Certificate(cert));
                    }
                    last = Some((FailureReason::MarginTooSmall, report.failure.unwrap_or_default()));
                }
                Err(f) => last = Some(f),
            }
            tried += 1;
            if tried >= opts.max_candidates {
                break;
            }
        }
        if tried >= opts.max_candidates {
            break;
        }
    }
    Ok(match last {
        None => failure(
            FailureReason::NoProximal,
            format!("no proximal element opposite to the limit sample within radius {}", opts.gamma_radius),
            opp_margin,
        ),
        Some((reason, detail)) => failure(reason, detail, opp_margin),
    })
}
