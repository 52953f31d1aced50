//! Word balls in finitely generated matrix groups and empirical regularity
//! diagnostics: `sigma1/sigma2` statistics per sphere, contracting
//! subsequences and limit-set samples.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flag::{self, ContractionLimit, ProjFlag};
use crate::matrix::RationalMatrix;
use crate::par;
use crate::svd;
use crate::word::{generator_dim, GroupWord, Generators};

pub const DEFAULT_RADIUS_CAP: usize = 30;

/// Finite approximation of a group: generators plus a word-length radius.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSpec {
    pub generators: Generators,
    pub radius: usize,
    /// Collapse words with equal matrices. Spheres are then spheres of the
    /// word metric on the group itself (each element appears once, at its
    /// geodesic length, represented by its length-lex smallest word).
    pub dedupe: bool,
    pub cap: usize,
}

impl BallSpec {
    pub fn new(generators: Generators, radius: usize, dedupe: bool) -> Result<Self> {
        Self::with_cap(generators, radius, dedupe, DEFAULT_RADIUS_CAP)
    }

    pub fn with_cap(generators: Generators, radius: usize, dedupe: bool, cap: usize) -> Result<Self> {
        generator_dim(&generators)?;
        if radius > cap {
            return Err(Error::RadiusOverCap { radius, cap });
        }
        Ok(Self { generators, radius, dedupe, cap })
    }

    pub fn dim(&self) -> usize {
        generator_dim(&self.generators).unwrap_or(3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallElement {
    pub word: GroupWord,
    pub matrix: RationalMatrix,
}

struct Letter {
    name: String,
    sign: i64,
    matrix: RationalMatrix,
}

/// Sphere-by-sphere enumeration in length-lex order.
pub struct Ball {
    letters: Vec<Letter>,
    dedupe: bool,
    seen: BTreeSet<RationalMatrix>,
    current: Vec<BallElement>,
    radius: usize,
}

impl Ball {
    pub fn new(spec: &BallSpec) -> Result<Self> {
        let dim = generator_dim(&spec.generators)?;
        let mut letters = Vec::new();
        for (name, g) in &spec.generators {
            letters.push(Letter { name: name.clone(), sign: 1, matrix: g.clone() });
            letters.push(Letter { name: name.clone(), sign: -1, matrix: g.inverse()? });
        }
        let id = RationalMatrix::identity(dim);
        let mut seen = BTreeSet::new();
        seen.insert(id.clone());
        Ok(Self {
            letters,
            dedupe: spec.dedupe,
            seen,
            current: alloc::vec![BallElement { word: GroupWord::identity(), matrix: id }],
            radius: 0,
        })
    }

    /// The sphere most recently produced (radius 0 before the first call).
    pub fn sphere(&self) -> &[BallElement] {
        &self.current
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn advance(&mut self) -> &[BallElement] {
        let mut next = Vec::new();
        for elem in &self.current {
            let last = elem.word.last_letter();
            for letter in &self.letters {
                if let Some((name, sign)) = last {
                    if name == letter.name && sign == -letter.sign {
                        continue;
                    }
                }
                let matrix = &elem.matrix * &letter.matrix;
                if self.dedupe && !self.seen.insert(matrix.clone()) {
                    continue;
                }
                let word = elem.word.concat(&GroupWord::letter(&letter.name, letter.sign));
                next.push(BallElement { word, matrix });
            }
        }
        self.current = next;
        self.radius += 1;
        &self.current
    }
}

/// Words of length exactly `r` (or group elements at distance `r` when
/// deduplicating), with their matrices.
pub fn enumerate_sphere(spec: &BallSpec, r: usize) -> Result<Vec<BallElement>> {
    if r > spec.radius || r > spec.cap {
        return Err(Error::RadiusOverCap { radius: r, cap: spec.radius.min(spec.cap) });
    }
    let mut ball = Ball::new(spec)?;
    for _ in 0..r {
        ball.advance();
    }
    Ok(ball.current)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanVerdict {
    DivergentTrend,
    BoundedWitness,
    Inconclusive,
}

impl ScanVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScanVerdict::DivergentTrend => "DIVERGENT-TREND",
            ScanVerdict::BoundedWitness => "BOUNDED-WITNESS",
            ScanVerdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusRecord {
    pub radius: usize,
    pub sphere_size: usize,
    pub min_gap: f64,
    pub median_gap: f64,
    pub argmin_word: GroupWord,
}

/// Words of increasing length along which `sigma1/sigma2 <= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedFamily {
    pub words: Vec<GroupWord>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallScanReport {
    pub records: Vec<RadiusRecord>,
    pub verdict: ScanVerdict,
    pub witness: Option<BoundedFamily>,
}

/// Thresholds for turning finite-ball statistics into a verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Minimum gap required at the largest radius for a divergence trend.
    pub divergence_threshold: f64,
    /// First radius of the "tail" window; default `floor(R/2) + 1`.
    pub tail_start: Option<usize>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { divergence_threshold: 10.0, tail_start: None }
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn sphere_record(radius: usize, sphere: &[BallElement]) -> Result<Option<RadiusRecord>> {
    if sphere.is_empty() {
        return Ok(None);
    }
    let gaps: Vec<Result<f64>> = par::map(sphere, |e| svd::gap_ratio(&e.matrix));
    let gaps: Vec<f64> = gaps.into_iter().collect::<Result<_>>()?;
    let mut argmin = 0;
    for (i, g) in gaps.iter().enumerate() {
        if *g < gaps[argmin] {
            argmin = i;
        }
    }
    let mut sorted = gaps.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    Ok(Some(RadiusRecord {
        radius,
        sphere_size: sphere.len(),
        min_gap: gaps[argmin],
        median_gap: median(&sorted),
        argmin_word: sphere[argmin].word.clone(),
    }))
}

/// Per-sphere `sigma1/sigma2` statistics and a trend verdict.
///
/// * `DIVERGENT-TREND`: the sphere minimum is nondecreasing over the tail
///   window and exceeds `divergence_threshold` at the largest radius.
/// * `BOUNDED-WITNESS`: the sphere minima over the tail never exceed the
///   largest minimum seen before the tail; the tail argmin words form the
///   witness family with `bound` their largest gap.
/// * `INCONCLUSIVE` otherwise.
pub fn sphere_stats(spec: &BallSpec, options: &ScanOptions) -> Result<BallScanReport> {
    let mut ball = Ball::new(spec)?;
    let mut records = Vec::new();
    for r in 1..=spec.radius {
        ball.advance();
        match sphere_record(r, ball.sphere())? {
            Some(rec) => records.push(rec),
            None => break,
        }
    }
    Ok(judge(records, spec.radius, options))
}

pub fn judge(records: Vec<RadiusRecord>, radius: usize, options: &ScanOptions) -> BallScanReport {
    let inconclusive = |records| BallScanReport { records, verdict: ScanVerdict::Inconclusive, witness: None };
    if records.len() < radius || records.is_empty() {
        return inconclusive(records);
    }
    let tail_start = options.tail_start.unwrap_or(radius / 2 + 1).clamp(1, radius);
    let (head, tail): (Vec<&RadiusRecord>, Vec<&RadiusRecord>) =
        records.iter().partition(|r| r.radius < tail_start);

    let nondecreasing = tail.windows(2).all(|w| w[1].min_gap >= w[0].min_gap * (1.0 - 1e-12));
    let last = tail.last().map(|r| r.min_gap).unwrap_or(0.0);
    if nondecreasing && last > options.divergence_threshold {
        return BallScanReport { records, verdict: ScanVerdict::DivergentTrend, witness: None };
    }

    if !head.is_empty() {
        let head_max = head.iter().map(|r| r.min_gap).fold(f64::MIN, f64::max);
        let tail_max = tail.iter().map(|r| r.min_gap).fold(f64::MIN, f64::max);
        if tail_max <= head_max * (1.0 + 1e-12) {
            let witness = BoundedFamily {
                words: tail.iter().map(|r| r.argmin_word.clone()).collect(),
                bound: tail_max,
            };
            return BallScanReport { records, verdict: ScanVerdict::BoundedWitness, witness: Some(witness) };
        }
    }
    inconclusive(records)
}

/// Extracts a subsequence along which `sigma1/sigma2` strictly increases and
/// the attracting flags cluster, returning the indices and the attracting /
/// repelling data of the last (largest-gap) element. `None` when the whole
/// list has gap below 10.
pub fn contracting_subsequence(ms: &[RationalMatrix]) -> Result<Option<(Vec<usize>, ContractionLimit)>> {
    if ms.len() < 3 {
        return Err(Error::Precondition("contracting_subsequence needs at least 3 matrices".into()));
    }
    let decs: Vec<Result<svd::SingularDecomposition>> = par::map(ms, svd::decompose);
    let decs: Vec<svd::SingularDecomposition> = decs.into_iter().collect::<Result<_>>()?;
    let gaps: Vec<f64> = decs.iter().map(|d| d.values.gap()).collect();
    if gaps.iter().all(|g| *g < 10.0) {
        return Ok(None);
    }
    let candidates: Vec<usize> = (0..ms.len()).filter(|&i| gaps[i] > flag::MIN_GAP).collect();
    let lis = longest_increasing(&candidates, &gaps);
    let Some(&last) = lis.last() else {
        return Ok(None);
    };
    let limit = flag::contraction_from(&decs[last])?;
    let mut kept = Vec::new();
    for &i in &lis {
        let c = flag::contraction_from(&decs[i])?;
        if flag::fs_distance(&c.attracting.point, &limit.attracting.point)? < 5e-4 {
            kept.push(i);
        }
    }
    if kept.len() < 2 {
        return Ok(None);
    }
    Ok(Some((kept, limit)))
}

/// Longest strictly increasing subsequence of `values[idx]` over `idx` in
/// `candidates`; earliest-ending choice on ties.
fn longest_increasing(candidates: &[usize], values: &[f64]) -> Vec<usize> {
    let mut tails: Vec<usize> = Vec::new(); // positions into candidates
    let mut prev: Vec<Option<usize>> = alloc::vec![None; candidates.len()];
    for (pos, &i) in candidates.iter().enumerate() {
        let v = values[i];
        let k = tails.partition_point(|&t| values[candidates[t]] < v);
        if k > 0 {
            prev[pos] = Some(tails[k - 1]);
        }
        if k == tails.len() {
            tails.push(pos);
        } else {
            tails[k] = pos;
        }
    }
    let mut out = Vec::new();
    let mut cur = tails.last().copied();
    while let Some(p) = cur {
        out.push(candidates[p]);
        cur = prev[p];
    }
    out.reverse();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledFlag {
    pub flag: ProjFlag,
    pub word: GroupWord,
    pub radius: usize,
}

/// Approximate limit set: one flag per ball element with a large enough gap,
/// taken as the limit of the attracting flags of its powers.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitSetSample {
    pub flags: Vec<SampledFlag>,
    pub radius: usize,
    pub gap_threshold: f64,
    /// Set when no element passed the threshold.
    pub empty_warning: bool,
    /// Largest distance from a flag first seen beyond radius `R/2` to the
    /// flags already present by radius `R/2`: how far the sample was still
    /// moving, used as a resolution allowance downstream.
    pub resolution: f64,
}

impl LimitSetSample {
    pub fn flag_list(&self) -> Vec<ProjFlag> {
        self.flags.iter().map(|s| s.flag.clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }
}

pub const SAMPLE_DEDUPE: f64 = 1e-6;

pub fn limit_set_sample(spec: &BallSpec, gap_threshold: f64) -> Result<LimitSetSample> {
    if !(gap_threshold > 1.0) {
        return Err(Error::Precondition("gap threshold must exceed 1".into()));
    }
    let mut ball = Ball::new(spec)?;
    let mut flags: Vec<SampledFlag> = Vec::new();
    for r in 1..=spec.radius {
        let sphere = ball.advance().to_vec();
        let found: Vec<Result<Option<ProjFlag>>> = par::map(&sphere, |e| {
            if svd::gap_ratio(&e.matrix)? >= gap_threshold {
                flag::cyclic_limit_flag(&e.matrix).map(Some)
            } else {
                Ok(None)
            }
        });
        for (elem, f) in sphere.iter().zip(found) {
            let Some(f) = f? else { continue };
            let mut duplicate = false;
            for s in &flags {
                if s.flag.distance(&f)? < SAMPLE_DEDUPE {
                    duplicate = true;
                    break;
                }
            }
            if !duplicate {
                flags.push(SampledFlag { flag: f, word: elem.word.clone(), radius: r });
            }
        }
    }
    let half = spec.radius / 2;
    let mut resolution: f64 = 0.0;
    let early: Vec<&SampledFlag> = flags.iter().filter(|s| s.radius <= half).collect();
    for s in flags.iter().filter(|s| s.radius > half) {
        if early.is_empty() {
            resolution = core::f64::consts::FRAC_PI_2;
            break;
        }
        let mut nearest = f64::INFINITY;
        for e in &early {
            nearest = nearest.min(s.flag.distance(&e.flag)?);
        }
        resolution = resolution.max(nearest);
    }
    Ok(LimitSetSample {
        empty_warning: flags.is_empty(),
        flags,
        radius: spec.radius,
        gap_threshold,
        resolution,
    })
}

/// True iff the sampled points form at most three clusters at Fubini-Study
/// resolution `1e-3`. Intended for discrete `Z^2` inputs outside minimal
/// horospherical subgroups (caller's responsibility).
pub fn three_point_check(sample: &LimitSetSample) -> Result<bool> {
    let mut reps: Vec<&flag::ProjPoint> = Vec::new();
    for s in &sample.flags {
        let p = &s.flag.point;
        let mut placed = false;
        for r in &reps {
            if flag::fs_distance(p, r)? < 1e-3 {
                placed = true;
                break;
            }
        }
        if !placed {
            reps.push(p);
            if reps.len() > 3 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
