//! On-disk formats: group presentations, `Z^2` reps, ping-pong certificates
//! (JSON) and report tables (JSON or CSV).
//!
//! Rationals are always strings (`"p/q"` or an integer), so matrices
//! round-trip exactly. Floats in JSON use the shortest representation that
//! parses back to the same `f64`; CSV floats are written with 17 significant
//! digits.

use std::collections::BTreeMap;
use std::path::Path;

use regulus_core::flag::ProjPoint;
use regulus_core::pingpong::{BallUnionSet, PingPongCertificate, SearchFailure, VerifyReport};
use regulus_core::rational;
use regulus_core::scan::{BallScanReport, LimitSetSample};
use regulus_core::z2::{NormalizationStep, Verdict, Z2UnipotentRep};
use regulus_core::{GroupWord, Generators, RationalMatrix};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::json(path, &e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A rational entry: a string, or a plain JSON integer for convenience.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Text(String),
    Int(i64),
}

impl Entry {
    fn parse(&self) -> regulus_core::Result<regulus_core::Rational> {
        match self {
            Entry::Text(s) => rational::parse(s),
            Entry::Int(n) => Ok(rational::int(*n)),
        }
    }
}

fn matrix_rows(m: &RationalMatrix) -> Vec<Vec<Entry>> {
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| Entry::Text(rational::to_string(m.get(i, j)))).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub dim: usize,
    pub generators: BTreeMap<String, Vec<Vec<Entry>>>,
}

impl GroupFile {
    pub fn from_generators(generators: &Generators) -> Self {
        let dim = generators.values().next().map(RationalMatrix::dim).unwrap_or(3);
        Self { dim, generators: generators.iter().map(|(k, m)| (k.clone(), matrix_rows(m))).collect() }
    }

    /// Checks shapes, names and `det = 1` for every generator.
    pub fn to_generators(&self, path: &Path) -> Result<Generators> {
        if self.generators.is_empty() {
            return Err(CliError::in_file(path, "generators", "no generators"));
        }
        let mut out = Generators::new();
        for (name, rows) in &self.generators {
            if GroupWord::parse(name).ok().filter(|w| w.len() == 1 && w.to_string() == *name).is_none() {
                return Err(CliError::in_file(path, "generators", format!("bad generator name {name:?}")));
            }
            if rows.len() != self.dim || rows.iter().any(|r| r.len() != self.dim) {
                return Err(CliError::in_file(path, name, format!("expected a {0}x{0} matrix", self.dim)));
            }
            let entries = rows
                .iter()
                .flatten()
                .map(Entry::parse)
                .collect::<regulus_core::Result<Vec<_>>>()
                .map_err(|e| CliError::in_file(path, name, e))?;
            let m = RationalMatrix::group_element(self.dim, entries).map_err(|e| CliError::in_file(path, name, e))?;
            out.insert(name.clone(), m);
        }
        Ok(out)
    }
}

pub fn load_group(path: &Path) -> Result<Generators> {
    read_json::<GroupFile>(path)?.to_generators(path)
}

pub fn parse_word(text: &str, generators: &Generators) -> Result<GroupWord> {
    let w = GroupWord::parse(text).map_err(|e| CliError::Input(format!("word {text:?}: {e}")))?;
    for s in w.syllables() {
        if !generators.contains_key(&s.name) {
            return Err(regulus_core::Error::UnboundGenerator(s.name.clone()).into());
        }
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepFile {
    pub a_x: Entry,
    pub b_x: Entry,
    pub c_x: Entry,
    pub a_y: Entry,
    pub b_y: Entry,
    pub c_y: Entry,
}

impl RepFile {
    pub fn to_rep(&self, path: &Path) -> Result<Z2UnipotentRep> {
        let p = |name: &str, e: &Entry| e.parse().map_err(|err| CliError::in_file(path, name, err));
        let x = regulus_core::z2::UnipotentTriple::new(p("a_x", &self.a_x)?, p("b_x", &self.b_x)?, p("c_x", &self.c_x)?);
        let y = regulus_core::z2::UnipotentTriple::new(p("a_y", &self.a_y)?, p("b_y", &self.b_y)?, p("c_y", &self.c_y)?);
        Ok(Z2UnipotentRep::new(x, y)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallJson {
    pub center: Vec<f64>,
    pub radius: f64,
}

fn balls_to_json(set: &BallUnionSet) -> Vec<BallJson> {
    set.centers()
        .iter()
        .zip(set.radii())
        .map(|(c, r)| BallJson { center: c.coords().to_vec(), radius: *r })
        .collect()
}

fn balls_from_json(balls: &[BallJson]) -> regulus_core::Result<BallUnionSet> {
    let centers = balls.iter().map(|b| ProjPoint::new(&b.center)).collect::<regulus_core::Result<Vec<_>>>()?;
    BallUnionSet::new(centers, balls.iter().map(|b| b.radius).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    /// Path of the group file the search ran on, as given on the command line.
    pub group_file: Option<String>,
    /// The generators themselves, so the certificate is self-contained.
    pub group: GroupFile,
    pub delta_generators: Vec<String>,
    pub gamma: String,
    pub power: u32,
    pub c1: Vec<BallJson>,
    pub c2: Vec<BallJson>,
    pub margin: f64,
    pub exceptional: Vec<String>,
    pub grid_resolution: f64,
    pub delta_radius: usize,
    pub word_check_length: usize,
}

impl CertificateFile {
    pub fn new(cert: &PingPongCertificate, group_file: Option<String>) -> Self {
        Self {
            group_file,
            group: GroupFile::from_generators(&cert.group),
            delta_generators: cert.delta_generators.iter().map(ToString::to_string).collect(),
            gamma: cert.gamma.to_string(),
            power: cert.power,
            c1: balls_to_json(&cert.c1),
            c2: balls_to_json(&cert.c2),
            margin: cert.margin,
            exceptional: cert.exceptional.iter().map(ToString::to_string).collect(),
            grid_resolution: cert.grid_resolution,
            delta_radius: cert.delta_radius,
            word_check_length: cert.word_check_length,
        }
    }

    pub fn to_certificate(&self, path: &Path) -> Result<PingPongCertificate> {
        let group = self.group.to_generators(path)?;
        let word = |w: &str| parse_word(w, &group);
        let set = |name: &str, b: &[BallJson]| balls_from_json(b).map_err(|e| CliError::in_file(path, name, e));
        Ok(PingPongCertificate {
            delta_generators: self.delta_generators.iter().map(|w| word(w)).collect::<Result<_>>()?,
            gamma: word(&self.gamma)?,
            power: self.power,
            c1: set("c1", &self.c1)?,
            c2: set("c2", &self.c2)?,
            margin: self.margin,
            exceptional: self.exceptional.iter().map(|w| word(w)).collect::<Result<_>>()?,
            grid_resolution: self.grid_resolution,
            delta_radius: self.delta_radius,
            word_check_length: self.word_check_length,
            group,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanJson {
    pub word: String,
    pub sigma: Vec<f64>,
    pub mu: Vec<f64>,
    pub certified_error: f64,
    pub gap: f64,
    /// Exact-Frobenius bracket for `sigma1/sigma2`, `d = 3` only.
    pub gap_bounds: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordJson {
    pub radius: usize,
    pub sphere_size: usize,
    pub min_gap: f64,
    pub median_gap: f64,
    pub argmin_word: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFamilyJson {
    pub words: Vec<String>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanJson {
    pub radius: usize,
    pub verdict: String,
    pub records: Vec<RecordJson>,
    pub witness: Option<WitnessFamilyJson>,
}

impl ScanJson {
    pub fn new(report: &BallScanReport, radius: usize) -> Self {
        Self {
            radius,
            verdict: report.verdict.as_str().to_string(),
            records: report
                .records
                .iter()
                .map(|r| RecordJson {
                    radius: r.radius,
                    sphere_size: r.sphere_size,
                    min_gap: r.min_gap,
                    median_gap: r.median_gap,
                    argmin_word: r.argmin_word.to_string(),
                })
                .collect(),
            witness: report.witness.as_ref().map(|w| WitnessFamilyJson {
                words: w.words.iter().map(ToString::to_string).collect(),
                bound: w.bound,
            }),
        }
    }
}

pub fn scan_csv(report: &BallScanReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["radius", "sphere_size", "min_gap", "median_gap", "argmin_word"])?;
    for r in &report.records {
        w.write_record([
            r.radius.to_string(),
            r.sphere_size.to_string(),
            fmt_f64(r.min_gap),
            fmt_f64(r.median_gap),
            r.argmin_word.to_string(),
        ])?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagJson {
    pub point: Vec<f64>,
    pub conormal: Vec<f64>,
    pub word: String,
    pub radius: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSetJson {
    pub radius: usize,
    pub gap_threshold: f64,
    pub resolution: f64,
    pub empty_warning: bool,
    pub flags: Vec<FlagJson>,
}

impl LimitSetJson {
    pub fn new(sample: &LimitSetSample) -> Self {
        Self {
            radius: sample.radius,
            gap_threshold: sample.gap_threshold,
            resolution: sample.resolution,
            empty_warning: sample.empty_warning,
            flags: sample
                .flags
                .iter()
                .map(|s| FlagJson {
                    point: s.flag.point.coords().to_vec(),
                    conormal: s.flag.hyperplane.conormal().to_vec(),
                    word: s.word.to_string(),
                    radius: s.radius,
                })
                .collect(),
        }
    }
}

/// Columns `dim, p0.., c0.., word, radius`.
pub fn flags_csv(sample: &LimitSetSample, dim: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["dim".to_string()];
    header.extend((0..dim).map(|i| format!("p{i}")));
    header.extend((0..dim).map(|i| format!("c{i}")));
    header.extend(["word".to_string(), "radius".to_string()]);
    w.write_record(&header)?;
    for s in &sample.flags {
        let mut row = vec![dim.to_string()];
        row.extend(s.flag.point.coords().iter().map(|x| fmt_f64(*x)));
        row.extend(s.flag.hyperplane.conormal().iter().map(|x| fmt_f64(*x)));
        row.extend([s.word.to_string(), s.radius.to_string()]);
        w.write_record(&row)?;
    }
    finish(w)
}

/// Reads a flag CSV back as `(point, conormal)` pairs.
pub fn read_flags_csv(text: &str) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let dim: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| CliError::Input("bad dim column".into()))?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| CliError::Input(format!("bad float in column {i}")))
        };
        let point = (1..=dim).map(num).collect::<Result<Vec<_>>>()?;
        let conormal = (dim + 1..=2 * dim).map(num).collect::<Result<Vec<_>>>()?;
        out.push((point, conormal));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepJson {
    Lambda(String),
    BasisChange([[i64; 2]; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberJson {
    pub t: u64,
    pub n: i64,
    pub m: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub kind: String,
    pub description: String,
    pub bound: f64,
    /// The first members `x^n y^m` of the family.
    pub members: Vec<MemberJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub rep: String,
    pub kind: String,
    pub witness: Option<WitnessJson>,
    pub normalization: Vec<StepJson>,
    pub kernel: Option<(i64, i64)>,
}

pub const LISTED_MEMBERS: u64 = 8;

impl VerdictJson {
    pub fn new(rep: &Z2UnipotentRep, v: &Verdict) -> Result<Self> {
        let witness = match &v.witness {
            None => None,
            Some(w) => {
                let mut members = Vec::new();
                for t in 1..=LISTED_MEMBERS {
                    let (n, m) = w.exponents(t)?;
                    members.push(MemberJson { t, n, m });
                }
                Some(WitnessJson {
                    kind: w.kind.as_str().to_string(),
                    description: w.description.clone(),
                    bound: w.bound,
                    members,
                })
            }
        };
        Ok(Self {
            rep: rep.to_string(),
            kind: v.kind.as_str().to_string(),
            witness,
            normalization: v
                .normalization
                .iter()
                .map(|s| match s {
                    NormalizationStep::Lambda(l) => StepJson::Lambda(rational::to_string(l)),
                    NormalizationStep::BasisChange(b) => StepJson::BasisChange(*b),
                })
                .collect(),
            kernel: v.kernel,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyJson {
    pub ok: bool,
    pub margin: f64,
    pub words_checked: usize,
    pub failure: Option<String>,
}

impl From<&VerifyReport> for VerifyJson {
    fn from(r: &VerifyReport) -> Self {
        Self { ok: r.ok, margin: r.margin, words_checked: r.words_checked, failure: r.failure.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchFailureJson {
    pub reason: String,
    pub detail: String,
    pub opposite_margin: Option<f64>,
}

impl From<&SearchFailure> for SearchFailureJson {
    fn from(f: &SearchFailure) -> Self {
        Self { reason: f.reason.as_str().to_string(), detail: f.detail.clone(), opposite_margin: f.opposite_margin }
    }
}
