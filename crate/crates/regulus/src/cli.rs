//! Command-line driver. Every subcommand returns an exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, `DIVERGENT-TREND`, certificate verified |
//! | 1 | certificate failed verification |
//! | 2 | bad input, parse error, radius over cap, other errors |
//! | 3 | scan verdict `BOUNDED-WITNESS` |
//! | 4 | scan verdict `INCONCLUSIVE` |
//! | 5 | empty limit-set sample |
//! | 6 | ping-pong search found no certificate |

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use regulus_core::pingpong::{self, SearchOptions, SearchOutcome};
use regulus_core::scan::{self, BallSpec, ScanOptions, ScanVerdict, DEFAULT_RADIUS_CAP};
use regulus_core::{svd, z2, Error as CoreError};

use crate::error::{CliError, Result};
use crate::files::{self, CartanJson, CertificateFile, LimitSetJson, RepFile, ScanJson, VerdictJson, VerifyJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BOUNDED: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;
pub const EXIT_EMPTY_SAMPLE: i32 = 5;
pub const EXIT_SEARCH_FAILED: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "regulus", version, about = "Regularity and ping-pong experiments for subgroups of SL(3) and SL(4)")]
pub struct Cli {
    /// Worker threads for sphere statistics and set-inclusion checks.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Singular values and Cartan projection of a word.
    Cartan {
        group: PathBuf,
        word: String,
        #[command(flatten)]
        output: Output,
    },
    /// Per-sphere sigma1/sigma2 statistics with a trend verdict.
    Scan {
        group: PathBuf,
        #[arg(long, default_value_t = 10)]
        radius: usize,
        /// Minimum gap at the largest radius for DIVERGENT-TREND.
        #[arg(long, default_value_t = 10.0)]
        threshold: f64,
        /// Keep words that evaluate to already seen matrices.
        #[arg(long)]
        no_dedupe: bool,
        #[arg(long)]
        cap_override: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Classify a unipotent Z^2 representation.
    #[command(name = "classify-z2")]
    ClassifyZ2 {
        rep: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample limit flags of the ball elements with a large gap.
    Limitset {
        group: PathBuf,
        #[arg(long, default_value_t = 10)]
        radius: usize,
        #[arg(long, default_value_t = 2.0)]
        threshold: f64,
        #[arg(long)]
        cap_override: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Free-product certificates.
    Pingpong {
        #[command(subcommand)]
        action: PingpongCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum PingpongCommand {
    /// Search for a certificate that <delta, gamma^N> = Delta * <gamma^N>.
    Search {
        group: PathBuf,
        /// Generators of Delta as words, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        delta: Vec<String>,
        /// Word radius of the proximal-element search.
        #[arg(long, default_value_t = 6)]
        radius: usize,
        /// Gap threshold for the limit-set sample of Delta.
        #[arg(long, default_value_t = 2.0)]
        threshold: f64,
        /// Set-inclusion resolution stored in the certificate.
        #[arg(long, default_value_t = pingpong::DEFAULT_RESOLUTION)]
        resolution: f64,
        #[arg(long)]
        cap_override: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate file.
    Verify {
        certificate: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(format!("--{name} must be positive, got {v}")))
    }
}

fn spec(group: &Path, radius: usize, dedupe: bool, cap: Option<usize>) -> Result<BallSpec> {
    let generators = files::load_group(group)?;
    Ok(BallSpec::with_cap(generators, radius, dedupe, cap.unwrap_or(DEFAULT_RADIUS_CAP))?)
}

/// Runs the parsed command, printing errors to stderr.
pub fn run(cli: Cli) -> i32 {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return EXIT_INPUT;
        }
        // a second call (tests driving `run` in-process) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Cartan { group, word, output } => cartan(&group, &word, &output),
        Command::Scan { group, radius, threshold, no_dedupe, cap_override, output } => {
            positive("threshold", threshold)?;
            let spec = spec(&group, radius, !no_dedupe, cap_override)?;
            let report = scan::sphere_stats(&spec, &ScanOptions { divergence_threshold: threshold, tail_start: None })?;
            let text = match output.format {
                Format::Json => files::to_json(&ScanJson::new(&report, radius)),
                Format::Csv => files::scan_csv(&report)?,
            };
            emit(output.out.as_deref(), &text)?;
            eprintln!("{}", report.verdict.as_str());
            Ok(match report.verdict {
                ScanVerdict::DivergentTrend => EXIT_OK,
                ScanVerdict::BoundedWitness => EXIT_BOUNDED,
                ScanVerdict::Inconclusive => EXIT_INCONCLUSIVE,
            })
        }
        Command::ClassifyZ2 { rep, out } => {
            let r = files::read_json::<RepFile>(&rep)?.to_rep(&rep)?;
            let verdict = z2::classify_z2(&r)?;
            emit(out.as_deref(), &files::to_json(&VerdictJson::new(&r, &verdict)?))?;
            Ok(EXIT_OK)
        }
        Command::Limitset { group, radius, threshold, cap_override, output } => {
            if !(threshold > 1.0) {
                return Err(CliError::Input(format!("--threshold must exceed 1, got {threshold}")));
            }
            let spec = spec(&group, radius, true, cap_override)?;
            let sample = scan::limit_set_sample(&spec, threshold)?;
            let text = match output.format {
                Format::Json => files::to_json(&LimitSetJson::new(&sample)),
                Format::Csv => files::flags_csv(&sample, spec.dim())?,
            };
            emit(output.out.as_deref(), &text)?;
            if sample.empty_warning {
                eprintln!("warning: no element of the radius-{radius} ball has sigma1/sigma2 >= {threshold}");
                return Ok(EXIT_EMPTY_SAMPLE);
            }
            Ok(EXIT_OK)
        }
        Command::Pingpong { action } => match action {
            PingpongCommand::Search { group, delta, radius, threshold, resolution, cap_override, out } => {
                positive("resolution", resolution)?;
                if !(threshold > 1.0) {
                    return Err(CliError::Input(format!("--threshold must exceed 1, got {threshold}")));
                }
                let generators = files::load_group(&group)?;
                let delta = delta.iter().map(|w| files::parse_word(w, &generators)).collect::<Result<Vec<_>>>()?;
                let mut opts = SearchOptions {
                    gamma_radius: radius,
                    sample_threshold: threshold,
                    resolution,
                    ..SearchOptions::default()
                };
                if let Some(cap) = cap_override {
                    opts.cap = cap;
                }
                match pingpong::search(&generators, &delta, &opts)? {
                    SearchOutcome::Certificate(cert) => {
                        let file = CertificateFile::new(&cert, Some(group.display().to_string()));
                        emit(out.as_deref(), &files::to_json(&file))?;
                        eprintln!("certificate: gamma = {}, N = {}, margin = {:e}", cert.gamma, cert.power, cert.margin);
                        Ok(EXIT_OK)
                    }
                    SearchOutcome::Failure(f) => {
                        emit(out.as_deref(), &files::to_json(&files::SearchFailureJson::from(&f)))?;
                        eprintln!("search failed: {}: {}", f.reason.as_str(), f.detail);
                        Ok(EXIT_SEARCH_FAILED)
                    }
                }
            }
            PingpongCommand::Verify { certificate, out } => {
                let cert = files::read_json::<CertificateFile>(&certificate)?.to_certificate(&certificate)?;
                let report = match pingpong::verify_certificate(&cert) {
                    Ok(r) => VerifyJson::from(&r),
                    Err(e @ (CoreError::NotDisjoint { .. } | CoreError::ResolutionInsufficient { .. })) => {
                        VerifyJson { ok: false, margin: f64::NEG_INFINITY, words_checked: 0, failure: Some(e.to_string()) }
                    }
                    Err(e) => return Err(e.into()),
                };
                let text = files::to_json(&report);
                emit(out.as_deref(), &text)?;
                if report.ok {
                    Ok(EXIT_OK)
                } else {
                    eprintln!("verification failed: {}", report.failure.as_deref().unwrap_or("unknown"));
                    Ok(EXIT_VERIFY_FAILED)
                }
            }
        },
    }
}

fn cartan(group: &Path, word: &str, output: &Output) -> Result<i32> {
    let generators = files::load_group(group)?;
    let w = files::parse_word(word, &generators)?;
    let g = w.eval(&generators)?;
    let s = svd::singular_values(&g)?;
    let record = CartanJson {
        word: w.to_string(),
        mu: s.sigma.iter().map(|x| x.ln()).collect(),
        gap: s.gap(),
        certified_error: s.certified_error,
        gap_bounds: svd::sigma_gap_bounds(&g).ok().map(|(lo, hi)| [lo, hi]),
        sigma: s.sigma,
    };
    let text = match output.format {
        Format::Json => files::to_json(&record),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let d = record.sigma.len();
            let mut header = vec!["word".to_string()];
            header.extend((1..=d).map(|i| format!("sigma{i}")));
            header.extend((1..=d).map(|i| format!("mu{i}")));
            header.extend(["certified_error".to_string(), "gap".to_string()]);
            w.write_record(&header)?;
            let mut row = vec![record.word.clone()];
            row.extend(record.sigma.iter().chain(&record.mu).map(|x| files::fmt_f64(*x)));
            row.extend([files::fmt_f64(record.certified_error), files::fmt_f64(record.gap)]);
            w.write_record(&row)?;
            String::from_utf8(w.into_inner().map_err(|e| CliError::Input(e.to_string()))?).expect("utf-8")
        }
    };
    emit(output.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}
