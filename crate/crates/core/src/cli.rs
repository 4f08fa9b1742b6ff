//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails (the report
//! carries the witnesses), 2 for usage or input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog;
use crate::classify::classify_with;
use crate::construct::{assemble_psi_r, construct, CompletionConfig, ConstructionReport};
use crate::error::{Error, Result};
use crate::freqset::FrequencySet;
use crate::lattice::{digit_set, validate_dilation, DilationMatrix, DEFAULT_MAX_EXPONENT};
use crate::rational;
use crate::render::{render_set, render_wavelet};
use crate::tiling::{build_dilation_tile, verify_wavelet_set, DEFAULT_SAMPLES};
use crate::wavelet::{verify_all, PiecewiseWavelet, WaveletDoc};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "latticewave", version, about = "Exact wavelet sets and MSF-perturbed wavelets for integer dilations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Catalog name (dyadic1d, triadic1d, quincunx, dyadic2d) or a JSON matrix file.
    #[arg(long)]
    pub matrix: Option<String>,
    /// Random seed for sampling and seed placement.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample points per randomized check.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Canonical digit set of A.
    Digits {
        #[command(flatten)]
        common: Common,
    },
    /// Check both tiling conditions of a candidate wavelet set.
    VerifySet {
        #[command(flatten)]
        common: Common,
        /// Catalog set name (shannon-set, journe-set) or a JSON set file.
        #[arg(long)]
        set: String,
    },
    /// Check the wavelet characterization for a piecewise-constant wavelet.
    VerifyWavelet {
        #[command(flatten)]
        common: Common,
        /// Wavelet JSON file, or a construction report embedding one.
        #[arg(long)]
        wavelet: PathBuf,
    },
    /// Complete a seed to a wavelet set and assemble the wavelet of class M_r.
    Construct {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        p: i32,
        /// Residual threshold accepted when the completion cannot close up exactly.
        #[arg(long, default_value = "1/1000000")]
        tolerance: String,
        #[arg(long, default_value_t = 500)]
        max_iter: u32,
        /// Assemble the wavelet even when the completion is inexact.
        #[arg(long)]
        allow_inexact: bool,
    },
    /// Verify a wavelet and report its class M_r or M_inf.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Wavelet JSON file, or a construction report embedding one.
        #[arg(long)]
        wavelet: PathBuf,
    },
    /// Render a planar object as SVG.
    Render {
        #[command(flatten)]
        common: Common,
        /// Catalog set name or a JSON set file.
        #[arg(long, conflicts_with_all = ["wavelet", "tile"])]
        set: Option<String>,
        /// Wavelet JSON file, or a construction report embedding one.
        #[arg(long, conflicts_with = "tile")]
        wavelet: Option<PathBuf>,
        /// Draw the reference dilation tile of --matrix.
        #[arg(long)]
        tile: bool,
    },
    /// Re-verify and write the catalog fixtures into a directory.
    Fixtures {
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Digits { common } => {
            let m = require_matrix(&common)?;
            let digits = digit_set(&m);
            emit(&common.out, &DigitsDoc { digits: digits.digits(), a: m.det_abs() })?;
            Ok(EXIT_PASS)
        }
        Command::VerifySet { common, set } => {
            let (s, default_matrix) = load_set(&set)?;
            let m = match (&common.matrix, default_matrix) {
                (Some(_), _) => require_matrix(&common)?,
                (None, Some(name)) => catalog::matrix(name)?,
                (None, None) => return Err(usage("--matrix is required for a set file")),
            };
            let report = verify_wavelet_set(&s, &m, common.samples, common.seed)?;
            emit(&common.out, &report)?;
            Ok(verdict(report.passed()))
        }
        Command::VerifyWavelet { common, wavelet } => {
            let w = load_wavelet(&wavelet, &common)?;
            let report = verify_all(&w, common.samples, common.seed)?;
            emit(&common.out, &report)?;
            Ok(verdict(report.passed))
        }
        Command::Construct { common, r, p, tolerance, max_iter, allow_inexact } => {
            let m = require_matrix(&common)?;
            let tolerance = rational::parse(&tolerance)?;
            let config = CompletionConfig::new(tolerance, max_iter);
            run_construct(&m, r, p, &common, &config, allow_inexact)
        }
        Command::Classify { common, wavelet } => {
            let w = load_wavelet(&wavelet, &common)?;
            match classify_with(&w, common.samples, common.seed) {
                Ok(c) => {
                    emit(&common.out, &c.to_doc())?;
                    Ok(EXIT_PASS)
                }
                Err(Error::NotAWavelet(msg)) => {
                    emit(&common.out, &json!({ "class": null, "error": msg }))?;
                    Ok(EXIT_FAIL)
                }
                Err(e) => Err(e),
            }
        }
        Command::Render { common, set, wavelet, tile } => {
            let svg = match (set, wavelet, tile) {
                (Some(name), None, false) => render_set(&load_set(&name)?.0, None)?,
                (None, Some(path), false) => render_wavelet(&load_wavelet(&path, &common)?, None)?,
                (None, None, true) => render_set(&build_dilation_tile(&require_matrix(&common)?)?, None)?,
                _ => return Err(usage("render needs exactly one of --set, --wavelet, --tile")),
            };
            write_text(&common.out, &svg)?;
            Ok(EXIT_PASS)
        }
        Command::Fixtures { common } => {
            let dir = common.out.clone().ok_or_else(|| usage("fixtures needs --out <directory>"))?;
            write_fixtures(&dir, common.samples, common.seed)
        }
    }
}

#[derive(Serialize)]
struct DigitsDoc<'a> {
    digits: &'a [Vec<i64>],
    a: u64,
}

#[derive(Serialize)]
struct ConstructOutput<'a> {
    #[serde(flatten)]
    report: &'a ConstructionReport,
    wavelet: Option<WaveletDoc>,
}

fn run_construct(
    m: &DilationMatrix,
    r: u32,
    p: i32,
    common: &Common,
    config: &CompletionConfig,
    allow_inexact: bool,
) -> Result<i32> {
    let report = match construct(m, r, p, common.seed, config) {
        Ok(report) => report,
        Err(
            e @ (Error::NoProgress { .. }
            | Error::MaxIterations { .. }
            | Error::PieceLimit { .. }
            | Error::SearchExhausted { .. }
            | Error::InvalidSeed(_)),
        ) => {
            emit(&common.out, &json!({ "exact": false, "error": e.to_string() }))?;
            return Ok(EXIT_FAIL);
        }
        Err(e) => return Err(e),
    };
    let wavelet = if p == 1 && (report.exact || allow_inexact) {
        Some(assemble_psi_r(m, &report, allow_inexact)?.to_doc())
    } else {
        None
    };
    let ok = wavelet.is_some();
    emit(&common.out, &ConstructOutput { report: &report, wavelet })?;
    Ok(verdict(ok))
}

fn write_fixtures(dir: &Path, samples: usize, seed: u64) -> Result<i32> {
    std::fs::create_dir_all(dir.join("matrices"))?;
    std::fs::create_dir_all(dir.join("sets"))?;
    let mut ok = true;
    for (name, m) in catalog::all_matrices() {
        let rows = m.entries().to_vec();
        validate_dilation(&rows, DEFAULT_MAX_EXPONENT)?;
        write_json(&dir.join("matrices").join(format!("{name}.json")), &json!({ "matrix": rows }))?;
    }
    for name in catalog::SET_NAMES {
        let (s, matrix_name) = catalog::set(name).expect("catalog set");
        let report = verify_wavelet_set(&s, &catalog::matrix(matrix_name)?, samples, seed)?;
        if !report.passed() {
            eprintln!("fixture {name} failed verification");
            ok = false;
            continue;
        }
        write_json(&dir.join("sets").join(format!("{name}.json")), &s)?;
    }
    Ok(verdict(ok))
}

fn verdict(ok: bool) -> i32 {
    if ok {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn usage(msg: &str) -> Error {
    Error::Parse(msg.to_string())
}

/// Catalog name, or a file holding a document accepted by [`parse_matrix`].
pub fn load_matrix(spec: &str) -> Result<DilationMatrix> {
    if catalog::matrix_entries(spec).is_some() {
        return catalog::matrix(spec);
    }
    parse_matrix(&read_input(spec, "matrix")?)
}

/// `{"matrix": [[...]]}` or a bare `[[...]]`, rows of `A`.
pub fn parse_matrix(text: &str) -> Result<DilationMatrix> {
    let value: Value = serde_json::from_str(text)?;
    let rows = match value {
        Value::Object(mut o) => o.remove("matrix").ok_or_else(|| usage("matrix document has no \"matrix\" field"))?,
        v => v,
    };
    let rows: Vec<Vec<i64>> = serde_json::from_value(rows)?;
    validate_dilation(&rows, DEFAULT_MAX_EXPONENT)
}

/// Catalog name (with the matrix it belongs to) or a set file.
pub fn load_set(spec: &str) -> Result<(FrequencySet, Option<&'static str>)> {
    if let Some((s, m)) = catalog::set(spec) {
        return Ok((s, Some(m)));
    }
    let text = read_input(spec, "set")?;
    Ok((serde_json::from_str(&text)?, None))
}

/// A wavelet document, or a construction report whose `wavelet` field holds one.
pub fn load_wavelet(path: &Path, common: &Common) -> Result<PiecewiseWavelet> {
    let text = std::fs::read_to_string(path)?;
    let mut value: Value = serde_json::from_str(&text)?;
    if let Some(embedded) = value.get_mut("wavelet") {
        if embedded.is_null() {
            return Err(usage("the construction report carries no wavelet"));
        }
        value = embedded.take();
    }
    let doc: WaveletDoc = serde_json::from_value(value)?;
    let m = common.matrix.as_deref().map(load_matrix).transpose()?;
    PiecewiseWavelet::from_doc(doc, m.as_ref())
}

fn require_matrix(common: &Common) -> Result<DilationMatrix> {
    load_matrix(common.matrix.as_deref().ok_or_else(|| usage("--matrix is required"))?)
}

fn read_input(spec: &str, what: &str) -> Result<String> {
    std::fs::read_to_string(spec)
        .map_err(|e| usage(&format!("{what} {spec:?} is neither a catalog name nor a readable file: {e}")))
}

/// Pretty JSON into a file, one compact line on standard output.
fn emit<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let text = match out {
        Some(_) => serde_json::to_string_pretty(value)?,
        None => serde_json::to_string(value)?,
    };
    write_text(out, &format!("{text}\n"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, format!("{}\n", serde_json::to_string_pretty(value)?))?;
    Ok(())
}

fn write_text(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
