//! Command-line front end: configuration, report envelopes, comparison with
//! published constants, and CSV output.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certifier::{
    self, build_grid, certify_adaptive, paper_lipschitz, sweep_paper_mode, threshold_y, AdaptiveConfig,
    CertificationReport, GridSpec, ThresholdBranch, REFERENCE_TOL, THRESHOLD_ZETA_TOL,
};
use crate::energy::{
    conjecture_scan, global_volume_bound, lj_energy, min_dilated_energy, optimal_volume, triangular_zeta,
    EnergyValue, ExponentPair, LJParams, ScanPoint,
};
use crate::error::Error;
use crate::lattice::{DomainPoint, SQRT3_2};
use crate::zeta::{epstein_at_order, epstein_certified, CertifiedValue, TruncationSpec};

pub const SCHEMA_VERSION: &str = "1.0.0";

/// JSON schema every report validates against.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

/// Environment variable consulted for the worker count when no flag is given.
pub const WORKERS_ENV: &str = "TRILATTICE_WORKERS";

pub const CSV_HEADER: &str = "x,y,value";

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_VERDICT_FALSE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

/// Published constants, used only to flag agreement in reports.
pub mod published {
    pub const TABLE_VERSION: u32 = 1;

    #[derive(Debug, Clone, Copy)]
    pub struct Row {
        pub alpha: f64,
        pub beta: f64,
        pub y_bar: &'static str,
        pub m: f64,
    }

    pub const ROWS: [Row; 7] = [
        Row { alpha: 12.0, beta: 6.0, y_bar: "7.52", m: 181.0 },
        Row { alpha: 14.0, beta: 6.0, y_bar: "5.23", m: 95.0 },
        Row { alpha: 16.0, beta: 6.0, y_bar: "4.18", m: 72.0 },
        Row { alpha: 18.0, beta: 6.0, y_bar: "3.60", m: 50.0 },
        Row { alpha: 20.0, beta: 6.0, y_bar: "3.22", m: 39.0 },
        Row { alpha: 22.0, beta: 6.0, y_bar: "2.97", m: 34.0 },
        Row { alpha: 24.0, beta: 6.0, y_bar: "2.77", m: 33.0 },
    ];

    /// `M delta sqrt(2)/2` quoted for (12, 6).
    pub const LIPSCHITZ_MARGIN_12_6: f64 = 1.28;
    pub const TRUNCATION: u32 = 40;
    pub const DELTA: f64 = 0.01;
    pub const X_COUNT: usize = 50;
    pub const Y_COUNT: usize = 666;

    pub fn lookup(alpha: f64, beta: f64) -> Option<Row> {
        ROWS.iter().copied().find(|r| r.alpha == alpha && r.beta == beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Paper,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum Functional {
    /// The zeta quotient.
    #[serde(rename = "Q")]
    #[value(name = "Q")]
    Q,
    /// The log-weighted lattice sum `F_s`.
    #[serde(rename = "F")]
    #[value(name = "F")]
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Certify,
    Table1,
    Zeta,
    Energy,
    OptimalVolume,
    Scan,
}

/// Everything that determines a run's result. The worker count and output
/// location are not part of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<Functional>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
    #[serde(default)]
    pub include_cells: bool,
    #[serde(default)]
    pub skip_adaptive: bool,
    #[serde(default)]
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: CommandName) -> Self {
        RunConfig {
            command,
            alpha: None,
            beta: None,
            a: None,
            b: None,
            x: None,
            y: None,
            s: None,
            volume: None,
            delta: None,
            n: None,
            tol: None,
            mode: None,
            m: None,
            k: None,
            epsilon: None,
            max_depth: None,
            margin: None,
            functional: None,
            y_max: None,
            include_cells: false,
            skip_adaptive: false,
            format: Format::Json,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComparisonStatus {
    Match,
    Mismatch,
    /// The published number is not what its printed formula evaluates to.
    NonmatchingAsPrinted,
    /// A documented convention difference.
    ConventionDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub quantity: String,
    pub computed: String,
    pub published: String,
    pub status: ComparisonStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperComparison {
    pub table_version: u32,
    pub entries: Vec<ComparisonEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaResult {
    pub x: f64,
    pub y: f64,
    pub s: f64,
    pub tol: Option<f64>,
    pub n: Option<u32>,
    pub value: CertifiedValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyResult {
    pub x: f64,
    pub y: f64,
    pub volume: f64,
    pub params: LJParams,
    pub energy: EnergyValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeResult {
    pub x: f64,
    pub y: f64,
    pub params: LJParams,
    pub optimal_volume: f64,
    pub min_dilated_energy: f64,
    pub global_volume_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveRowSummary {
    pub verdict: bool,
    pub max_local_bound: Option<f64>,
    pub min_certified_margin: Option<f64>,
    pub cells_certified: usize,
    pub cells_fallback: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub alpha: f64,
    pub beta: f64,
    pub y_bar: String,
    pub y_exact: f64,
    pub branch: ThresholdBranch,
    pub literal_m: f64,
    pub adaptive: Option<AdaptiveRowSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub functional: Functional,
    pub truncation: u32,
    pub rows: Vec<ScanPoint>,
    pub argmin: ScanPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "kebab-case")]
pub enum Payload {
    Certification(Box<CertificationReport>),
    Table1(Vec<Table1Row>),
    Zeta(ZetaResult),
    Energy(EnergyResult),
    OptimalVolume(VolumeResult),
    Scan(ScanResult),
}

/// Top-level JSON document written by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub schema_version: String,
    pub library_version: String,
    pub command: CommandName,
    pub config: RunConfig,
    pub result: Payload,
    pub paper_comparison: Option<PaperComparison>,
    /// Key results to 6 significant digits.
    pub summary: BTreeMap<String, String>,
    pub timing: Timing,
    pub timestamp: String,
}

impl ReportEnvelope {
    /// The envelope with run-dependent fields (timestamp, timing) blanked.
    pub fn without_run_metadata(&self) -> ReportEnvelope {
        ReportEnvelope {
            timing: Timing { elapsed_seconds: 0.0, workers: 0 },
            timestamp: String::new(),
            ..self.clone()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Computation(#[from] Error),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Computation(_) | CliError::Io(_) => EXIT_COMPUTATION,
        }
    }
}

/// Worker count from the flag, else `TRILATTICE_WORKERS`, else the machine's parallelism.
pub fn resolve_workers(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(w) = flag {
        return if w == 0 { Err(CliError::Config("--workers must be >= 1".into())) } else { Ok(w) };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(certifier::default_workers()),
    }
}

/// Six significant digits.
pub fn six_digits(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp).max(0) as usize, v)
    } else {
        format!("{v:.5e}")
    }
}

fn need(v: Option<f64>, flag: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing required flag --{flag}")))
}

fn positive(v: f64, flag: &str) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("--{flag} must be positive and finite, got {v}")))
    }
}

fn exponents(c: &RunConfig) -> Result<ExponentPair, CliError> {
    let (a, b) = (need(c.alpha, "alpha")?, need(c.beta, "beta")?);
    ExponentPair::new(a, b).map_err(|e| CliError::Config(e.to_string()))
}

fn point(c: &RunConfig) -> Result<DomainPoint, CliError> {
    DomainPoint::new(need(c.x, "x")?, need(c.y, "y")?).map_err(|e| CliError::Config(e.to_string()))
}

fn lj_params(c: &RunConfig) -> Result<LJParams, CliError> {
    let e = exponents(c)?;
    LJParams::new(e, need(c.a, "a")?, need(c.b, "b")?).map_err(|e| CliError::Config(e.to_string()))
}

fn truncation(c: &RunConfig, default: u32) -> Result<TruncationSpec, CliError> {
    TruncationSpec::new(c.n.unwrap_or(default)).map_err(|e| CliError::Config(e.to_string()))
}

/// Checks every precondition of `c.command` without computing anything.
pub fn validate(c: &RunConfig) -> Result<(), CliError> {
    if let Some(t) = c.tol {
        positive(t, "tol")?;
    }
    if let Some(d) = c.delta {
        positive(d, "delta")?;
    }
    if let Some(k) = c.k {
        if k > 12 {
            return Err(CliError::Config(format!("--k must be <= 12, got {k}")));
        }
    }
    match c.command {
        CommandName::Certify => {
            exponents(c)?;
            if let Some(m) = c.m {
                if !(m >= 0.0) {
                    return Err(CliError::Config(format!("--m must be >= 0, got {m}")));
                }
            }
            if let Some(e) = c.epsilon {
                positive(e, "epsilon")?;
            }
            if c.format == Format::Csv {
                return Err(CliError::Config("certify writes JSON only".into()));
            }
            truncation(c, published::TRUNCATION)?;
            GridSpec::rectangle(c.delta.unwrap_or(0.01), 1.0, 1.0).map_err(|e| CliError::Config(e.to_string()))?;
        }
        CommandName::Table1 => {
            if c.format == Format::Csv {
                return Err(CliError::Config("table1 writes JSON only".into()));
            }
        }
        CommandName::Zeta => {
            point(c)?;
            let s = need(c.s, "s")?;
            if !(s > 2.0) {
                return Err(CliError::Config(format!("--s must exceed 2, got {s}")));
            }
            if c.n.is_some() && c.tol.is_some() {
                return Err(CliError::Config("give either --n or --tol, not both".into()));
            }
            if c.n.is_some() {
                truncation(c, 1)?;
            }
        }
        CommandName::Energy => {
            point(c)?;
            lj_params(c)?;
            positive(c.volume.unwrap_or(1.0), "volume")?;
        }
        CommandName::OptimalVolume => {
            point(c)?;
            let p = lj_params(c)?;
            if !(p.b > 0.0) {
                return Err(CliError::Config("--b must be positive for an optimal volume".into()));
            }
        }
        CommandName::Scan => {
            match c.functional {
                Some(Functional::Q) => {
                    exponents(c)?;
                }
                Some(Functional::F) => {
                    let s = need(c.s, "s")?;
                    if !(s > 2.0) {
                        return Err(CliError::Config(format!("--s must exceed 2, got {s}")));
                    }
                }
                None => return Err(CliError::Config("missing required flag --functional".into())),
            }
            truncation(c, published::TRUNCATION)?;
            let y_max = c.y_max.unwrap_or(3.0);
            GridSpec::rectangle(c.delta.unwrap_or(0.01), SQRT3_2, y_max.max(SQRT3_2))
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
    }
    Ok(())
}

/// Result of running one command.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub envelope: ReportEnvelope,
    pub csv: Option<String>,
    pub exit_code: i32,
}

fn threshold_comparison(e: &ExponentPair, y_bar: &str, k: u32) -> Vec<ComparisonEntry> {
    match published::lookup(e.alpha, e.beta) {
        Some(row) if k == 2 => vec![ComparisonEntry {
            quantity: format!("y_bar({}, {})", e.alpha, e.beta),
            computed: y_bar.to_string(),
            published: row.y_bar.to_string(),
            status: if row.y_bar == y_bar { ComparisonStatus::Match } else { ComparisonStatus::Mismatch },
        }],
        _ => Vec::new(),
    }
}

fn m_comparison(e: &ExponentPair, literal: f64) -> Option<ComparisonEntry> {
    published::lookup(e.alpha, e.beta).map(|row| ComparisonEntry {
        quantity: format!("M({}, {}) from the global formula", e.alpha, e.beta),
        computed: six_digits(literal),
        published: format!("{}", row.m),
        status: ComparisonStatus::NonmatchingAsPrinted,
    })
}

fn envelope(
    config: &RunConfig,
    result: Payload,
    paper_comparison: Option<PaperComparison>,
    summary: BTreeMap<String, String>,
    start: Instant,
    workers: usize,
) -> ReportEnvelope {
    ReportEnvelope {
        schema_version: SCHEMA_VERSION.to_string(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        command: config.command,
        config: config.clone(),
        result,
        paper_comparison,
        summary,
        timing: Timing { elapsed_seconds: start.elapsed().as_secs_f64(), workers },
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    }
}

pub fn cmd_certify(c: &RunConfig, workers: usize) -> Result<CommandOutput, CliError> {
    validate(c)?;
    let start = Instant::now();
    let e = exponents(c)?;
    let k = c.k.unwrap_or(certifier::DEFAULT_DECIMALS);
    let delta = c.delta.unwrap_or(0.01);
    let mut entries = Vec::new();
    let report = match c.mode.unwrap_or(Mode::Adaptive) {
        Mode::Paper => {
            let t = truncation(c, published::TRUNCATION)?;
            let threshold = threshold_y(&e, k, THRESHOLD_ZETA_TOL)?;
            let grid = build_grid(&threshold, delta)?;
            let m = match c.m {
                Some(m) => m,
                None => paper_lipschitz(&e, threshold.y_bar, t)?,
            };
            let report = sweep_paper_mode(&e, &threshold, &grid, m, t, workers)?;
            let paper = report.paper.as_ref().expect("paper summary");
            entries.extend(m_comparison(&e, paper.literal_formula_m));
            if e.alpha == 12.0 && e.beta == 6.0 && delta == published::DELTA {
                entries.push(ComparisonEntry {
                    quantity: "grid x-count".into(),
                    computed: grid.i_count.to_string(),
                    published: published::X_COUNT.to_string(),
                    status: ComparisonStatus::ConventionDifference,
                });
                entries.push(ComparisonEntry {
                    quantity: "grid y-count".into(),
                    computed: grid.j_count.to_string(),
                    published: published::Y_COUNT.to_string(),
                    status: status(grid.j_count == published::Y_COUNT),
                });
                if let Some(m) = c.m {
                    entries.push(ComparisonEntry {
                        quantity: "M delta sqrt(2)/2".into(),
                        computed: six_digits(paper.lipschitz_margin),
                        published: format!("{}", published::LIPSCHITZ_MARGIN_12_6),
                        status: status((paper.lipschitz_margin - published::LIPSCHITZ_MARGIN_12_6).abs() < 0.005 && m > 0.0),
                    });
                }
                entries.push(ComparisonEntry {
                    quantity: "min grid Q - M delta sqrt(2)/2 > 2".into(),
                    computed: report.verdict.to_string(),
                    published: "true".into(),
                    status: status(report.verdict),
                });
            }
            report
        }
        Mode::Adaptive => {
            let cfg = AdaptiveConfig {
                delta,
                max_depth: c.max_depth.unwrap_or(8),
                epsilon: c.epsilon.unwrap_or(0.01),
                zeta_tol: c.tol.unwrap_or(1e-8),
                k,
                required_margin: c.margin,
                include_cells: c.include_cells,
                workers,
                ..AdaptiveConfig::default()
            };
            certify_adaptive(&e, &cfg)?
        }
    };
    entries.splice(0..0, threshold_comparison(&e, &report.threshold.y_bar_text, k));

    let mut summary = BTreeMap::new();
    summary.insert("verdict".into(), report.verdict.to_string());
    summary.insert("y_bar".into(), report.threshold.y_bar_text.clone());
    summary.insert("y_exact".into(), six_digits(report.threshold.y_exact));
    if let Some(q) = report.min_q {
        summary.insert("min_q".into(), six_digits(q.mid));
    }
    if let Some(p) = &report.paper {
        summary.insert("min_q_lower_minus_margin".into(), six_digits(p.min_q_lower_minus_margin));
        summary.insert("literal_formula_m".into(), six_digits(p.literal_formula_m));
    }
    if let Some(a) = &report.adaptive {
        summary.insert("cells_certified".into(), a.cells_certified.to_string());
        summary.insert("cells_failed".into(), a.cells_failed.to_string());
        summary.insert("cells_fallback".into(), a.cells_fallback.to_string());
        if let Some(l) = a.max_lipschitz {
            summary.insert("max_local_lipschitz".into(), six_digits(l));
        }
    }
    let exit_code = if report.verdict { EXIT_SUCCESS } else { EXIT_VERDICT_FALSE };
    let comparison = (!entries.is_empty()).then_some(PaperComparison { table_version: published::TABLE_VERSION, entries });
    Ok(CommandOutput {
        envelope: envelope(c, Payload::Certification(Box::new(report)), comparison, summary, start, workers),
        csv: None,
        exit_code,
    })
}

fn status(ok: bool) -> ComparisonStatus {
    if ok {
        ComparisonStatus::Match
    } else {
        ComparisonStatus::Mismatch
    }
}

pub fn cmd_table1(c: &RunConfig, workers: usize) -> Result<CommandOutput, CliError> {
    validate(c)?;
    let start = Instant::now();
    let t = TruncationSpec::paper();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut summary = BTreeMap::new();
    // Tabulated rows first, then the (12, 6) case
    let order = published::ROWS.iter().skip(1).chain(published::ROWS.iter().take(1));
    for row in order {
        let e = ExponentPair::new(row.alpha, row.beta)?;
        let threshold = threshold_y(&e, 2, THRESHOLD_ZETA_TOL)?;
        let literal_m = paper_lipschitz(&e, threshold.y_bar, t)?;
        let adaptive = if c.skip_adaptive {
            None
        } else {
            let cfg = AdaptiveConfig { workers, ..AdaptiveConfig::default() };
            let r = certify_adaptive(&e, &cfg)?;
            let a = r.adaptive.expect("adaptive summary");
            Some(AdaptiveRowSummary {
                verdict: r.verdict,
                max_local_bound: a.max_lipschitz,
                min_certified_margin: a.min_certified_margin,
                cells_certified: a.cells_certified,
                cells_fallback: a.cells_fallback,
            })
        };
        entries.extend(threshold_comparison(&e, &threshold.y_bar_text, 2));
        entries.extend(m_comparison(&e, literal_m));
        summary.insert(format!("y_bar({}, {})", row.alpha, row.beta), threshold.y_bar_text.clone());
        rows.push(Table1Row {
            alpha: row.alpha,
            beta: row.beta,
            y_bar: threshold.y_bar_text.clone(),
            y_exact: threshold.y_exact,
            branch: threshold.branch,
            literal_m,
            adaptive,
        });
    }
    let all_match = entries
        .iter()
        .filter(|e| e.quantity.starts_with("y_bar"))
        .all(|e| e.status == ComparisonStatus::Match);
    summary.insert("y_bar_all_match".into(), all_match.to_string());
    let comparison = PaperComparison { table_version: published::TABLE_VERSION, entries };
    Ok(CommandOutput {
        envelope: envelope(c, Payload::Table1(rows), Some(comparison), summary, start, workers),
        csv: None,
        exit_code: EXIT_SUCCESS,
    })
}

pub fn cmd_zeta(c: &RunConfig, workers: usize) -> Result<CommandOutput, CliError> {
    validate(c)?;
    let start = Instant::now();
    let p = point(c)?;
    let s = need(c.s, "s")?;
    let (value, tol) = match c.n {
        Some(n) => (epstein_at_order(&p, s, TruncationSpec::new(n)?)?, None),
        None => {
            let tol = c.tol.unwrap_or(1e-8);
            (epstein_certified(&p, s, tol)?, Some(tol))
        }
    };
    let mut summary = BTreeMap::new();
    summary.insert("zeta".into(), six_digits(value.mid));
    summary.insert("radius".into(), format!("{:.3e}", value.rad));
    let result = ZetaResult { x: p.x, y: p.y, s, tol, n: c.n, value };
    Ok(CommandOutput {
        envelope: envelope(c, Payload::Zeta(result), None, summary, start, workers),
        csv: None,
        exit_code: EXIT_SUCCESS,
    })
}

pub fn cmd_energy(c: &RunConfig, workers: usize) -> Result<CommandOutput, CliError> {
    validate(c)?;
    let start = Instant::now();
    let p = point(c)?;
    let params = lj_params(c)?;
    let volume = c.volume.unwrap_or(1.0);
    let energy = lj_energy(&p, volume, &params, c.tol.unwrap_or(1e-10))?;
    let mut summary = BTreeMap::new();
    summary.insert("energy".into(), six_digits(energy.value));
    let result = EnergyResult { x: p.x, y: p.y, volume, params, energy };
    Ok(CommandOutput {
        envelope: envelope(c, Payload::Energy(result), None, summary, start, workers),
        csv: None,
        exit_code: EXIT_SUCCESS,
    })
}

pub fn cmd_optimal_volume(c: &RunConfig, workers: usize) -> Result<CommandOutput, CliError> {
    validate(c)?;
    let start = Instant::now();
    let p = point(c)?;
    let params = lj_params(c)?;
    let tol = c.tol.unwrap_or(1e-10);
    let v = optimal_volume(&p, &params, tol)?;
    let emin = min_dilated_energy(&p, &params, tol)?;
    let bound = global_volume_bound(&params)?;
    let mut summary = BTreeMap::new();
    summary.insert("optimal_volume".into(), six_digits(v));
    summary.insert("min_dilated_energy".into(), six_digits(emin));
    let result = VolumeResult {
        x: p.x,
        y: p.y,
        params,
        optimal_volume: v,
        min_dilated_energy: emin,
        global_volume_bound: bound,
    };
    Ok(CommandOutput {
        envelope: envelope(c, Payload::OptimalVolume(result), None, summary, start, workers),
        csv: None,
        exit_code: EXIT_SUCCESS,
    })
}

pub fn cmd_scan(c: &RunConfig, workers: usize) -> Result<CommandOutput, CliError> {
    validate(c)?;
    let start = Instant::now();
    let t = truncation(c, published::TRUNCATION)?;
    let delta = c.delta.unwrap_or(0.01);
    let functional = c.functional.expect("validated");
    let (rows, argmin) = match functional {
        Functional::Q => {
            let e = exponents(c)?;
            let grid = match c.y_max {
                Some(y) => GridSpec::rectangle(delta, SQRT3_2, y.max(SQRT3_2))?,
                None => build_grid(&threshold_y(&e, c.k.unwrap_or(2), THRESHOLD_ZETA_TOL)?, delta)?,
            };
            quotient_scan(&e, &grid, t, workers)?
        }
        Functional::F => {
            let s = need(c.s, "s")?;
            let grid = GridSpec::rectangle(delta, SQRT3_2, c.y_max.unwrap_or(3.0).max(SQRT3_2))?;
            let scan = certifier::with_workers(workers, || conjecture_scan(s, &grid, t))??;
            (scan.points, scan.argmin)
        }
    };
    let csv = (c.format == Format::Csv).then(|| to_csv(&rows));
    let mut summary = BTreeMap::new();
    summary.insert("rows".into(), rows.len().to_string());
    summary.insert("argmin".into(), format!("({}, {})", six_digits(argmin.x), six_digits(argmin.y)));
    summary.insert("min_value".into(), six_digits(argmin.value));
    let result = ScanResult { functional, truncation: t.n, rows, argmin };
    Ok(CommandOutput {
        envelope: envelope(c, Payload::Scan(result), None, summary, start, workers),
        csv,
        exit_code: EXIT_SUCCESS,
    })
}

/// Midpoint quotient at fixed truncation on every grid point.
fn quotient_scan(
    e: &ExponentPair,
    grid: &GridSpec,
    t: TruncationSpec,
    workers: usize,
) -> Result<(Vec<ScanPoint>, ScanPoint), CliError> {
    let ra = triangular_zeta(e.alpha, REFERENCE_TOL)?.mid;
    let rb = triangular_zeta(e.beta, REFERENCE_TOL)?.mid;
    let coords: Vec<(f64, f64)> = grid.points().collect();
    let values: Vec<crate::error::Result<f64>> = certifier::with_workers(workers, || {
        coords
            .par_iter()
            .map(|&(x, y)| {
                let p = DomainPoint::new(x, y)?;
                let za = epstein_at_order(&p, e.alpha, t)?.mid;
                let zb = epstein_at_order(&p, e.beta, t)?.mid;
                Ok((za - ra) / (zb - rb))
            })
            .collect()
    })?;
    let mut rows = Vec::with_capacity(coords.len());
    for ((x, y), v) in coords.into_iter().zip(values) {
        rows.push(ScanPoint { x, y, value: v? });
    }
    let argmin = rows
        .iter()
        .filter(|p| p.value.is_finite())
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .ok_or_else(|| CliError::Computation(Error::InvalidGrid("no finite values".into())))?;
    Ok((rows, argmin))
}

/// `x,y,value` rows with LF line endings.
pub fn to_csv(rows: &[ScanPoint]) -> String {
    let mut out = String::with_capacity(rows.len() * 40 + 16);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.x, r.y, r.value));
    }
    out
}

pub fn run(c: &RunConfig, workers: usize) -> Result<CommandOutput, CliError> {
    match c.command {
        CommandName::Certify => cmd_certify(c, workers),
        CommandName::Table1 => cmd_table1(c, workers),
        CommandName::Zeta => cmd_zeta(c, workers),
        CommandName::Energy => cmd_energy(c, workers),
        CommandName::OptimalVolume => cmd_optimal_volume(c, workers),
        CommandName::Scan => cmd_scan(c, workers),
    }
}

#[derive(Debug, Parser)]
#[command(name = "trilattice", version, about = "Certified lattice-energy computations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, global = true, default_value = "json")]
    pub format: Format,
    /// Worker threads; defaults to $TRILATTICE_WORKERS, then the machine's parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify that the triangular lattice beats every other shape.
    Certify {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum, default_value = "adaptive")]
        mode: Mode,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        /// Fixed truncation order (paper mode).
        #[arg(long)]
        n: Option<u32>,
        /// Global Lipschitz constant (paper mode); defaults to the literal global formula.
        #[arg(long)]
        m: Option<f64>,
        /// Zeta tolerance (adaptive mode).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        max_depth: Option<u32>,
        /// Replace alpha/beta as the bound to exceed.
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long)]
        include_cells: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Thresholds and Lipschitz data for the tabulated exponent pairs.
    Table1 {
        #[arg(long)]
        skip_adaptive: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Epstein zeta function of a unit-density lattice.
    Zeta {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        n: Option<u32>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Lennard-Jones type energy of a dilated lattice.
    Energy {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, default_value_t = 1.0)]
        volume: f64,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Energy-minimising covolume of a lattice shape.
    OptimalVolume {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluate Q or F_s on a grid, for plotting.
    Scan {
        #[arg(long, value_enum)]
        functional: Functional,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long)]
        n: Option<u32>,
        /// Top row; defaults to the threshold height for Q and 3 for F.
        #[arg(long)]
        y_max: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

impl Command {
    /// Splits parsed arguments into the run configuration and output options.
    pub fn into_config(self) -> (RunConfig, OutputArgs) {
        match self {
            Command::Certify {
                alpha,
                beta,
                mode,
                delta,
                n,
                m,
                tol,
                k,
                epsilon,
                max_depth,
                margin,
                include_cells,
                out,
            } => {
                let mut c = RunConfig::new(CommandName::Certify);
                c.alpha = Some(alpha);
                c.beta = Some(beta);
                c.mode = Some(mode);
                c.delta = Some(delta);
                c.n = n;
                c.m = m;
                c.tol = tol;
                c.k = k;
                c.epsilon = epsilon;
                c.max_depth = max_depth;
                c.margin = margin;
                c.include_cells = include_cells;
                c.format = out.format;
                (c, out)
            }
            Command::Table1 { skip_adaptive, out } => {
                let mut c = RunConfig::new(CommandName::Table1);
                c.skip_adaptive = skip_adaptive;
                c.format = out.format;
                (c, out)
            }
            Command::Zeta { x, y, s, tol, n, out } => {
                let mut c = RunConfig::new(CommandName::Zeta);
                (c.x, c.y, c.s, c.tol, c.n) = (Some(x), Some(y), Some(s), tol, n);
                c.format = out.format;
                (c, out)
            }
            Command::Energy { alpha, beta, a, b, x, y, volume, tol, out } => {
                let mut c = RunConfig::new(CommandName::Energy);
                (c.alpha, c.beta, c.a, c.b) = (Some(alpha), Some(beta), Some(a), Some(b));
                (c.x, c.y, c.volume, c.tol) = (Some(x), Some(y), Some(volume), tol);
                c.format = out.format;
                (c, out)
            }
            Command::OptimalVolume { alpha, beta, a, b, x, y, tol, out } => {
                let mut c = RunConfig::new(CommandName::OptimalVolume);
                (c.alpha, c.beta, c.a, c.b) = (Some(alpha), Some(beta), Some(a), Some(b));
                (c.x, c.y, c.tol) = (Some(x), Some(y), tol);
                c.format = out.format;
                (c, out)
            }
            Command::Scan { functional, alpha, beta, s, delta, n, y_max, out } => {
                let mut c = RunConfig::new(CommandName::Scan);
                c.functional = Some(functional);
                (c.alpha, c.beta, c.s) = (alpha, beta, s);
                (c.delta, c.n, c.y_max) = (Some(delta), n, y_max);
                c.format = out.format;
                (c, out)
            }
        }
    }
}

fn write_output(out: &CommandOutput, path: Option<&PathBuf>) -> Result<(), CliError> {
    let body = match &out.csv {
        Some(csv) => csv.clone(),
        None => {
            let mut s = serde_json::to_string_pretty(&out.envelope)
                .map_err(|e| CliError::Computation(Error::Internal(e.to_string())))?;
            s.push('\n');
            s
        }
    };
    match path {
        Some(p) => std::fs::write(p, body)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command, writes the output and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_SUCCESS };
            let _ = e.print();
            return code;
        }
    };
    let (config, out) = cli.command.into_config();
    let result = resolve_workers(out.workers).and_then(|w| {
        validate(&config)?;
        let output = run(&config, w)?;
        write_output(&output, out.output.as_ref())?;
        Ok(output)
    });
    match result {
        Ok(output) => {
            for (k, v) in &output.envelope.summary {
                eprintln!("{k}: {v}");
            }
            output.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_digit_formatting() {
        assert_eq!(six_digits(7.514709), "7.51471");
        assert_eq!(six_digits(181.0), "181.000");
        assert_eq!(six_digits(1.5e9), "1.50000e9");
        assert_eq!(six_digits(0.0), "0");
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut c = RunConfig::new(CommandName::Certify);
        c.alpha = Some(6.0);
        c.beta = Some(12.0);
        assert_eq!(validate(&c).unwrap_err().exit_code(), EXIT_CONFIG);
        c.alpha = Some(12.0);
        c.beta = Some(6.0);
        assert!(validate(&c).is_ok());
        c.delta = Some(0.03);
        assert!(validate(&c).is_err());

        let mut z = RunConfig::new(CommandName::Zeta);
        z.x = Some(0.0);
        z.y = Some(1.0);
        z.s = Some(2.0);
        assert!(validate(&z).is_err());
        z.s = Some(6.0);
        assert!(validate(&z).is_ok());
    }

    #[test]
    fn zeta_command_value() {
        let mut z = RunConfig::new(CommandName::Zeta);
        (z.x, z.y, z.s, z.tol) = (Some(0.0), Some(1.0), Some(6.0), Some(1e-8));
        let out = cmd_zeta(&z, 1).unwrap();
        match out.envelope.result {
            Payload::Zeta(r) => assert!((r.value.mid - 4.658_913_6).abs() < 1e-6),
            other => panic!("unexpected payload {other:?}"),
        }
    }

    #[test]
    fn csv_has_fixed_header() {
        let rows = vec![ScanPoint { x: 0.0, y: 1.0, value: 2.5 }];
        assert_eq!(to_csv(&rows), "x,y,value\n0,1,2.5\n");
    }
}
