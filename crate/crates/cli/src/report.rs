//! Structured report documents. JSON is the primary format; every payload
//! also renders as a flat CSV table. The `payload` and `spec` sections are a
//! pure function of the experiment spec — timing lives outside them, so
//! reruns of an identical spec produce byte-identical result sections.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use dcs_core::reduce::ReductionSolution;
use dcs_core::{
    CounterexampleRecord, ExtendedReal, LetterTriple, Orientation, PostulationReport,
    ReductionProblem, TriangleReport,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: "dcs",
            version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ReportDocument<S: Serialize, P: Serialize> {
    pub tool: ToolInfo,
    pub spec: S,
    pub payload: P,
    /// True when the run produced a violation / counterexample; surfaced to
    /// scripts through exit status 3.
    pub finding: bool,
    pub duration_ms: f64,
}

/// One orientation's deficit within a triangle evaluation.
#[derive(Debug, Serialize)]
pub struct OrientationDeficit {
    pub orientation: Orientation,
    pub deficit: f64,
}

#[derive(Debug, Serialize)]
pub struct DivergencePayload {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chen_sbert: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kl: Option<ExtendedReal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub js: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub js_metric: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct TrianglePayload {
    /// Canonical P-Q-R orientation report.
    pub report: TriangleReport,
    pub orientations: Vec<OrientationDeficit>,
    pub worst_orientation: Orientation,
    pub worst_deficit: f64,
}

#[derive(Debug, Serialize)]
pub struct SearchPayload {
    pub found: Option<CounterexampleRecord>,
    pub trials_run: u64,
    /// Recomputing the stored deficit reproduces it within 1e−12.
    pub reverified: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct PostulatePayload {
    #[serde(flatten)]
    pub report: PostulationReport,
    pub reverified: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct ReducePayload {
    pub problem: ReductionProblem,
    pub solution: Option<ReductionSolution>,
    /// All roots along the free axis when two parameters are pinned.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis_roots: Option<Vec<ReductionSolution>>,
}

#[derive(Debug, Serialize)]
pub struct LemmaGridPayload {
    pub k: f64,
    /// Whether the two-letter triangle guarantee covers this k (k ≤ 1).
    pub guarantee_applies: bool,
    pub case_grid: usize,
    pub case_points: u64,
    pub min_case_fraction: f64,
    pub case_argmin: LetterTriple,
    /// Points with fraction below 1 − 1e−12.
    pub case_violations: u64,
    pub xy_grid: usize,
    pub xy_points: u64,
    pub min_xy_margin: f64,
    pub xy_argmin: (f64, f64),
    /// Points with X − Y below −1e−12.
    pub xy_violations: u64,
}

/// Flat table rendering for `--format csv`.
pub trait CsvTable {
    fn csv(&self) -> String;
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

impl CsvTable for DivergencePayload {
    fn csv(&self) -> String {
        let mut out = String::from("measure,value\n");
        if let Some(v) = self.chen_sbert {
            out.push_str(&format!("chen-sbert,{}\n", fmt(v)));
        }
        if let Some(v) = self.kl {
            let rendered = match v {
                ExtendedReal::Finite(x) => fmt(x),
                ExtendedReal::PositiveInfinity => "inf".to_owned(),
            };
            out.push_str(&format!("kl,{rendered}\n"));
        }
        if let Some(v) = self.js {
            out.push_str(&format!("js,{}\n", fmt(v)));
        }
        if let Some(v) = self.js_metric {
            out.push_str(&format!("js-metric,{}\n", fmt(v)));
        }
        out
    }
}

impl CsvTable for TrianglePayload {
    fn csv(&self) -> String {
        let mut out = String::from("orientation,deficit,worst\n");
        for od in &self.orientations {
            out.push_str(&format!(
                "{},{},{}\n",
                od.orientation,
                fmt(od.deficit),
                od.orientation == self.worst_orientation
            ));
        }
        out
    }
}

fn record_row(record: &CounterexampleRecord) -> String {
    format!(
        "{},{},{},{},{},{}\n",
        record.trial_index,
        record.triangle_orientation,
        fmt(record.deficit),
        record.seed,
        record.refined,
        record.variant,
    )
}

const RECORD_HEADER: &str = "trial_index,orientation,deficit,seed,refined,variant\n";

impl CsvTable for SearchPayload {
    fn csv(&self) -> String {
        let mut out = String::from(RECORD_HEADER);
        if let Some(record) = &self.found {
            out.push_str(&record_row(record));
        }
        out
    }
}

impl CsvTable for PostulatePayload {
    fn csv(&self) -> String {
        let mut out = String::from("trials_run,violations_found,worst_deficit\n");
        out.push_str(&format!(
            "{},{},{}\n",
            self.report.trials_run,
            self.report.violations_found,
            fmt(self.report.worst_deficit),
        ));
        out
    }
}

impl CsvTable for ReducePayload {
    fn csv(&self) -> String {
        let mut out = String::from("found,alpha,beta,gamma,residual,feasible\n");
        let mut row = |s: &ReductionSolution| {
            out.push_str(&format!(
                "true,{},{},{},{},{}\n",
                fmt(s.candidate.alpha),
                fmt(s.candidate.beta),
                fmt(s.candidate.gamma),
                fmt(s.residual),
                s.feasible
            ));
        };
        match (&self.axis_roots, &self.solution) {
            (Some(roots), _) if !roots.is_empty() => roots.iter().for_each(&mut row),
            (_, Some(solution)) => row(solution),
            _ => out.push_str("false,,,,,\n"),
        }
        out
    }
}

impl CsvTable for LemmaGridPayload {
    fn csv(&self) -> String {
        format!(
            "k,guarantee_applies,min_case_fraction,case_violations,min_xy_margin,xy_violations\n{},{},{},{},{},{}\n",
            fmt(self.k),
            self.guarantee_applies,
            fmt(self.min_case_fraction),
            self.case_violations,
            fmt(self.min_xy_margin),
            self.xy_violations,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Renders the document and writes it to `--output` or stdout. CSV carries
/// the payload table only; JSON carries the whole document.
pub fn emit<S: Serialize, P: Serialize + CsvTable>(
    doc: &ReportDocument<S, P>,
    format: Format,
    output: Option<&PathBuf>,
) -> Result<(), String> {
    let rendered = match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(doc)
                .map_err(|e| format!("cannot serialize report: {e}"))?;
            text.push('\n');
            text
        }
        Format::Csv => doc.payload.csv(),
    };
    match output {
        Some(path) => fs::write(path, rendered)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.as_bytes())
                .map_err(|e| format!("cannot write report: {e}"))
        }
    }
}

/// Appends one JSON line per record; existing archive content is never
/// rewritten, so falsification evidence accumulates.
pub fn append_archive(path: &PathBuf, record: &CounterexampleRecord) -> Result<(), String> {
    let line = serde_json::to_string(record)
        .map_err(|e| format!("cannot serialize counterexample: {e}"))?;
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| format!("cannot open archive {}: {e}", path.display()))?;
    writeln!(file, "{line}").map_err(|e| format!("cannot append to archive: {e}"))
}
