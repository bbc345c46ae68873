//! Result documents and their JSON/CSV encodings.
//!
//! Floats are written with 17 significant digits so every value survives a
//! round trip through text unchanged.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::config::{Command, OutputFormat, PolicySet, RunConfig};

pub const FORMAT_VERSION: &str = concat!("qgamble/", env!("CARGO_PKG_VERSION"));

/// Everything needed to rerun a result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub command: Command,
    pub seed: u64,
    pub rounds: u64,
    pub sessions: u64,
    pub r: f64,
    #[serde(rename = "R")]
    pub penalty: f64,
    pub noise: f64,
    pub abort_threshold: f64,
    pub theta: f64,
    pub phi: f64,
    pub claim: String,
    pub policy: PolicySet,
    pub theta_points: usize,
    pub phi_points: usize,
    pub format: OutputFormat,
}

impl From<&RunConfig> for ConfigEcho {
    fn from(c: &RunConfig) -> Self {
        ConfigEcho {
            command: c.command,
            seed: c.seed,
            rounds: c.rounds,
            sessions: c.sessions,
            r: c.params.check_rate,
            penalty: c.params.penalty,
            noise: c.params.noise,
            abort_threshold: c.params.abort_threshold,
            theta: c.point.theta(),
            phi: c.point.phi(),
            claim: c.point.claim_policy().as_str().to_string(),
            policy: c.policy,
            theta_points: c.theta_points,
            phi_points: c.phi_points,
            format: c.format,
        }
    }
}

/// One reported quantity. A metric with a `reference` is a check: it passes
/// when `|value − reference| ≤ tolerance`, unless the command says otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub reference: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: Option<bool>,
}

impl Metric {
    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Metric {
            name: name.into(),
            value,
            std_error: None,
            reference: None,
            tolerance: None,
            passed: None,
        }
    }

    pub fn sampled(name: impl Into<String>, value: f64, std_error: f64) -> Self {
        Metric {
            std_error: Some(std_error),
            ..Metric::info(name, value)
        }
    }

    /// Two-sided check against `reference`.
    pub fn close_to(mut self, reference: f64, tolerance: f64) -> Self {
        self.reference = Some(reference);
        self.tolerance = Some(tolerance);
        self.passed = Some((self.value - reference).abs() <= tolerance);
        self
    }

    /// One-sided check `value ≤ reference + tolerance`.
    pub fn at_most(mut self, reference: f64, tolerance: f64) -> Self {
        self.reference = Some(reference);
        self.tolerance = Some(tolerance);
        self.passed = Some(self.value <= reference + tolerance);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_f64(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub version: String,
    pub command: Command,
    pub config: ConfigEcho,
    pub metrics: Vec<Metric>,
    pub table: Option<Table>,
    /// True iff every check among the metrics passed.
    pub passed: bool,
}

impl ResultDocument {
    pub fn new(config: &RunConfig, metrics: Vec<Metric>, table: Option<Table>) -> Self {
        let passed = metrics.iter().all(|m| m.passed != Some(false));
        ResultDocument {
            version: FORMAT_VERSION.to_string(),
            command: config.command,
            config: ConfigEcho::from(config),
            metrics,
            table,
            passed,
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Metric> {
        self.metrics.iter().filter(|m| m.passed == Some(false))
    }
}

/// `{:.16e}`, i.e. 17 significant digits; non-finite values as `NaN`/`inf`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

struct RoundTripFloats;

impl Formatter for RoundTripFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        // serde_json routes non-finite values to write_null before this
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json(doc: &ResultDocument) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, RoundTripFloats);
    doc.serialize(&mut ser)
        .expect("in-memory serialization cannot fail");
    out.push(b'\n');
    out
}

/// Header row plus one row per table row.
pub fn table_to_csv(table: &Table) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

const METRIC_COLUMNS: [&str; 6] = [
    "name",
    "value",
    "std_error",
    "reference",
    "tolerance",
    "passed",
];

fn comment_line<T: Serialize>(out: &mut Vec<u8>, key: &str, value: &T) {
    out.extend_from_slice(format!("# {key} ").as_bytes());
    let mut ser = serde_json::Serializer::with_formatter(&mut *out, RoundTripFloats);
    value
        .serialize(&mut ser)
        .expect("in-memory serialization cannot fail");
    out.push(b'\n');
}

/// The table if the document has one, else one row per metric. Leading `#`
/// comment lines carry the config echo, and for tables also the metrics and
/// overall verdict, as JSON.
pub fn to_csv(doc: &ResultDocument) -> Vec<u8> {
    let mut out = Vec::new();
    comment_line(&mut out, "config", &doc.config);
    if doc.table.is_some() {
        comment_line(&mut out, "metrics", &doc.metrics);
        comment_line(&mut out, "passed", &doc.passed);
    }

    let table = match &doc.table {
        Some(t) => t.clone(),
        None => {
            let opt = |x: Option<f64>| x.map_or(Cell::Text(String::new()), Cell::Num);
            let mut t = Table::new(&METRIC_COLUMNS);
            for m in &doc.metrics {
                t.rows.push(vec![
                    Cell::Text(m.name.clone()),
                    Cell::Num(m.value),
                    opt(m.std_error),
                    opt(m.reference),
                    opt(m.tolerance),
                    Cell::Text(m.passed.map_or(String::new(), |p| p.to_string())),
                ]);
            }
            t
        }
    };
    out.extend(table_to_csv(&table));
    out
}

pub fn serialize(doc: &ResultDocument, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => to_json(doc),
        OutputFormat::Csv => to_csv(doc),
    }
}
