//! Run configuration and report envelopes.
//!
//! Every report echoes its configuration and carries a summary and exit
//! status. Numbers are written as 17-significant-digit decimals, or at full
//! working precision for big-float results. Object keys come out sorted and
//! nothing depends on time or locale, so identical configurations produce
//! identical bytes.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{Map, Number, Value};

use crate::catalog::{lookup, GapReport, Verdict, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::explorer::{
    ConjectureEvidence, OptimalPResult, PrecisionPolicy, SearchConfig, SearchResult, Spacing,
};
use crate::operator::{OperatorReport, DEFAULT_LOEWNER_TOL};
use crate::quadrature::DEFAULT_NODES;
use crate::scalar::fmt17;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Adjudication digits when escalation is enabled without a digit count.
pub const DEFAULT_DIGITS: u32 = 50;

/// Fixed CSV column order.
pub const CSV_HEADER: [&str; 13] = [
    "id",
    "a",
    "b",
    "v",
    "r",
    "p",
    "dim",
    "pair",
    "gap",
    "relative_gap",
    "precision",
    "verdict",
    "paper_anchor",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::InvalidConfig(format!("unknown format `{s}` (json or csv)"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        })
    }
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Violation = 1,
    Usage = 2,
    IndeterminateStrict = 3,
    ConjectureViolation = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Exit status of a checking command from its tallies.
    pub fn for_check(summary: &Summary, strict: bool) -> Self {
        if summary.violated > 0 {
            ExitStatus::Violation
        } else if strict && summary.indeterminate > 0 {
            ExitStatus::IndeterminateStrict
        } else {
            ExitStatus::Pass
        }
    }
}

/// Settings shared by all commands. Loaded from a flat `key = value` file,
/// then overridden by flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: u64,
    pub tol: f64,
    pub loewner_tol: f64,
    pub nodes: usize,
    /// `None` leaves the choice to the command.
    pub policy: Option<PrecisionPolicy>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub strict: bool,
    pub grid: usize,
    pub budget: usize,
    pub starts: usize,
    /// Half-width of the `ln a`, `ln b` search box.
    pub ln_range: f64,
    pub delta: f64,
    pub pairs: usize,
    pub dims: Vec<usize>,
    pub max_condition: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 1000,
            tol: DEFAULT_TOLERANCE,
            loewner_tol: DEFAULT_LOEWNER_TOL,
            nodes: DEFAULT_NODES,
            policy: None,
            format: OutputFormat::Json,
            out: None,
            threads: None,
            strict: false,
            grid: 16,
            budget: 400,
            starts: 4,
            ln_range: 13.8,
            delta: 1e-9,
            pairs: 100,
            dims: vec![2, 3, 5, 8],
            max_condition: 1e4,
        }
    }
}

/// Accepts plain integers and exact scientific forms like `1e6`.
pub fn parse_count(s: &str) -> Result<u64> {
    let s = s.trim();
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("`{s}` is not a count")))?;
    if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63) {
        Ok(x as u64)
    } else {
        Err(Error::Parse(format!("`{s}` is not a non-negative integer")))
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Parse(format!("{key}: `{s}` is not a finite number")))
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Parse(format!("{key}: `{s}` is not a boolean"))),
    }
}

/// Parses `2,3,5`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let dims = s
        .split(',')
        .map(|d| {
            d.trim()
                .parse::<usize>()
                .ok()
                .filter(|&d| d > 0)
                .ok_or_else(|| Error::Parse(format!("dims: `{d}` is not a positive integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    if dims.is_empty() {
        return Err(Error::Parse("dims: empty list".into()));
    }
    Ok(dims)
}

impl RunConfig {
    /// Sets one key. Keys use underscores; dashes are accepted.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "seed" => self.seed = parse_count(value)?,
            "samples" => self.samples = parse_count(value)?,
            "tol" => self.tol = parse_f64("tol", value)?,
            "loewner_tol" => self.loewner_tol = parse_f64("loewner_tol", value)?,
            "nodes" => self.nodes = parse_count(value)? as usize,
            "precision" => {
                self.policy = match value {
                    "double" => Some(PrecisionPolicy::DoubleOnly),
                    "escalate" => Some(PrecisionPolicy::Escalate {
                        digits: self.digits().unwrap_or(DEFAULT_DIGITS),
                    }),
                    "default" => None,
                    _ => {
                        return Err(Error::Parse(format!(
                            "precision: `{value}` (double, escalate or default)"
                        )))
                    }
                }
            }
            "digits" => {
                let digits = parse_count(value)? as u32;
                self.policy = Some(PrecisionPolicy::Escalate { digits });
            }
            "format" => self.format = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "threads" => self.threads = Some(parse_count(value)? as usize),
            "strict" => self.strict = parse_bool("strict", value)?,
            "grid" => self.grid = parse_count(value)? as usize,
            "budget" => self.budget = parse_count(value)? as usize,
            "starts" => self.starts = parse_count(value)? as usize,
            "ln_range" => self.ln_range = parse_f64("ln_range", value)?,
            "delta" => self.delta = parse_f64("delta", value)?,
            "pairs" => self.pairs = parse_count(value)? as usize,
            "dims" => self.dims = parse_dims(value)?,
            "max_condition" => self.max_condition = parse_f64("max_condition", value)?,
            other => return Err(Error::InvalidConfig(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file. `#` starts a comment; blank lines are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("config line {}: expected key = value", n + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::Parse(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    pub fn digits(&self) -> Option<u32> {
        match self.policy {
            Some(PrecisionPolicy::Escalate { digits }) => Some(digits),
            _ => None,
        }
    }

    /// Every setting as text, keyed by its config-file name.
    pub fn echo(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("seed", self.seed.to_string());
        m.insert("samples", self.samples.to_string());
        m.insert("tol", shortest(self.tol));
        m.insert("loewner_tol", shortest(self.loewner_tol));
        m.insert("nodes", self.nodes.to_string());
        let (precision, digits) = match self.policy {
            None => ("default", "none".to_string()),
            Some(PrecisionPolicy::DoubleOnly) => ("double", "none".to_string()),
            Some(PrecisionPolicy::Escalate { digits }) => ("escalate", digits.to_string()),
        };
        m.insert("precision", precision.to_string());
        m.insert("digits", digits);
        m.insert("format", self.format.to_string());
        m.insert(
            "out",
            self.out
                .as_ref()
                .map_or("stdout".to_string(), |p| p.display().to_string()),
        );
        m.insert(
            "threads",
            self.threads.map_or("auto".to_string(), |t| t.to_string()),
        );
        m.insert("strict", self.strict.to_string());
        m.insert("grid", self.grid.to_string());
        m.insert("budget", self.budget.to_string());
        m.insert("starts", self.starts.to_string());
        m.insert("ln_range", shortest(self.ln_range));
        m.insert("delta", shortest(self.delta));
        m.insert("pairs", self.pairs.to_string());
        m.insert(
            "dims",
            self.dims
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        m.insert("max_condition", shortest(self.max_condition));
        m
    }

    /// Explorer settings derived from this configuration; escalation is the default policy.
    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            ln_a: (-self.ln_range, self.ln_range),
            ln_b: (-self.ln_range, self.ln_range),
            delta: self.delta,
            v_range: None,
            v_spacing: Spacing::Linear,
            r_range: (-2.0, 2.0),
            p: None,
            resolution: self.grid,
            budget: self.budget,
            refine_starts: self.starts,
            seed: self.seed,
            policy: self
                .policy
                .unwrap_or(PrecisionPolicy::Escalate { digits: DEFAULT_DIGITS }),
            tol: self.tol,
        }
    }
}

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseRecord {
    pub id: String,
    /// Parameter name to decimal text.
    pub point: BTreeMap<&'static str, String>,
    /// Decimal text of the signed gap.
    pub gap: String,
    pub relative_gap: String,
    pub precision: String,
    pub verdict: Verdict,
    pub paper_anchor: String,
}

impl CaseRecord {
    pub fn from_gap(report: &GapReport) -> Self {
        let anchor = lookup(report.case).map_or("", |c| c.anchor);
        Self {
            id: report.case.to_string(),
            point: report
                .point
                .entries()
                .into_iter()
                .map(|(k, v)| (k, v.clone()))
                .collect(),
            gap: report.gap_text.clone(),
            relative_gap: fmt17(report.relative_gap),
            precision: report.precision.to_string(),
            verdict: report.verdict,
            paper_anchor: anchor.to_string(),
        }
    }

    /// One record per claimed inequality of an operator check.
    pub fn from_operator(report: &OperatorReport, pair: u64) -> Vec<Self> {
        report
            .checks
            .iter()
            .map(|check| {
                let mut point = BTreeMap::new();
                point.insert("dim", report.dim.to_string());
                point.insert("pair", pair.to_string());
                point.insert("v", fmt17(report.v));
                if let Some(r) = report.r {
                    point.insert("r", fmt17(r));
                }
                let v = &check.verdict;
                Self {
                    id: report.case.key().to_string(),
                    point,
                    gap: fmt17(v.min_eig),
                    relative_gap: fmt17(v.min_eig / v.scale.max(f64::MIN_POSITIVE)),
                    precision: "double".to_string(),
                    verdict: if v.holds { Verdict::Holds } else { Verdict::Violated },
                    paper_anchor: format!("{}: {}", report.case.statement(), check.claim),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Summary {
    pub checked: u64,
    pub held: u64,
    pub violated: u64,
    pub indeterminate: u64,
    /// Inputs dropped before evaluation, such as unmet order preconditions.
    pub skipped: u64,
}

impl Summary {
    pub fn tally(records: &[CaseRecord], skipped: u64) -> Self {
        let mut s = Summary {
            skipped,
            ..Summary::default()
        };
        for r in records {
            s.checked += 1;
            match r.verdict {
                Verdict::Holds => s.held += 1,
                Verdict::Violated => s.violated += 1,
                Verdict::Indeterminate => s.indeterminate += 1,
            }
        }
        s
    }
}

/// Everything one command emits.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportEnvelope {
    pub version: String,
    pub command: String,
    pub config: BTreeMap<&'static str, String>,
    pub cases: Vec<CaseRecord>,
    pub summary: Summary,
    pub exit: i32,
    /// Command-specific results beyond the per-case records.
    pub findings: BTreeMap<String, Value>,
}

impl ReportEnvelope {
    /// Builds an envelope with the summary tallied from `cases`; `exit` starts at 0.
    pub fn new(command: &str, config: &RunConfig, cases: Vec<CaseRecord>, skipped: u64) -> Self {
        let summary = Summary::tally(&cases, skipped);
        Self {
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            config: config.echo(),
            cases,
            summary,
            exit: 0,
            findings: BTreeMap::new(),
        }
    }

    pub fn to_json_value(&self) -> Value {
        let cases = self
            .cases
            .iter()
            .map(|c| {
                let mut m = Map::new();
                m.insert("id".into(), Value::String(c.id.clone()));
                m.insert(
                    "point".into(),
                    Value::Object(
                        c.point
                            .iter()
                            .map(|(k, v)| (k.to_string(), number(v)))
                            .collect(),
                    ),
                );
                m.insert("gap".into(), number(&c.gap));
                m.insert("relative_gap".into(), number(&c.relative_gap));
                m.insert("precision".into(), Value::String(c.precision.clone()));
                m.insert("verdict".into(), Value::String(c.verdict.as_str().into()));
                m.insert("paper_anchor".into(), Value::String(c.paper_anchor.clone()));
                Value::Object(m)
            })
            .collect();
        let mut summary = Map::new();
        for (k, v) in self.summary_entries() {
            summary.insert(k.into(), Value::Number(v.into()));
        }
        let mut root = Map::new();
        root.insert("version".into(), Value::String(self.version.clone()));
        root.insert("command".into(), Value::String(self.command.clone()));
        root.insert(
            "config".into(),
            Value::Object(
                self.config
                    .iter()
                    .map(|(k, v)| (k.to_string(), Value::String(v.clone())))
                    .collect(),
            ),
        );
        root.insert("cases".into(), Value::Array(cases));
        root.insert("summary".into(), Value::Object(summary));
        root.insert("exit".into(), Value::Number(self.exit.into()));
        if !self.findings.is_empty() {
            root.insert(
                "findings".into(),
                Value::Object(self.findings.clone().into_iter().collect()),
            );
        }
        Value::Object(root)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value())
            .expect("JSON values always serialize");
        s.push('\n');
        s
    }

    /// Config, summary and findings as `#` comment lines, then the fixed header and one row per record.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# version={}\n# command={}\n", self.version, self.command));
        for (k, v) in &self.config {
            out.push_str(&format!("# config.{k}={v}\n"));
        }
        for (k, v) in self.summary_entries() {
            out.push_str(&format!("# summary.{k}={v}\n"));
        }
        out.push_str(&format!("# exit={}\n", self.exit));
        for (k, v) in &self.findings {
            out.push_str(&format!("# findings.{k}={v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for c in &self.cases {
            let field = |k: &str| c.point.get(k).cloned().unwrap_or_default();
            w.write_record([
                c.id.clone(),
                field("a"),
                field("b"),
                field("v"),
                field("r"),
                field("p"),
                field("dim"),
                field("pair"),
                c.gap.clone(),
                c.relative_gap.clone(),
                c.precision.clone(),
                c.verdict.as_str().to_string(),
                c.paper_anchor.clone(),
            ])
            .expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        out.push_str(&String::from_utf8(bytes).expect("records are UTF-8"));
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }

    fn summary_entries(&self) -> [(&'static str, u64); 5] {
        let s = &self.summary;
        [
            ("checked", s.checked),
            ("held", s.held),
            ("violated", s.violated),
            ("indeterminate", s.indeterminate),
            ("skipped", s.skipped),
        ]
    }
}

/// Decimal text as a JSON number, kept digit for digit; non-numeric text becomes `null`.
pub fn number(text: &str) -> Value {
    text.parse::<Number>().map_or(Value::Null, Value::Number)
}

fn f(x: f64) -> Value {
    number(&fmt17(x))
}

fn status_findings(result: &SearchResult) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("case".into(), Value::String(result.case.into()));
    m.insert("status".into(), Value::String(result.status.as_str().into()));
    m.insert("evaluations".into(), Value::Number(result.evaluations.into()));
    m.insert("gap".into(), number(&result.report.gap_text));
    m.insert("precision".into(), Value::String(result.report.precision.to_string()));
    m.insert("double_gap".into(), number(&result.double.gap_text));
    m.insert("double_verdict".into(), Value::String(result.double.verdict.as_str().into()));
    m
}

/// Findings of a counterexample search.
pub fn search_findings(result: &SearchResult) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("search".to_string(), Value::Object(status_findings(result)));
    m
}

/// Findings of the optimal-p probe.
pub fn optimal_p_findings(result: &OptimalPResult) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    let mut bracket = Map::new();
    bracket.insert("lo".into(), f(result.bracket.0));
    bracket.insert("hi".into(), f(result.bracket.1));
    bracket.insert("width".into(), f(result.bracket.1 - result.bracket.0));
    bracket.insert(
        "label".into(),
        Value::String("empirical estimate of the supremum over the searched box".into()),
    );
    m.insert("bracket".into(), Value::Object(bracket));
    m.insert("lower".into(), Value::Object(status_findings(&result.lower)));
    m.insert("upper".into(), Value::Object(status_findings(&result.upper)));
    let steps = result
        .steps
        .iter()
        .map(|s| {
            let mut o = status_findings(&s.result);
            o.insert("p".into(), f(s.p));
            Value::Object(o)
        })
        .collect();
    m.insert("steps".into(), Value::Array(steps));
    let w = &result.paper_witness;
    let mut pw = Map::new();
    pw.insert(
        "point".into(),
        Value::Object(
            w.point
                .entries()
                .into_iter()
                .map(|(k, v)| (k.to_string(), number(v)))
                .collect(),
        ),
    );
    pw.insert("naive_double".into(), f(w.naive_double));
    pw.insert("safe_double".into(), f(w.safe_double));
    pw.insert("adjudicated".into(), number(&w.adjudicated.gap_text));
    pw.insert("adjudicated_verdict".into(), Value::String(w.adjudicated.verdict.as_str().into()));
    pw.insert("printed".into(), number(w.printed));
    pw.insert("disagreement".into(), Value::Bool(w.disagreement));
    m.insert("paper_witness".into(), Value::Object(pw));
    m.insert("evaluations".into(), Value::Number(result.evaluations.into()));
    m
}

/// Findings of the conjecture probe.
pub fn conjecture_findings(evidence: &ConjectureEvidence) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    let mut o = status_findings(&evidence.result);
    o.insert("samples".into(), Value::Number(evidence.samples.into()));
    o.insert("min_sampled_relative_gap".into(), f(evidence.min_sampled_gap));
    m.insert("conjecture".into(), Value::Object(o));
    m
}

/// Appends one JSON line describing a search witness. Points are kept as exact decimal text.
pub fn append_witness(path: &Path, result: &SearchResult) -> Result<()> {
    let mut line = Map::new();
    line.insert("case".into(), Value::String(result.case.into()));
    line.insert(
        "point".into(),
        Value::Object(
            result
                .point()
                .entries()
                .into_iter()
                .map(|(k, v)| (k.to_string(), Value::String(v.clone())))
                .collect(),
        ),
    );
    line.insert("gap".into(), Value::String(result.report.gap_text.clone()));
    line.insert("precision".into(), Value::String(result.report.precision.to_string()));
    line.insert("status".into(), Value::String(result.status.as_str().into()));
    let text = serde_json::to_string(&Value::Object(line)).expect("JSON values always serialize");
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    writeln!(file, "{text}").map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Shortest round-tripping form of a configured float.
fn shortest(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
