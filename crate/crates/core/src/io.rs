//! CSV ingestion with column transforms, preparation of the Adult and
//! Lending Club files, and writers for curves, datasets and JSON sidecars.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::privacy::{Dataset, SupportBox};
use crate::regression::LabeledDataset;

const MISSING: [&str; 3] = ["", "?", "NA"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "shift")]
pub enum Transform {
    Identity,
    /// `x ↦ ln(x - c)`.
    LogShift(f64),
}

impl Transform {
    fn apply(self, x: f64) -> Option<f64> {
        match self {
            Transform::Identity => Some(x),
            Transform::LogShift(c) if x > c => Some((x - c).ln()),
            Transform::LogShift(_) => None,
        }
    }
}

/// An input column: source name, transform and support bounds after the
/// transform. Missing bounds are taken from the observed range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub column: String,
    pub transform: Transform,
    pub bounds: Option<(f64, f64)>,
}

impl ColumnSpec {
    pub fn identity(column: impl Into<String>) -> Self {
        ColumnSpec { column: column.into(), transform: Transform::Identity, bounds: None }
    }

    pub fn with_transform(mut self, transform: Transform) -> Self {
        self.transform = transform;
        self
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Self {
        self.bounds = Some((lo, hi));
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResponseKind {
    Numeric,
    /// 1 when the trimmed cell (trailing `.` removed) is one of the labels.
    Indicator(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSpec {
    pub column: String,
    pub kind: ResponseKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowFilter {
    /// Keep rows whose cell contains the substring.
    Contains { column: String, needle: String },
    /// Keep rows whose numeric cell is strictly above the threshold.
    Above { column: String, threshold: f64 },
}

impl RowFilter {
    fn column(&self) -> &str {
        match self {
            RowFilter::Contains { column, .. } | RowFilter::Above { column, .. } => column,
        }
    }

    fn keep(&self, cell: &str) -> bool {
        match self {
            RowFilter::Contains { needle, .. } => cell.contains(needle.as_str()),
            RowFilter::Above { threshold, .. } => parse_number(cell).is_some_and(|v| v > *threshold),
        }
    }
}

/// What to read. Headerless files name their columns `"0"`, `"1"`, ...
#[derive(Debug, Clone, PartialEq)]
pub struct IngestSpec {
    pub has_headers: bool,
    pub inputs: Vec<ColumnSpec>,
    pub response: Option<ResponseSpec>,
    pub filters: Vec<RowFilter>,
}

impl IngestSpec {
    pub fn new(inputs: Vec<ColumnSpec>) -> Self {
        IngestSpec { has_headers: true, inputs, response: None, filters: Vec::new() }
    }

    pub fn with_response(mut self, response: ResponseSpec) -> Self {
        self.response = Some(response);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub inputs: Dataset,
    pub responses: Option<Vec<f64>>,
    pub support: SupportBox,
    /// Data rows in the file.
    pub rows_read: usize,
    /// Rows removed by the row filters.
    pub filtered: usize,
    /// Rows removed for a missing selected value.
    pub dropped: usize,
}

impl Ingested {
    pub fn labeled(&self) -> Result<LabeledDataset> {
        let responses = self.responses.clone().ok_or_else(|| Error::param("no response column was selected"))?;
        LabeledDataset::new(self.inputs.clone(), responses)
    }
}

fn parse_number(cell: &str) -> Option<f64> {
    let cell = cell.trim();
    let cell = cell.strip_suffix('%').unwrap_or(cell).trim();
    cell.parse().ok()
}

fn is_missing(cell: &str) -> bool {
    MISSING.contains(&cell.trim())
}

pub fn ingest_csv(path: impl AsRef<Path>, spec: &IngestSpec) -> Result<Ingested> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))?;
    ingest_reader(file, spec)
}

pub fn ingest_reader(reader: impl Read, spec: &IngestSpec) -> Result<Ingested> {
    if spec.inputs.is_empty() {
        return Err(Error::param("at least one input column is required"));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(spec.has_headers)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers: Option<Vec<String>> =
        if spec.has_headers { Some(rdr.headers()?.iter().map(str::to_string).collect()) } else { None };
    let locate = |name: &str| -> Result<usize> {
        match &headers {
            Some(h) => h
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::data(format!("column `{name}` not found in header"))),
            None => name
                .parse()
                .map_err(|_| Error::param(format!("headerless file: column `{name}` must be an index"))),
        }
    };
    let input_idx: Vec<usize> = spec.inputs.iter().map(|c| locate(&c.column)).collect::<Result<_>>()?;
    let response_idx = spec.response.as_ref().map(|r| locate(&r.column)).transpose()?;
    let filter_idx: Vec<usize> = spec.filters.iter().map(|f| locate(f.column())).collect::<Result<_>>()?;

    let q = spec.inputs.len();
    let mut records = Vec::new();
    let mut responses = Vec::new();
    let (mut rows_read, mut filtered, mut dropped) = (0, 0, 0);
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        rows_read += 1;
        let row_no = line + 1;
        let cell = |k: usize| -> Result<&str> {
            rec.get(k).ok_or_else(|| Error::data(format!("row {row_no}: too few fields ({})", rec.len())))
        };
        let mut keep = true;
        for (f, &k) in spec.filters.iter().zip(&filter_idx) {
            if !f.keep(cell(k)?) {
                keep = false;
                break;
            }
        }
        if !keep {
            filtered += 1;
            continue;
        }
        let selected = input_idx.iter().chain(response_idx.iter());
        let mut missing = false;
        for &k in selected {
            if is_missing(cell(k)?) {
                missing = true;
            }
        }
        if missing {
            dropped += 1;
            continue;
        }
        for (c, &k) in spec.inputs.iter().zip(&input_idx) {
            let raw = cell(k)?;
            let v = parse_number(raw)
                .ok_or_else(|| Error::data(format!("row {row_no}: column `{}` is not numeric: `{raw}`", c.column)))?;
            let t = c.transform.apply(v).ok_or_else(|| {
                Error::data(format!("row {row_no}: column `{}` value {v} is outside the domain of {:?}", c.column, c.transform))
            })?;
            records.push(t);
        }
        if let (Some(r), Some(k)) = (&spec.response, response_idx) {
            let raw = cell(k)?;
            let y = match &r.kind {
                ResponseKind::Numeric => parse_number(raw).ok_or_else(|| {
                    Error::data(format!("row {row_no}: response `{}` is not numeric: `{raw}`", r.column))
                })?,
                ResponseKind::Indicator(labels) => {
                    let label = raw.trim_end_matches('.');
                    if labels.iter().any(|l| l == label) {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
            responses.push(y);
        }
    }
    let n = records.len() / q;
    if n == 0 {
        return Err(Error::data("no usable rows after filtering and dropping missing values"));
    }
    if dropped > 0 {
        log::info!("dropped {dropped} of {rows_read} rows with missing values");
    }
    let names = spec.inputs.iter().map(|c| c.column.clone()).collect();
    let inputs = Dataset::new(records, q)?.with_column_names(names)?;
    let mut lower = Vec::with_capacity(q);
    let mut upper = Vec::with_capacity(q);
    for (j, c) in spec.inputs.iter().enumerate() {
        let (lo, hi) = match c.bounds {
            Some(b) => b,
            None => {
                let col = inputs.column(j);
                (col.iter().copied().fold(f64::INFINITY, f64::min), col.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            }
        };
        lower.push(lo);
        upper.push(hi);
    }
    let support = SupportBox::new(lower, upper)?;
    let responses = spec.response.as_ref().map(|_| responses);
    Ok(Ingested { inputs, responses, support, rows_read, filtered, dropped })
}

/// UCI Adult: education years as input, `>50K` indicator as response,
/// support `[1, 16]`. Accepts the raw headerless `adult.data` layout or a
/// CSV with a header row.
pub fn prepare_adult(path: impl AsRef<Path>) -> Result<Ingested> {
    let path = path.as_ref();
    let mut head = String::new();
    File::open(path)
        .map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))?
        .take(4096)
        .read_to_string(&mut head)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
    let first = head.lines().next().unwrap_or("");
    let spec = if first.to_ascii_lowercase().contains("education") {
        let cols: Vec<String> = first.split(',').map(|c| c.trim().trim_matches('"').to_string()).collect();
        let find = |cands: &[&str]| -> Result<String> {
            cands
                .iter()
                .find_map(|c| cols.iter().find(|h| h.eq_ignore_ascii_case(c)).cloned())
                .ok_or_else(|| Error::data(format!("Adult file lacks a column named one of {cands:?}")))
        };
        IngestSpec {
            has_headers: true,
            inputs: vec![ColumnSpec::identity(find(&["education-num", "education_num", "educational-num"])?)],
            response: Some(ResponseSpec { column: find(&["income", "class", "salary"])?, kind: adult_label() }),
            filters: Vec::new(),
        }
    } else {
        IngestSpec {
            has_headers: false,
            inputs: vec![ColumnSpec::identity("4")],
            response: Some(ResponseSpec { column: "14".into(), kind: adult_label() }),
            filters: Vec::new(),
        }
    };
    let spec = IngestSpec { inputs: vec![spec.inputs[0].clone().with_bounds(1.0, 16.0)], ..spec };
    let mut out = ingest_csv(path, &spec)?;
    out.inputs = out.inputs.with_column_names(vec!["education_num".into()])?;
    Ok(out)
}

fn adult_label() -> ResponseKind {
    ResponseKind::Indicator(vec![">50K".into()])
}

pub const FICO_SHIFT: f64 = 600.0;
pub const FICO_MAX: f64 = 850.0;

/// Lending Club accepted loans issued in 2010: `ln(fico_range_low - 600)`
/// as input, interest rate in percent as response. The upper bound is
/// `ln 250`; the lower bound is the smallest eligible transformed score.
pub fn prepare_lending_club(path: impl AsRef<Path>) -> Result<Ingested> {
    let spec = IngestSpec {
        has_headers: true,
        inputs: vec![ColumnSpec::identity("fico_range_low").with_transform(Transform::LogShift(FICO_SHIFT))],
        response: Some(ResponseSpec { column: "int_rate".into(), kind: ResponseKind::Numeric }),
        filters: vec![
            RowFilter::Contains { column: "issue_d".into(), needle: "2010".into() },
            RowFilter::Above { column: "fico_range_low".into(), threshold: FICO_SHIFT },
        ],
    };
    let mut out = ingest_csv(path, &spec)?;
    let lo = out.inputs.records().iter().copied().fold(f64::INFINITY, f64::min);
    out.support = SupportBox::interval(lo, (FICO_MAX - FICO_SHIFT).ln())?;
    out.inputs = out.inputs.with_column_names(vec!["log_fico_minus_600".into()])?;
    Ok(out)
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes columns of equal length under `header`.
pub fn write_columns(path: impl AsRef<Path>, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    if header.len() != columns.len() {
        return Err(Error::param("header and column counts differ"));
    }
    let n = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::param("columns have different lengths"));
    }
    let mut w = csv::Writer::from_writer(create(path.as_ref())?);
    w.write_record(header)?;
    for i in 0..n {
        w.write_record(columns.iter().map(|c| fmt_f64(c[i])))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the inputs (and optional responses) of a dataset.
pub fn write_dataset(path: impl AsRef<Path>, data: &Dataset, responses: Option<(&str, &[f64])>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path.as_ref())?);
    let mut header: Vec<&str> = data.column_names().iter().map(String::as_str).collect();
    if let Some((name, ys)) = responses {
        if ys.len() != data.n() {
            return Err(Error::param("response length differs from the number of records"));
        }
        header.push(name);
    }
    w.write_record(&header)?;
    for (i, row) in data.rows().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        if let Some((_, ys)) = responses {
            fields.push(fmt_f64(ys[i]));
        }
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut w = create(path.as_ref())?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
