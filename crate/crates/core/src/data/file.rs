use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::StreamSource;
use crate::error::{Error, Result};
use crate::sample::Sample;

/// A column addressed by 0-based position or by header name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl ColumnRef {
    fn resolve(
        &self,
        header: Option<&csv::StringRecord>,
        width: usize,
        path: &Path,
    ) -> Result<usize> {
        let idx = match self {
            ColumnRef::Index(i) => Some(*i).filter(|&i| i < width),
            ColumnRef::Name(name) => header.and_then(|h| h.iter().position(|c| c.trim() == name)),
        };
        idx.ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            row: 1,
            message: format!("no column {self:?}"),
        })
    }
}

fn default_delimiter() -> char {
    ','
}

fn default_true() -> bool {
    true
}

/// Layout of a delimiter-separated input file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSchema {
    pub path: PathBuf,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default = "default_true")]
    pub has_header: bool,
    /// Defaults to the last column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<ColumnRef>,
    /// Defaults to every column except the label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_columns: Option<Vec<ColumnRef>>,
    /// Feature columns holding categories, coded 0, 1, 2, ... in first-seen
    /// order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nominal_columns: Vec<ColumnRef>,
    /// Keep only the first `limit` rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
}

impl FileSchema {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            delimiter: default_delimiter(),
            has_header: true,
            label_column: None,
            feature_columns: None,
            nominal_columns: Vec::new(),
            limit: None,
        }
    }
}

struct Columns {
    label: usize,
    features: Vec<usize>,
    nominal: Vec<bool>,
    names: Vec<String>,
}

struct FileRows {
    path: PathBuf,
    records: csv::StringRecordsIntoIter<File>,
    columns: Columns,
    labels: HashMap<String, usize>,
    nominal_codes: Vec<HashMap<String, f64>>,
    remaining: Option<usize>,
    width: usize,
    failed: bool,
}

impl FileRows {
    fn parse(&mut self, record: &csv::StringRecord) -> Result<Sample> {
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != self.width {
            return Err(Error::Parse {
                path: self.path.clone(),
                row,
                message: format!("expected {} fields, found {}", self.width, record.len()),
            });
        }
        let mut features = Vec::with_capacity(self.columns.features.len());
        for (k, &col) in self.columns.features.iter().enumerate() {
            let cell = record[col].trim();
            let value = if self.columns.nominal[k] {
                let codes = &mut self.nominal_codes[k];
                let next = codes.len() as f64;
                *codes.entry(cell.to_owned()).or_insert(next)
            } else {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::NonNumeric {
                        path: self.path.clone(),
                        row,
                        column: self.columns.names[col].clone(),
                        value: cell.to_owned(),
                    })?
            };
            features.push(value);
        }
        let next = self.labels.len();
        let label = *self
            .labels
            .entry(record[self.columns.label].trim().to_owned())
            .or_insert(next);
        Ok(Sample::new(features, label))
    }
}

impl Iterator for FileRows {
    type Item = Result<Sample>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.remaining == Some(0) {
            return None;
        }
        let record = match self.records.next()? {
            Ok(r) => r,
            Err(e) => {
                self.failed = true;
                let row = e.position().map_or(0, |p| p.line() as usize);
                return Some(Err(Error::Parse {
                    path: self.path.clone(),
                    row,
                    message: e.to_string(),
                }));
            }
        };
        if let Some(n) = &mut self.remaining {
            *n -= 1;
        }
        let out = self.parse(&record);
        self.failed = out.is_err();
        Some(out)
    }
}

/// Opens a delimiter-separated file as a lazily parsed stream.
///
/// Labels map to dense class ids in first-seen order. Parsing stops at the
/// first malformed row, which is reported with its line number.
pub fn load_stream(schema: &FileSchema) -> Result<StreamSource> {
    if !schema.delimiter.is_ascii() {
        return Err(Error::Config(
            "delimiter must be a single ASCII character".into(),
        ));
    }
    let file = File::open(&schema.path).map_err(|e| Error::Parse {
        path: schema.path.clone(),
        row: 0,
        message: e.to_string(),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .has_headers(schema.has_header)
        .flexible(true)
        .from_reader(file);

    let header = if schema.has_header {
        Some(reader.headers()?.clone())
    } else {
        None
    };
    let width = match &header {
        Some(h) => h.len(),
        None => {
            // Peek the first row to learn the width, then reopen.
            let mut peek = csv::ReaderBuilder::new()
                .delimiter(schema.delimiter as u8)
                .has_headers(false)
                .flexible(true)
                .from_path(&schema.path)?;
            let mut first = csv::StringRecord::new();
            peek.read_record(&mut first)?;
            first.len()
        }
    };
    let names: Vec<String> = match &header {
        Some(h) => h.iter().map(|c| c.trim().to_owned()).collect(),
        None => (0..width).map(|i| i.to_string()).collect(),
    };
    let path = schema.path.as_path();

    let label = match &schema.label_column {
        Some(c) => c.resolve(header.as_ref(), width, path)?,
        None => width.checked_sub(1).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            row: 1,
            message: "file has no columns".into(),
        })?,
    };
    let features: Vec<usize> = match &schema.feature_columns {
        Some(cols) => cols
            .iter()
            .map(|c| c.resolve(header.as_ref(), width, path))
            .collect::<Result<_>>()?,
        None => (0..width).filter(|&i| i != label).collect(),
    };
    let nominal_idx: Vec<usize> = schema
        .nominal_columns
        .iter()
        .map(|c| c.resolve(header.as_ref(), width, path))
        .collect::<Result<_>>()?;
    let nominal: Vec<bool> = features.iter().map(|f| nominal_idx.contains(f)).collect();
    let n_features = features.len();

    let rows = FileRows {
        path: schema.path.clone(),
        records: reader.into_records(),
        nominal_codes: vec![HashMap::new(); n_features],
        columns: Columns {
            label,
            features,
            nominal,
            names,
        },
        labels: HashMap::new(),
        remaining: schema.limit,
        width,
        failed: false,
    };
    Ok(StreamSource::new(Box::new(rows), None, n_features, None))
}
