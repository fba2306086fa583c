//! Recorded simulation output and its CSV / JSON-lines encodings.

use std::io::{Read, Write};

use thiserror::Error;

use super::Value;

/// Significant digits for reals in CSV output; 17 round-trips any `f64`.
pub const DEFAULT_PRECISION: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed trace: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    columns: Vec<String>,
    rows: Vec<(f64, Vec<Value>)>,
}

impl Trace {
    pub fn new(columns: Vec<String>) -> Self {
        Trace { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, time: f64, values: Vec<Value>) {
        assert_eq!(values.len(), self.columns.len(), "row width must match the column count");
        self.rows.push((time, values));
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[(f64, Vec<Value>)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|(t, _)| *t).collect()
    }

    /// Values of one recorded variable over time.
    pub fn column(&self, name: &str) -> Option<Vec<Value>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|(_, r)| r[i].clone()).collect())
    }

    /// A real-valued column as plain numbers.
    pub fn reals(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)?.iter().map(Value::as_real).collect()
    }

    /// Expanded CSV header: vectors become `path.i`, matrices `path.i.j`.
    fn flat_header(&self) -> Vec<String> {
        let mut header = vec!["time".to_string()];
        let first = self.rows.first().map(|(_, r)| r.as_slice());
        for (i, name) in self.columns.iter().enumerate() {
            match first.map(|r| &r[i]) {
                Some(Value::Vector(v)) => header.extend((0..v.len()).map(|k| format!("{name}.{k}"))),
                Some(Value::Matrix(m)) => {
                    for (r, row) in m.iter().enumerate() {
                        header.extend((0..row.len()).map(|c| format!("{name}.{r}.{c}")));
                    }
                }
                _ => header.push(name.clone()),
            }
        }
        header
    }

    pub fn write(&self, format: TraceFormat, precision: usize, out: impl Write) -> Result<(), TraceError> {
        match format {
            TraceFormat::Csv => self.write_csv(precision, out),
            TraceFormat::Jsonl => self.write_jsonl(out),
        }
    }

    pub fn write_csv(&self, precision: usize, out: impl Write) -> Result<(), TraceError> {
        let precision = precision.clamp(1, 17);
        let real = |v: f64| format!("{:.*e}", precision - 1, v);
        let header = self.flat_header();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&header)?;
        for (t, row) in &self.rows {
            let mut record = vec![real(*t)];
            for v in row {
                match v {
                    Value::Real(x) => record.push(real(*x)),
                    Value::Bool(b) => record.push(b.to_string()),
                    Value::Text(s) => record.push(s.clone()),
                    Value::Vector(_) | Value::Matrix(_) => record.extend(v.components().into_iter().map(real)),
                }
            }
            if record.len() != header.len() {
                return Err(TraceError::Malformed(format!("row at t={t} changes a column's shape")));
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> Result<(), TraceError> {
        for (t, row) in &self.rows {
            let mut obj = serde_json::Map::new();
            obj.insert("t".into(), serde_json::json!(t));
            for (name, v) in self.columns.iter().zip(row) {
                obj.insert(name.clone(), to_json(v));
            }
            serde_json::to_writer(&mut out, &serde_json::Value::Object(obj))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn to_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Real(x) => serde_json::json!(x),
        Value::Bool(b) => serde_json::json!(b),
        Value::Text(s) => serde_json::json!(s),
        Value::Vector(v) => serde_json::json!(v),
        Value::Matrix(m) => serde_json::json!(m),
    }
}

/// Splits `path.1.2` into (`path`, [1, 2]).
fn split_indices(name: &str) -> (&str, Vec<usize>) {
    let mut base = name;
    let mut idx = Vec::new();
    while let Some((head, tail)) = base.rsplit_once('.') {
        match tail.parse::<usize>() {
            Ok(i) if idx.len() < 2 => {
                idx.insert(0, i);
                base = head;
            }
            _ => break,
        }
    }
    (base, idx)
}

/// Reads a CSV trace back, regrouping `path.i` columns into vectors and
/// `path.i.j` columns into matrices. Cells that parse as numbers become
/// reals, `true`/`false` become bools, anything else text.
pub fn read_csv(input: impl Read) -> Result<Trace, TraceError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("time") {
        return Err(TraceError::Malformed("first column must be `time`".into()));
    }

    // (name, rank, flat column range)
    let mut groups: Vec<(String, usize, std::ops::Range<usize>, usize)> = Vec::new();
    let mut i = 1;
    while i < header.len() {
        let (base, idx) = split_indices(&header[i]);
        if idx.is_empty() || idx.iter().any(|&k| k != 0) {
            groups.push((header[i].clone(), 0, i..i + 1, 0));
            i += 1;
            continue;
        }
        let rank = idx.len();
        let start = i;
        let mut width = 0;
        while i < header.len() {
            let (b, ix) = split_indices(&header[i]);
            if b != base || ix.len() != rank {
                break;
            }
            if rank == 2 && ix[0] == 0 {
                width = width.max(ix[1] + 1);
            }
            i += 1;
        }
        groups.push((base.to_string(), rank, start..i, width));
    }

    let cell = |s: &str| -> Value {
        match s {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => s.parse::<f64>().map(Value::Real).unwrap_or_else(|_| Value::Text(s.to_string())),
        }
    };
    let mut trace = Trace::new(groups.iter().map(|g| g.0.clone()).collect());
    for rec in r.records() {
        let rec = rec?;
        let t: f64 = rec
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| TraceError::Malformed("unreadable time cell".into()))?;
        let mut row = Vec::with_capacity(groups.len());
        for (name, rank, range, width) in &groups {
            let nums = || -> Result<Vec<f64>, TraceError> {
                range
                    .clone()
                    .map(|k| {
                        rec.get(k)
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| TraceError::Malformed(format!("non-numeric cell in `{name}`")))
                    })
                    .collect()
            };
            row.push(match rank {
                0 => cell(rec.get(range.start).unwrap_or("")),
                1 => Value::Vector(nums()?),
                _ => Value::Matrix(nums()?.chunks(*width).map(<[f64]>::to_vec).collect()),
            });
        }
        trace.push(t, row);
    }
    Ok(trace)
}
