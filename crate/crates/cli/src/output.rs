use std::io::Write;

use clap::ValueEnum;
use parrondo::scalar::Scalar;
use parrondo::Error;
use serde_json::{Map, Value};

/// Top-level `schema` field of every JSON document.
pub const SCHEMA: &str = "parrondo-cli/1";

pub type Doc = Map<String, Value>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Exact,
    Float,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(String),
    Compute(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 3,
            Failure::Compute(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) | Failure::Compute(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_)
            | Error::NoParrondoWindow { .. }
            | Error::Reducible
            | Error::Periodic { .. }
            | Error::InvalidConfig(_)
            | Error::ZeroVariance(_) => Failure::Domain(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

/// A finished command: top-level fields plus optional rows.
pub struct Output {
    pub command: &'static str,
    pub body: Doc,
    pub records: Option<Vec<Doc>>,
    /// `false` when a requested match check failed.
    pub ok: bool,
}

impl Output {
    pub fn single(command: &'static str, body: Value, ok: bool) -> Self {
        Output { command, body: into_doc(body), records: None, ok }
    }

    pub fn table(command: &'static str, body: Value, records: Vec<Doc>, ok: bool) -> Self {
        Output { command, body: into_doc(body), records: Some(records), ok }
    }
}

pub fn into_doc(v: Value) -> Doc {
    match v {
        Value::Object(m) => m,
        Value::Null => Doc::new(),
        other => {
            let mut m = Doc::new();
            m.insert("value".into(), other);
            m
        }
    }
}

/// Exact values as `p/q` text, floats as JSON numbers.
pub fn scalar<S: Scalar>(x: &S) -> Value {
    if S::EXACT {
        Value::String(x.to_text())
    } else {
        float(x.to_f64())
    }
}

pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            items.iter().map(cell).collect::<Vec<_>>().join(";")
        }
        other => other.to_string(),
    }
}

pub fn emit(out: &Output, format: Format, w: &mut impl Write) -> Result<(), Failure> {
    match format {
        Format::Json => {
            let mut doc = Doc::new();
            doc.insert("schema".into(), SCHEMA.into());
            doc.insert("command".into(), out.command.into());
            doc.extend(out.body.clone());
            if let Some(records) = &out.records {
                doc.insert("records".into(), Value::Array(records.iter().cloned().map(Value::Object).collect()));
            }
            serde_json::to_writer_pretty(&mut *w, &Value::Object(doc)).map_err(|e| Failure::Compute(e.to_string()))?;
            writeln!(w)?;
        }
        Format::Csv => {
            let rows: Vec<&Doc> = match &out.records {
                Some(r) => r.iter().collect(),
                None => vec![&out.body],
            };
            let mut header: Vec<&String> = Vec::new();
            for row in &rows {
                for k in row.keys() {
                    if !header.contains(&k) {
                        header.push(k);
                    }
                }
            }
            let mut csv = csv::Writer::from_writer(&mut *w);
            csv.write_record(&header)?;
            for row in rows {
                csv.write_record(header.iter().map(|k| row.get(*k).map(cell).unwrap_or_default()))?;
            }
            csv.flush()?;
        }
        Format::Plain => {
            for (k, v) in &out.body {
                writeln!(w, "{k}: {}", cell(v))?;
            }
            for row in out.records.iter().flatten() {
                let line: Vec<String> = row.iter().map(|(k, v)| format!("{k}={}", cell(v))).collect();
                writeln!(w, "{}", line.join("  "))?;
            }
        }
    }
    Ok(())
}
