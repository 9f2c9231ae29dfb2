//! Key-value and tabular command output in CSV or JSON.

use std::io::Write;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Num(v) if v.is_finite() => format!("{v:?}"),
            Field::Num(_) => "NaN".into(),
            Field::Int(v) => v.to_string(),
            Field::Bool(v) => v.to_string(),
            Field::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Num(v) if v.is_finite() => Value::from(*v),
            Field::Num(_) => Value::Null,
            Field::Int(v) => Value::from(*v),
            Field::Bool(v) => Value::from(*v),
            Field::Text(s) => Value::from(s.as_str()),
        }
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Num(v)
    }
}

impl From<i64> for Field {
    fn from(v: i64) -> Self {
        Field::Int(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Field::Int(v as i64)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    /// CSV `key,value` rows or a JSON object.
    Fields(Vec<(String, Field)>),
    /// CSV with a header or a JSON array of objects.
    Table {
        columns: Vec<String>,
        rows: Vec<Vec<Field>>,
    },
    /// Already rendered bytes.
    Raw(Vec<u8>),
}

#[derive(Default)]
pub struct FieldsBuilder(Vec<(String, Field)>);

impl FieldsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl Into<Field>) -> &mut Self {
        self.0.push((key.into(), value.into()));
        self
    }

    pub fn build(self) -> Report {
        Report::Fields(self.0)
    }
}

impl Report {
    pub fn table(columns: &[&str], rows: Vec<Vec<Field>>) -> Report {
        Report::Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        }
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        match (self, format) {
            (Report::Raw(bytes), _) => out.write_all(bytes)?,
            (Report::Fields(fields), Format::Csv) => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["key", "value"]).map_err(io)?;
                for (k, v) in fields {
                    w.write_record([k.as_str(), v.csv().as_str()]).map_err(io)?;
                }
                w.flush()?;
            }
            (Report::Fields(fields), Format::Json) => {
                let obj: Map<String, Value> = fields.iter().map(|(k, v)| (k.clone(), v.json())).collect();
                write_json(&Value::Object(obj), out)?;
            }
            (Report::Table { columns, rows }, Format::Csv) => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(columns).map_err(io)?;
                for row in rows {
                    w.write_record(row.iter().map(Field::csv)).map_err(io)?;
                }
                w.flush()?;
            }
            (Report::Table { columns, rows }, Format::Json) => {
                let arr = rows
                    .iter()
                    .map(|row| {
                        Value::Object(columns.iter().cloned().zip(row.iter().map(Field::json)).collect())
                    })
                    .collect();
                write_json(&Value::Array(arr), out)?;
            }
        }
        Ok(())
    }
}

pub fn write_json<W: Write>(v: &Value, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, v).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}
