//! Rendering of command results as CSV or JSON bytes.

use std::io::{self, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::cache::write_atomic;
use crate::config::Format;
use crate::error::{CliError, Result};

/// Rows of decimal strings under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.header.iter().zip(row).map(|(h, v)| (h.to_string(), Value::String(v.clone()))).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table(Table),
    Json(Value),
}

impl Output {
    fn default_format(&self) -> Format {
        match self {
            Output::Table(_) => Format::Csv,
            Output::Json(_) => Format::Json,
        }
    }

    pub fn render(&self, format: Option<Format>) -> Result<Vec<u8>> {
        let mut bytes = match (self, format.unwrap_or(self.default_format())) {
            (Output::Table(t), Format::Csv) => return Ok(t.to_csv()),
            (Output::Table(t), Format::Json) => serde_json::to_vec_pretty(&t.to_json()),
            (Output::Json(v), Format::Json) => serde_json::to_vec_pretty(v),
            (Output::Json(_), Format::Csv) => {
                return Err(CliError::Config("this command has JSON output only".into()));
            }
        }
        .expect("JSON values serialize");
        bytes.push(b'\n');
        Ok(bytes)
    }

    /// To `path` atomically, or to stdout.
    pub fn emit(&self, format: Option<Format>, path: Option<&Path>) -> Result<()> {
        let bytes = self.render(format)?;
        match path {
            Some(p) => write_atomic(p, &bytes),
            None => io::stdout().write_all(&bytes).map_err(|e| CliError::io("<stdout>", e)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_formats() {
        let mut t = Table::new(vec!["n", "x"]);
        t.push(vec!["1".into(), "0.5".into()]);
        let out = Output::Table(t);
        assert_eq!(out.render(None).unwrap(), b"n,x\n1,0.5\n");
        let json: Value = serde_json::from_slice(&out.render(Some(Format::Json)).unwrap()).unwrap();
        assert_eq!(json[0]["x"], "0.5");
        assert!(Output::Json(Value::Null).render(Some(Format::Csv)).is_err());
    }
}
