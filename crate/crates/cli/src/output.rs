use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One flat output row with ordered keys.
#[derive(Debug, Clone, Default)]
pub struct Record(Map<String, Value>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_owned(), number(value));
        self
    }

    pub fn int(mut self, key: &str, value: u64) -> Self {
        self.0.insert(key.to_owned(), Value::from(value));
        self
    }

    pub fn text(mut self, key: &str, value: impl Into<String>) -> Self {
        self.0.insert(key.to_owned(), Value::String(value.into()));
        self
    }

    pub fn flag(mut self, key: &str, value: bool) -> Self {
        self.0.insert(key.to_owned(), Value::Bool(value));
        self
    }

    pub fn opt_num(self, key: &str, value: Option<f64>) -> Self {
        match value {
            Some(v) => self.num(key, v),
            None => self,
        }
    }
}

/// Round to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

fn number(v: f64) -> Value {
    match serde_json::Number::from_f64(round12(v)) {
        Some(n) => Value::Number(n),
        None => Value::String(v.to_string()),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Output layout for JSON: a lone object or always an array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Single,
    Array,
}

fn render<W: Write>(records: &[Record], format: Format, shape: Shape, mut out: W) -> io::Result<()> {
    match format {
        Format::Json => {
            let rows: Vec<&Map<String, Value>> = records.iter().map(|r| &r.0).collect();
            if shape == Shape::Single && rows.len() == 1 {
                serde_json::to_writer_pretty(&mut out, rows[0])?;
            } else {
                serde_json::to_writer_pretty(&mut out, &rows)?;
            }
            writeln!(out)
        }
        Format::Csv => {
            let mut header: Vec<String> = Vec::new();
            for r in records {
                for k in r.0.keys() {
                    if !header.contains(k) {
                        header.push(k.clone());
                    }
                }
            }
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&header)?;
            for r in records {
                w.write_record(header.iter().map(|k| r.0.get(k).map(cell).unwrap_or_default()))?;
            }
            w.flush()
        }
    }
}

/// Write records to `path`, or to stdout when no path is given.
pub fn emit(records: &[Record], format: Format, shape: Shape, path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => render(records, format, shape, io::BufWriter::new(File::create(p)?)),
        None => render(records, format, shape, io::stdout().lock()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(0.75), 0.75);
        assert_eq!(round12(2.0 / 3.0 * 1e-7), 6.66666666667e-8);
        assert_eq!(round12(0.0), 0.0);
    }

    #[test]
    fn csv_and_json_render_the_same_values() {
        let recs = vec![
            Record::new().num("g", 2.0).num("value", 1.0 / 7.0).text("meta", ""),
            Record::new().num("g", 3.0).num("value", 0.5).text("meta", "x=1"),
        ];
        let mut csv_out = Vec::new();
        render(&recs, Format::Csv, Shape::Array, &mut csv_out).unwrap();
        let mut json_out = Vec::new();
        render(&recs, Format::Json, Shape::Array, &mut json_out).unwrap();
        let json: Vec<Map<String, Value>> = serde_json::from_slice(&json_out).unwrap();
        let mut rdr = csv::Reader::from_reader(csv_out.as_slice());
        for (row, obj) in rdr.records().zip(&json) {
            let row = row.unwrap();
            let v: f64 = row[1].parse().unwrap();
            assert_eq!(v, obj["value"].as_f64().unwrap());
            assert_eq!(&row[2], obj["meta"].as_str().unwrap());
        }
    }
}
