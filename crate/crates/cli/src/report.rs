//! Command results and their serialization.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use frontlab_core::export::{round_sig, Cell, Table};
use serde_json::{Map, Value};

use crate::args::Format;

/// A summary record plus an optional table of samples.
pub struct Report {
    pub summary: Value,
    pub table: Option<Table>,
}

impl Report {
    pub fn summary(summary: Value) -> Self {
        Report { summary, table: None }
    }

    pub fn with_table(summary: Value, table: Table) -> Self {
        Report { summary, table: Some(table) }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut v = rounded(&self.summary);
                if let Some(t) = &self.table {
                    let rows = table_json(t);
                    match &mut v {
                        Value::Object(m) => {
                            m.insert("rows".into(), rows);
                        }
                        other => {
                            let mut m = Map::new();
                            m.insert("result".into(), other.take());
                            m.insert("rows".into(), rows);
                            v = Value::Object(m);
                        }
                    }
                }
                let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
                s.push('\n');
                s
            }
            Format::Csv => match &self.table {
                Some(t) => t.to_csv(),
                None => summary_table(&self.summary).to_csv(),
            },
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let text = self.render(format);
        match out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                std::io::stdout().lock().write_all(text.as_bytes()).context("writing to stdout")?;
                Ok(())
            }
        }
    }
}

/// Rounds every float to the printed precision so repeated runs compare byte for byte.
pub fn rounded(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.iter().map(rounded).collect()),
        Value::Object(m) => Value::Object(m.iter().map(|(k, v)| (k.clone(), rounded(v))).collect()),
        other => other.clone(),
    }
}

fn table_json(t: &Table) -> Value {
    let rows = t
        .rows
        .iter()
        .map(|row| {
            let m: Map<String, Value> = t
                .columns
                .iter()
                .zip(row)
                .map(|(c, cell)| {
                    let v = match cell {
                        Cell::Int(i) => Value::from(*i),
                        Cell::Num(x) => serde_json::Number::from_f64(round_sig(*x)).map_or(Value::Null, Value::Number),
                        Cell::Text(s) => Value::from(s.clone()),
                    };
                    (c.clone(), v)
                })
                .collect();
            Value::Object(m)
        })
        .collect();
    Value::Array(rows)
}

/// One-row table of the scalar fields of a summary, nested keys joined by `.`.
fn summary_table(v: &Value) -> Table {
    let mut cols = Vec::new();
    let mut cells = Vec::new();
    flatten("", v, &mut cols, &mut cells);
    let mut t = Table::new(&cols);
    t.push(cells);
    t
}

fn flatten(prefix: &str, v: &Value, cols: &mut Vec<String>, cells: &mut Vec<Cell>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                flatten(&key(k), v, cols, cells);
            }
        }
        Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), v, cols, cells);
            }
        }
        Value::Number(n) => {
            cols.push(prefix.to_string());
            cells.push(match n.as_i64() {
                Some(i) if !n.is_f64() => Cell::Int(i),
                _ => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
            });
        }
        Value::Bool(b) => {
            cols.push(prefix.to_string());
            cells.push(Cell::Text(b.to_string()));
        }
        Value::String(s) => {
            cols.push(prefix.to_string());
            cells.push(Cell::Text(s.clone()));
        }
        Value::Null => {
            cols.push(prefix.to_string());
            cells.push(Cell::Text(String::new()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_summary_flattens_nested_fields() {
        let r = Report::summary(json!({"a": 1, "b": {"c": 0.5, "d": [true, "x"]}}));
        assert_eq!(r.render(Format::Csv), "a,b.c,b.d.0,b.d.1\n1,5.000000000000e-01,true,x\n");
    }

    #[test]
    fn json_rounds_floats() {
        let r = Report::summary(json!({"x": 0.1 + 0.2}));
        assert!(r.render(Format::Json).contains("0.3"));
    }
}
