//! Deterministic CSV and JSON writers.
//!
//! Floats are written as `{:.16e}` (17 significant digits) in both formats.
//! JSON objects come out with sorted keys; non-finite floats are errors.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
}

impl Cell {
    fn check(&self) -> Result<(), CliError> {
        match self {
            Cell::Float(x) if !x.is_finite() => Err(CliError::Failed(format!("non-finite value {x} in output"))),
            _ => Ok(()),
        }
    }

    fn to_value(self) -> Value {
        match self {
            Cell::Float(x) => Value::from(x),
            Cell::Int(n) => Value::from(n),
            Cell::Bool(b) => Value::from(b),
        }
    }
}

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A header plus rows of equal width.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                c.check()?;
                if i > 0 {
                    s.push(',');
                }
                match c {
                    Cell::Float(x) => s.push_str(&float(*x)),
                    Cell::Int(n) => write!(s, "{n}").unwrap(),
                    Cell::Bool(b) => write!(s, "{b}").unwrap(),
                }
            }
            s.push('\n');
        }
        Ok(s)
    }

    /// `{"columns": [...], "rows": [[...], ...]}`.
    pub fn to_json(&self) -> Result<String, CliError> {
        for c in self.rows.iter().flatten() {
            c.check()?;
        }
        let rows: Vec<Value> =
            self.rows.iter().map(|r| Value::Array(r.iter().map(|c| c.to_value()).collect())).collect();
        let v = serde_json::json!({ "columns": self.columns, "rows": rows });
        to_json(&v)
    }
}

/// Serializes through `serde_json::Value`. Optional fields must be skipped
/// rather than written as `null`: a `null` in the tree is taken to be a
/// non-finite float and rejected.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Failed(format!("serialization failed: {e}")))?;
    let mut s = String::new();
    write_value(&mut s, &v, 0)?;
    s.push('\n');
    Ok(s)
}

fn write_value(s: &mut String, v: &Value, depth: usize) -> Result<(), CliError> {
    let pad = |s: &mut String, d: usize| {
        s.push('\n');
        s.push_str(&"  ".repeat(d));
    };
    match v {
        Value::Null => return Err(CliError::Failed("non-finite value in JSON output".into())),
        Value::Bool(b) => write!(s, "{b}").unwrap(),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) if !n.is_f64() => write!(s, "{u}").unwrap(),
            (_, Some(i), _) if !n.is_f64() => write!(s, "{i}").unwrap(),
            (_, _, Some(x)) => s.push_str(&float(x)),
            _ => unreachable!("serde_json numbers are u64, i64 or f64"),
        },
        Value::String(t) => s.push_str(&serde_json::to_string(t).expect("strings serialize")),
        Value::Array(items) => {
            if items.is_empty() {
                s.push_str("[]");
            } else if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                s.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        s.push_str(", ");
                    }
                    write_value(s, x, depth + 1)?;
                }
                s.push(']');
            } else {
                s.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        s.push(',');
                    }
                    pad(s, depth + 1);
                    write_value(s, x, depth + 1)?;
                }
                pad(s, depth);
                s.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                s.push_str("{}");
                return Ok(());
            }
            // serde_json's default map is ordered by key
            s.push('{');
            for (i, (k, x)) in map.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                pad(s, depth + 1);
                s.push_str(&serde_json::to_string(k).expect("keys serialize"));
                s.push_str(": ");
                write_value(s, x, depth + 1)?;
            }
            pad(s, depth);
            s.push('}');
        }
    }
    Ok(())
}
