//! Tabular results and their CSV / JSON serialization.

use std::io::{self, Write};

use cavity_decay::Tolerances;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match *self {
            Cell::Int(v) => Value::from(v),
            Cell::Real(v) => Number::from_f64(v).map_or(Value::Null, Value::Number),
            Cell::Missing => Value::Null,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(v) => Some(v as f64),
            Cell::Real(v) => Some(v),
            Cell::Missing => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Real)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, i: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    pub fn write_csv(&self, manifest: &Manifest, w: &mut impl Write) -> io::Result<()> {
        for (key, value) in manifest.lines() {
            writeln!(w, "# {key} = {value}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

fn tolerance_text(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Run record: program version, echoed parameters and effective tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub command: &'static str,
    pub parameters: Vec<(&'static str, String)>,
    pub tolerances: Tolerances,
}

impl Manifest {
    fn lines(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("program".to_string(), env!("CARGO_PKG_NAME").to_string()),
            ("version".to_string(), cavity_decay::VERSION.to_string()),
            ("command".to_string(), self.command.to_string()),
        ];
        out.extend(
            self.parameters
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone())),
        );
        out.extend(
            self.tolerances
                .entries()
                .into_iter()
                .map(|(k, v)| (format!("tol.{k}"), tolerance_text(v))),
        );
        out
    }

    pub fn to_json(&self) -> Value {
        let params: Map<String, Value> = self
            .parameters
            .iter()
            .map(|(k, v)| (k.to_string(), Value::from(v.clone())))
            .collect();
        let tol: Map<String, Value> = self
            .tolerances
            .entries()
            .into_iter()
            .map(|(k, v)| {
                (
                    k.to_string(),
                    Number::from_f64(v).map_or(Value::Null, Value::Number),
                )
            })
            .collect();
        let mut obj = Map::new();
        obj.insert("program".into(), env!("CARGO_PKG_NAME").into());
        obj.insert("version".into(), cavity_decay::VERSION.into());
        obj.insert("command".into(), self.command.into());
        obj.insert("parameters".into(), Value::Object(params));
        obj.insert("tolerances".into(), Value::Object(tol));
        Value::Object(obj)
    }
}
