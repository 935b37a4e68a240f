//! Tabular output with a metadata preamble, rendered as CSV or JSON.

use coupler::DeviceConfig;
use serde_json::{json, Map, Value};

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Bool(bool),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

/// Scientific notation with 12 significant digits.
pub fn sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => sci(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Missing => Value::Null,
        }
    }
}

pub struct Report {
    command: &'static str,
    config: DeviceConfig,
    parameters: Vec<(&'static str, Cell)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(command: &'static str, config: DeviceConfig, columns: &[&'static str]) -> Self {
        Self { command, config, parameters: Vec::new(), columns: columns.to_vec(), rows: Vec::new() }
    }

    /// Adds a command-specific setting to the preamble.
    pub fn param(&mut self, key: &'static str, value: impl Into<Cell>) -> &mut Self {
        self.parameters.push((key, value.into()));
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json()).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }

    fn config_entries(&self) -> [(&'static str, f64); 6] {
        let c = &self.config;
        [
            ("v_m_per_s", c.v_m_per_s),
            ("impedance_ohm", c.impedance_ohm),
            ("l2_mm", c.l2_mm),
            ("l3_mm", c.l3_mm),
            ("cs_ff", c.cs_ff),
            ("ic_ua", c.ic_ua),
        ]
    }

    fn csv(&self) -> String {
        let mut out = format!("# coupler {}\n# command = {}\n", env!("CARGO_PKG_VERSION"), self.command);
        for (k, v) in self.config_entries() {
            out.push_str(&format!("# config.{k} = {}\n", sci(v)));
        }
        for (k, v) in &self.parameters {
            out.push_str(&format!("# {k} = {}\n", v.csv()));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    fn json(&self) -> Value {
        let parameters: Map<String, Value> = self.parameters.iter().map(|(k, v)| ((*k).to_owned(), v.json())).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().zip(r).map(|(c, v)| ((*c).to_owned(), v.json())).collect()))
            .collect();
        json!({
            "tool": "coupler",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "parameters": parameters,
            "columns": self.columns,
            "rows": rows,
        })
    }
}
