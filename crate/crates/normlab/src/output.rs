use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;

/// Rows for `--format csv`.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// `key,value` rows for the scalar top-level fields of an object.
    pub fn from_scalars(v: &Value) -> Self {
        let mut t = Table::new(&["key", "value"]);
        if let Value::Object(m) = v {
            for (k, x) in m {
                match x {
                    Value::Number(_) | Value::Bool(_) => t.push(vec![k.clone(), x.to_string()]),
                    Value::String(s) => t.push(vec![k.clone(), s.clone()]),
                    _ => {}
                }
            }
        }
        t
    }

    fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.headers).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// The result of a command.
#[derive(Clone, Debug)]
pub struct Output {
    pub json: Value,
    pub table: Option<Table>,
    /// Set when a check inside the report failed; the report is still
    /// written and the process exits with the check-failure code.
    pub failure: Option<String>,
}

impl Output {
    pub fn new(json: Value) -> Self {
        Output {
            json,
            table: None,
            failure: None,
        }
    }

    pub fn with_table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }

    pub fn fail_if(mut self, cond: bool, msg: impl Into<String>) -> Self {
        if cond {
            self.failure = Some(msg.into());
        }
        self
    }

    pub fn render(&self, csv: bool) -> Result<Vec<u8>, CliError> {
        if csv {
            match &self.table {
                Some(t) => t.to_bytes(),
                None => Table::from_scalars(&self.json).to_bytes(),
            }
        } else {
            let mut s = serde_json::to_string_pretty(&self.json).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
    }
}

pub fn write(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}
