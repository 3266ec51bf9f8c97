//! Column-oriented numeric tables written as CSV or JSON.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, SimError};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // drop the sign of negative zero
        return "0.0000000000000000e0".into();
    }
    format!("{x:.16e}")
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// `{"columns": [...], "rows": [[...], ...]}` with the CSV number format.
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\"columns\":[");
        let names: Vec<String> = self.columns.iter().map(|c| serde_json::to_string(c).unwrap()).collect();
        s.push_str(&names.join(","));
        s.push_str("],\"rows\":[");
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push('[');
            for (j, &x) in row.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                if x.is_finite() {
                    let _ = write!(s, "{}", fmt_f64(x));
                } else {
                    s.push_str("null");
                }
            }
            s.push(']');
        }
        s.push_str("]}\n");
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| SimError::Artifact("CSV has no header row".into()))?;
        let mut table = Table::new(header.split(','));
        for (i, line) in lines.enumerate() {
            let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| SimError::Artifact(format!("CSV row {}: {e}", i + 1)))?;
            if row.len() != table.columns.len() {
                return Err(SimError::Artifact(format!(
                    "CSV row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    table.columns.len()
                )));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_csv(&text)
    }
}
