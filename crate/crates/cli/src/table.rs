// SPDX-License-Identifier: Apache-2.0

//! Rectangular result tables and their CSV form.

use std::io::{self, Write};

/// A cell is a finite number or empty (quantity undefined at that point).
pub type Cell = Option<f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(columns: Vec<&'static str>) -> Self {
        ResultTable {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Append a row; rows holding NaN or infinities are dropped with a warning.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        if row.iter().flatten().any(|v| !v.is_finite()) {
            log::warn!("dropping non-finite row {row:?}");
            return;
        }
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Values of one column, in row order.
    pub fn column_values(&self, name: &str) -> Vec<Cell> {
        let index = self
            .column(name)
            .unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[index]).collect()
    }

    /// CSV with a `#`-prefixed preamble, one comment line per preamble line.
    pub fn write_csv<W: Write>(&self, preamble: &str, out: W) -> io::Result<()> {
        let mut out = out;
        for line in preamble.lines() {
            writeln!(out, "# {line}")?;
        }
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|cell| match cell {
                Some(v) => v.to_string(),
                None => String::new(),
            }))?;
        }
        writer.flush()
    }
}
