//! CSV tables with a `#` metadata block.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// Version tag of the CSV layout.
pub const FORMAT_VERSION: &str = "holocrb-csv/1";

/// 17 significant digits, locale independent.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(command: &str, header: &[&str]) -> Self {
        let mut t = Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        };
        t.meta("tool", concat!("holocrb ", env!("CARGO_PKG_VERSION")));
        t.meta("format", FORMAT_VERSION);
        t.meta("command", command);
        t
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        for (k, v) in &self.meta {
            writeln!(buf, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }

    pub fn write(&self, out: Option<&Path>) -> Result<()> {
        let bytes = self.to_bytes()?;
        match out {
            Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(&bytes)?;
                so.flush()?;
                Ok(())
            }
        }
    }
}
