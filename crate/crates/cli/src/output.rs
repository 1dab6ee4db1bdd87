use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use cachepir::Rational;
use clap::ValueEnum;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Where and how a command writes its result.
#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub format: Format,
    pub path: Option<PathBuf>,
    pub precision: u32,
}

/// A result rendered both ways; exactly one is written.
pub struct Rendered {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
}

impl OutputSpec {
    pub fn decimal(&self, r: &Rational) -> String {
        r.to_decimal(self.precision)
    }

    pub fn emit(&self, rendered: Rendered) -> Result<(), CliError> {
        let bytes = match self.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&rendered.json).map_err(|e| CliError::Io(e.to_string()))?;
                s.push('\n');
                s.into_bytes()
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&rendered.header).map_err(|e| CliError::Io(e.to_string()))?;
                for row in &rendered.rows {
                    w.write_record(row).map_err(|e| CliError::Io(e.to_string()))?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.to_string()))?
            }
        };
        match &self.path {
            Some(p) => fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
            None => io::stdout().lock().write_all(&bytes).map_err(|e| CliError::Io(e.to_string())),
        }
    }
}

/// Numerator and denominator columns of a nonnegative rational.
pub fn parts(r: &Rational) -> [String; 2] {
    let (p, q) = r.to_parts();
    [p.to_string(), q.to_string()]
}
