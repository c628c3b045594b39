//! CSV emission: comma separators, `.` decimals, LF line endings, one header
//! row, full-precision floats via shortest round-trip formatting. Output is
//! a pure function of the data, so identical runs produce identical bytes.

use crate::CliError;
use std::io::Write;
use std::path::Path;

/// Shortest representation that parses back to the same double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub struct CsvWriter {
    buffer: Vec<u8>,
    columns: usize,
}

impl CsvWriter {
    pub fn new(header: &[&str]) -> Self {
        let mut buffer = Vec::new();
        buffer.extend_from_slice(header.join(",").as_bytes());
        buffer.push(b'\n');
        CsvWriter {
            buffer,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "row width mismatch");
        self.buffer.extend_from_slice(cells.join(",").as_bytes());
        self.buffer.push(b'\n');
    }

    pub fn row_f64(&mut self, cells: &[f64]) {
        let rendered: Vec<String> = cells.iter().map(|&v| fmt_f64(v)).collect();
        self.row(&rendered);
    }

    pub fn bytes(&self) -> &[u8] {
        &self.buffer
    }

    pub fn write_to(&self, path: &Path) -> Result<(), CliError> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(&self.buffer)?;
        Ok(())
    }
}
