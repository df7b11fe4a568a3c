//! Report files: JSON envelopes and RFC 4180 tables with LF line endings.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;

/// Shortest round-trip decimal form, `.` as separator, never an exponent.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

/// Destination for a command's outputs. Files written so far are removed by [`Sink::discard`].
#[derive(Debug)]
pub struct Sink {
    dir: Option<PathBuf>,
    format: Format,
    written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>, format: Format) -> io::Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
        }
        Ok(Self {
            dir,
            format,
            written: Vec::new(),
        })
    }

    fn wants_json(&self) -> bool {
        matches!(self.format, Format::Json | Format::Both)
    }

    fn wants_csv(&self) -> bool {
        matches!(self.format, Format::Csv | Format::Both)
    }

    fn emit(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                self.written.push(path.clone());
                fs::write(&path, bytes)
            }
            None => io::stdout().write_all(bytes),
        }
    }

    /// Pretty JSON followed by a newline.
    pub fn json<T: Serialize>(&mut self, stem: &str, value: &T) -> io::Result<()> {
        if !self.wants_json() {
            return Ok(());
        }
        let mut bytes = serde_json::to_vec_pretty(value).map_err(io::Error::other)?;
        bytes.push(b'\n');
        self.emit(&format!("{stem}.json"), &bytes)
    }

    /// A table with a header row. Without an output directory, tables go to standard
    /// output only when CSV is the sole format.
    pub fn csv(&mut self, stem: &str, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
        if !self.wants_csv() || (self.dir.is_none() && self.format != Format::Csv) {
            return Ok(());
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(header).map_err(io::Error::other)?;
        for r in rows {
            w.write_record(r).map_err(io::Error::other)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| io::Error::other(e.to_string()))?;
        self.emit(&format!("{stem}.csv"), &bytes)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Removes every file written so far.
    pub fn discard(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(&p);
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_use_plain_decimal() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(1e-7), "0.0000001");
        assert_eq!(num(-2.0), "-2");
        assert_eq!(num(f64::NAN), "NaN");
        assert_eq!(num(-0.0), "0");
    }

    #[test]
    fn csv_is_lf_terminated_and_quoted() {
        let dir = tempfile::tempdir().unwrap();
        let mut sink = Sink::new(Some(dir.path().to_path_buf()), Format::Both).unwrap();
        sink.csv("t", &["a", "b"], &[vec!["1".into(), "x,y".into()]])
            .unwrap();
        let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text, "a,b\n1,\"x,y\"\n");
        sink.discard();
        assert!(!dir.path().join("t.csv").exists());
    }
}
