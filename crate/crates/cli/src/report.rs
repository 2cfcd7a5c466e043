//! Deterministic run reports.
//!
//! A report is a plain text document of `key: value` lines plus factor
//! payloads in the hypermatrix format, so it can be consumed with the same
//! parser that reads the inputs. All numbers are printed with 17 significant
//! digits; rerunning the echoed command with the echoed seed reproduces the
//! non-comment content byte for byte. The wall-clock time is appended as a
//! trailing `#` comment line, which the format defines as ignorable.

use std::fmt::Display;
use std::time::Instant;

use kpdkit_core::io::{format_f64, format_hypermatrix};
use kpdkit_core::matrix::Matrix;
use kpdkit_core::tensor::{Hypermatrix, Shape};

pub struct Report {
    buf: String,
    started: Instant,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Report {
            buf: String::new(),
            started: Instant::now(),
        };
        r.kv("command", command);
        r
    }

    pub fn kv(&mut self, key: &str, value: impl Display) {
        self.buf.push_str(key);
        self.buf.push_str(": ");
        self.buf.push_str(&value.to_string());
        self.buf.push('\n');
    }

    pub fn kv_f64(&mut self, key: &str, value: f64) {
        self.kv(key, format_f64(value));
    }

    /// A labelled vector payload in the hypermatrix format.
    pub fn vector_payload(&mut self, label: &str, values: &[f64]) {
        self.buf.push_str(label);
        self.buf.push_str(":\n");
        let shape = Shape::new(vec![values.len()]).expect("nonempty factor");
        let h = Hypermatrix::new(shape, values.to_vec()).expect("length matches");
        self.buf.push_str(&format_hypermatrix(&h));
    }

    /// A labelled matrix payload in the hypermatrix format (two axes).
    pub fn matrix_payload(&mut self, label: &str, m: &Matrix) {
        self.buf.push_str(label);
        self.buf.push_str(":\n");
        let shape = Shape::new(vec![m.rows(), m.cols()]).expect("nonempty matrix");
        let h = Hypermatrix::new(shape, m.values().to_vec()).expect("length matches");
        self.buf.push_str(&format_hypermatrix(&h));
    }

    pub fn raw_line(&mut self, line: &str) {
        self.buf.push_str(line);
        self.buf.push('\n');
    }

    /// Finishes the report: the timing comment is the only non-reproducible
    /// line and is marked as a comment for that reason.
    pub fn finish(mut self) -> String {
        let secs = self.started.elapsed().as_secs_f64();
        self.buf.push_str(&format!("# wall-seconds: {secs:.3}\n"));
        self.buf
    }
}
