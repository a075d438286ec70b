//! File-writing helpers shared by the subcommands.

use std::path::Path;

use nonwoven_core::image::GrayImage;
use nonwoven_core::pgm::{load_pgm, save_pgm};

use crate::CliError;

pub fn read_image(path: &Path) -> Result<GrayImage, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    load_pgm(&bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn write_image(path: &Path, img: &GrayImage) -> Result<(), CliError> {
    write_bytes(path, &save_pgm(img))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_bytes(path, text.as_bytes())
}

/// One CSV document: header row plus dot-decimal data rows.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            buf: format!("{}\n", header.join(",")),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
