//! JSON matrix files: `{"m": int, "n": int, "entries": [[row-major reals]]}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vqeg_core::PayoffMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<Vec<f64>>,
}

impl From<&PayoffMatrix> for MatrixFile {
    fn from(a: &PayoffMatrix) -> Self {
        MatrixFile { m: a.rows(), n: a.cols(), entries: (0..a.rows()).map(|i| a.row(i).to_vec()).collect() }
    }
}

impl MatrixFile {
    pub fn into_matrix(self) -> Result<PayoffMatrix> {
        if self.entries.len() != self.m {
            return Err(Error::Usage(format!("matrix declares m = {} but has {} rows", self.m, self.entries.len())));
        }
        if let Some((i, r)) = self.entries.iter().enumerate().find(|(_, r)| r.len() != self.n) {
            return Err(Error::Usage(format!("matrix declares n = {} but row {i} has {} entries", self.n, r.len())));
        }
        Ok(PayoffMatrix::from_rows(&self.entries)?)
    }
}

pub fn to_json(a: &PayoffMatrix) -> String {
    serde_json::to_string(&MatrixFile::from(a)).expect("finite matrices always serialize")
}

pub fn from_json(text: &str, origin: &Path) -> Result<PayoffMatrix> {
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|source| Error::MatrixParse { path: origin.to_path_buf(), source })?;
    file.into_matrix()
}

pub fn read_matrix(path: &Path) -> Result<PayoffMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text, path)
}

pub fn write_matrix(path: &Path, a: &PayoffMatrix) -> Result<()> {
    let mut text = to_json(a);
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
