//! Flat matrix files: a 16-byte header (`PROXFLW1`, rows as `u32`, cols as
//! `u32`, little-endian) followed by `rows·cols` little-endian `f64` in
//! row-major order. Vectors are stored as `len × 1` matrices.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::operators::{DenseMap, LinearMap};

pub const MAGIC: [u8; 8] = *b"PROXFLW1";
pub const HEADER_LEN: usize = 16;

/// Byte length of a stored `rows × cols` matrix.
pub fn file_len(rows: usize, cols: usize) -> usize {
    HEADER_LEN + 8 * rows * cols
}

fn dim_u32(what: &str, v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Input(format!("{what} {v} does not fit the file header")))
}

pub fn write_matrix_to(mut w: impl Write, rows: usize, cols: usize, data: &[f64]) -> Result<()> {
    crate::error::check_len("matrix file payload", rows * cols, data.len())?;
    let mut buf = Vec::with_capacity(file_len(rows, cols));
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&dim_u32("row count", rows)?.to_le_bytes());
    buf.extend_from_slice(&dim_u32("column count", cols)?.to_le_bytes());
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMap) -> Result<()> {
    write_matrix_to(fs::File::create(path)?, m.rows(), m.cols(), m.data())
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    write_matrix_to(fs::File::create(path)?, v.len(), 1, v)
}

/// Parse a matrix file; returns `(rows, cols, data)`.
pub fn read_matrix_from(mut r: impl Read) -> Result<(usize, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN || bytes[..8] != MAGIC {
        return Err(Error::Input("not a proxflow matrix file (bad magic)".into()));
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * rows * cols {
        return Err(Error::Input(format!(
            "matrix file declares {rows}×{cols} but holds {} bytes of data",
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((rows, cols, data))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMap> {
    let path = path.as_ref();
    let file = fs::File::open(path)
        .map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
    let (rows, cols, data) = read_matrix_from(std::io::BufReader::new(file))?;
    DenseMap::new(rows, cols, data)
}

/// Read a file holding a single row or column.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let m = read_matrix(path)?;
    if m.rows() != 1 && m.cols() != 1 {
        return Err(Error::Input(format!(
            "expected a vector, found a {}×{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.into_data())
}

/// Plain CSV, one matrix row per line, shortest round-trip float formatting.
pub fn write_matrix_csv(w: impl Write, rows: usize, cols: usize, data: &[f64]) -> Result<()> {
    crate::error::check_len("matrix csv payload", rows * cols, data.len())?;
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    if cols > 0 {
        for row in data.chunks(cols) {
            out.serialize(row).map_err(|e| Error::Input(e.to_string()))?;
        }
    }
    out.flush()?;
    Ok(())
}
