//! Matrix files.
//!
//! NGL1 layout: the bytes `NGL1`, little-endian `u64` row count and column
//! count, then the values as little-endian `f64`, row-major. CSV input has one
//! matrix row per line, comma-separated, no header.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nglab_core::linalg::Matrix;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"NGL1";
const HEADER_LEN: usize = 20;

pub fn write_ngl1<W: Write>(w: &mut W, m: &Matrix) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for x in m.as_slice() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

/// Parses a complete NGL1 buffer.
pub fn decode_ngl1(bytes: &[u8]) -> std::result::Result<Matrix, String> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err("not an NGL1 file".into());
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (t, v) = (word(4), word(12));
    let n = t
        .checked_mul(v)
        .and_then(|n| usize::try_from(n).ok())
        .filter(|n| n.checked_mul(8).is_some())
        .ok_or_else(|| format!("header {t}x{v} is too large"))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != n * 8 {
        return Err(format!("header declares {t}x{v} values ({} bytes) but the body has {} bytes", n * 8, body.len()));
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Matrix::from_vec(t as usize, v as usize, data).map_err(|e| e.to_string())
}

pub fn read_ngl1<R: Read>(r: &mut R) -> std::result::Result<Matrix, String> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| e.to_string())?;
    decode_ngl1(&bytes)
}

pub fn parse_csv(text: &str) -> std::result::Result<Matrix, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, f)| f.parse::<f64>().map_err(|_| format!("line {}, field {}: '{f}' is not a number", i + 1, j + 1)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Matrix::from_rows(&rows).map_err(|e| e.to_string())
}

/// Shortest round-trip decimal per value.
pub fn format_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for row in m.rows_iter() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn save_ngl1(path: &Path, m: &Matrix) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_ngl1(&mut w, m).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn save_csv(path: &Path, m: &Matrix) -> Result<()> {
    write_text(path, &format_csv(m))
}

/// Reads NGL1 when the file starts with the magic bytes, CSV otherwise.
pub fn load_matrix(path: &Path) -> Result<Matrix> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let parsed = if bytes.starts_with(MAGIC) {
        decode_ngl1(&bytes)
    } else {
        std::str::from_utf8(&bytes).map_err(|_| "neither NGL1 nor UTF-8 CSV".to_string()).and_then(parse_csv)
    };
    parsed.map_err(|msg| Error::format(path, msg))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}
