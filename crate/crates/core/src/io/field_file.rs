//! The UPKF binary field format: `"UPKF"`, version, `d`, `Nx`, `Ns`
//! (u32 LE), `t` (f64 LE), then `Nx^d Ns` f64 LE values, x-major then s.

use std::path::Path;

use super::IoError;
use crate::problem::{Field, Grid};

pub const MAGIC: &[u8; 4] = b"UPKF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 3 * 4 + 8;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub d: u32,
    pub nx: u32,
    pub ns: u32,
    pub t: f64,
    pub values: Vec<f64>,
}

impl FieldFile {
    pub fn of(field: &Field, t: f64) -> Self {
        let g = field.grid;
        Self {
            d: g.d as u32,
            nx: g.nx as u32,
            ns: g.ns as u32,
            t,
            values: field.values.clone(),
        }
    }

    /// Attaches the values to `grid`, which must have the stored shape.
    pub fn into_field(self, grid: Grid) -> Result<Field, IoError> {
        if grid.d != self.d as usize || grid.nx != self.nx as usize || grid.ns != self.ns as usize {
            return Err(IoError::Format(format!(
                "field is d={} {}x{}, grid is d={} {}x{}",
                self.d, self.nx, self.ns, grid.d, grid.nx, grid.ns
            )));
        }
        Ok(Field::from_values(grid, self.values))
    }
}

pub fn encode_field(file: &FieldFile) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * file.values.len());
    out.extend_from_slice(MAGIC);
    for v in [VERSION, file.d, file.nx, file.ns] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&file.t.to_le_bytes());
    for v in &file.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<FieldFile, IoError> {
    if bytes.len() < HEADER_LEN {
        return Err(IoError::Format(format!(
            "file has {} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(IoError::Format("bad magic".into()));
    }
    let word =
        |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().expect("4 bytes"));
    let version = word(0);
    if version != VERSION {
        return Err(IoError::Format(format!("unsupported version {version}")));
    }
    let (d, nx, ns) = (word(1), word(2), word(3));
    let t = f64::from_le_bytes(bytes[20..28].try_into().expect("8 bytes"));
    let count = (nx as u64)
        .checked_pow(d)
        .and_then(|n| n.checked_mul(ns as u64));
    let expected = count
        .and_then(|c| c.checked_mul(8))
        .and_then(|b| b.checked_add(HEADER_LEN as u64));
    if expected != Some(bytes.len() as u64) {
        return Err(IoError::Format(format!(
            "payload length {} does not match header d={d} Nx={nx} Ns={ns}",
            bytes.len() - HEADER_LEN
        )));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(FieldFile {
        d,
        nx,
        ns,
        t,
        values,
    })
}

pub fn write_field(path: &Path, field: &Field, t: f64) -> Result<(), IoError> {
    std::fs::write(path, encode_field(&FieldFile::of(field, t)))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<FieldFile, IoError> {
    decode_field(&std::fs::read(path)?)
}
