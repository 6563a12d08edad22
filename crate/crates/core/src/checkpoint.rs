//! Binary parameter checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "SGRL"                      4 bytes
//! version                     u32
//! repeated until EOF:
//!   name length               u32
//!   name                      UTF-8 bytes
//!   rows                      u64
//!   cols                      u64
//!   data                      rows * cols f64, row-major
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Matrix;

pub const MAGIC: &[u8; 4] = b"SGRL";
pub const VERSION: u32 = 1;

pub fn encode(entries: &[(String, &Matrix)]) -> Vec<u8> {
    let payload: usize = entries.iter().map(|(n, m)| 20 + n.len() + 8 * m.len()).sum();
    let mut out = Vec::with_capacity(8 + payload);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for (name, m) in entries {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
        out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
        for x in m.data() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::format(
                "checkpoint",
                format!("truncated at byte {} (wanted {n} more)", self.pos),
            ));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Vec<(String, Matrix)>> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::format("checkpoint", "bad magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::format("checkpoint", format!("unsupported version {version}")));
    }
    let mut out = Vec::new();
    while r.pos < bytes.len() {
        let len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|e| Error::format("checkpoint", format!("parameter name: {e}")))?
            .to_string();
        let rows = r.u64()? as usize;
        let cols = r.u64()? as usize;
        let n = rows
            .checked_mul(cols)
            .filter(|n| n.checked_mul(8).is_some_and(|b| b <= bytes.len() - r.pos))
            .ok_or_else(|| Error::format("checkpoint", format!("`{name}`: {rows}x{cols} exceeds file")))?;
        let raw = r.take(8 * n)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        out.push((name, Matrix::from_vec(rows, cols, data)?));
    }
    Ok(out)
}

pub fn write(path: &Path, entries: &[(String, &Matrix)]) -> Result<()> {
    fs::write(path, encode(entries)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<Vec<(String, Matrix)>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Copy entries into `targets` by name; every target must be present with
/// a matching shape.
pub fn restore(entries: &[(String, Matrix)], names: &[String], targets: Vec<&mut Matrix>) -> Result<()> {
    for (name, target) in names.iter().zip(targets) {
        let (_, m) = entries
            .iter()
            .find(|(n, _)| n == name)
            .ok_or_else(|| Error::format("checkpoint", format!("missing parameter `{name}`")))?;
        if m.shape() != target.shape() {
            return Err(Error::shape(
                "checkpoint restore",
                format!("`{name}`: stored {:?}, expected {:?}", m.shape(), target.shape()),
            ));
        }
        *target = m.clone();
    }
    Ok(())
}
