//! Versioned flat binary format shared by the cached classical models.
//!
//! Layout: 8-byte magic `QCNNMODL`, u32 LE format version, u32 LE kind tag,
//! then kind-specific sections of u32 LE dimensions and little-endian f64
//! arrays (matrices row-major).

use crate::error::{Error, Result};
use std::io::{Read, Write};

pub const MAGIC: &[u8; 8] = b"QCNNMODL";
pub const VERSION: u32 = 1;

pub const KIND_PCA: u32 = 1;
pub const KIND_AUTOENCODER: u32 = 2;

pub fn write_header(w: &mut impl Write, kind: u32) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&kind.to_le_bytes())
}

pub fn read_header(r: &mut impl Read, expected_kind: u32) -> Result<()> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|e| Error::Artifact(format!("short read on header: {e}")))?;
    if &magic != MAGIC {
        return Err(Error::Artifact("bad magic bytes".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Artifact(format!(
            "unsupported format version {version} (expected {VERSION})"
        )));
    }
    let kind = read_u32(r)?;
    if kind != expected_kind {
        return Err(Error::Artifact(format!(
            "model kind tag {kind} does not match expected {expected_kind}"
        )));
    }
    Ok(())
}

pub fn write_u32(w: &mut impl Write, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Artifact(format!("short read on u32: {e}")))?;
    Ok(u32::from_le_bytes(buf))
}

pub fn write_f64s(w: &mut impl Write, values: &[f64]) -> std::io::Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_f64s(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Artifact(format!("short read on f64 block: {e}")))?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}
