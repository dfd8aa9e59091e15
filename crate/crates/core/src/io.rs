//! Little-endian binary helpers shared by the mesh, sample, grid and
//! checkpoint containers.

use std::io::{self, Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic bytes: expected {expected:?}")]
    BadMagic { expected: String },
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_magic(w: &mut impl Write, magic: &[u8]) -> io::Result<()> {
    w.write_all(magic)
}

pub fn expect_magic(r: &mut impl Read, magic: &[u8]) -> Result<(), FormatError> {
    let mut buf = vec![0u8; magic.len()];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => FormatError::BadMagic {
            expected: String::from_utf8_lossy(magic).into_owned(),
        },
        _ => FormatError::Io(e),
    })?;
    if buf != magic {
        return Err(FormatError::BadMagic {
            expected: String::from_utf8_lossy(magic).into_owned(),
        });
    }
    Ok(())
}

pub fn write_u32(w: &mut impl Write, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub fn write_u64(w: &mut impl Write, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub fn write_f64(w: &mut impl Write, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub fn write_f32s(w: &mut impl Write, v: &[f32]) -> io::Result<()> {
    let mut buf = Vec::with_capacity(v.len() * 4);
    for x in v {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn write_str(w: &mut impl Write, s: &str) -> io::Result<()> {
    write_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

pub fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_u64(r: &mut impl Read) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_f64(r: &mut impl Read) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_f32s(r: &mut impl Read, n: usize) -> io::Result<Vec<f32>> {
    let mut buf = vec![0u8; n * 4];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

/// Length-prefixed UTF-8 string, refusing lengths above `max`.
pub fn read_str(r: &mut impl Read, max: usize) -> Result<String, FormatError> {
    let n = read_u32(r)? as usize;
    if n > max {
        return Err(FormatError::Malformed(format!("string length {n} exceeds {max}")));
    }
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| FormatError::Malformed(e.to_string()))
}

/// Guards element counts read from a header before allocating.
pub fn check_count(n: u64, limit: u64, what: &str) -> Result<usize, FormatError> {
    if n > limit {
        return Err(FormatError::Malformed(format!("{what} count {n} exceeds limit {limit}")));
    }
    Ok(n as usize)
}
