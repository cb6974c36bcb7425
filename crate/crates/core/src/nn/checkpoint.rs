//! Binary checkpoint container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic       8 bytes   "RELCNN\0\x01"
//! header_len  u64
//! header      header_len bytes of UTF-8 JSON (free-form, written by the caller)
//! n_arrays    u32
//! n_arrays × {
//!     name_len  u32
//!     name      name_len bytes UTF-8
//!     ndim      u32
//!     dims      ndim × u64
//!     values    product(dims) × f64 (IEEE-754 binary64)
//! }
//! ```

use std::io::{self, Read, Write};

use thiserror::Error;

use super::Array;

pub const MAGIC: &[u8; 8] = b"RELCNN\0\x01";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a checkpoint (bad magic bytes)")]
    BadMagic,
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint header: {0}")]
    Header(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: serde_json::Value,
    pub arrays: Vec<(String, Array<f64>)>,
}

impl Checkpoint {
    pub fn array(&self, name: &str) -> Option<&Array<f64>> {
        self.arrays.iter().find(|(n, _)| n == name).map(|(_, a)| a)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), CheckpointError> {
        let header = serde_json::to_vec(&self.header)?;
        w.write_all(MAGIC)?;
        w.write_all(&(header.len() as u64).to_le_bytes())?;
        w.write_all(&header)?;
        w.write_all(&(self.arrays.len() as u32).to_le_bytes())?;
        for (name, array) in &self.arrays {
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
            w.write_all(&(array.shape().len() as u32).to_le_bytes())?;
            for &d in array.shape() {
                w.write_all(&(d as u64).to_le_bytes())?;
            }
            for &v in array.data() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CheckpointError> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, CheckpointError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let header_len = read_u64(&mut r)? as usize;
        let header_bytes = read_vec(&mut r, header_len)?;
        let header = serde_json::from_slice(&header_bytes)?;
        let n = read_u32(&mut r)? as usize;
        let mut arrays = Vec::with_capacity(n.min(1024));
        for _ in 0..n {
            let name_len = read_u32(&mut r)? as usize;
            let name = String::from_utf8(read_vec(&mut r, name_len)?)
                .map_err(|_| CheckpointError::Corrupt("array name is not UTF-8".into()))?;
            let ndim = read_u32(&mut r)? as usize;
            let dims = (0..ndim)
                .map(|_| read_u64(&mut r).map(|d| d as usize))
                .collect::<Result<Vec<_>, _>>()?;
            let count = dims
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .ok_or_else(|| CheckpointError::Corrupt(format!("array `{name}` is too large")))?;
            let raw = read_vec(&mut r, count.checked_mul(8).ok_or_else(|| CheckpointError::Corrupt("size overflow".into()))?)?;
            let data = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            let array = Array::from_vec(&dims, data).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
            arrays.push((name, array));
        }
        Ok(Checkpoint { header, arrays })
    }
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_vec<R: Read>(r: &mut R, len: usize) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    r.take(len as u64).read_to_end(&mut buf)?;
    if buf.len() != len {
        return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "truncated checkpoint"));
    }
    Ok(buf)
}
