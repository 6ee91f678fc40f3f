//! Binary model file: magic, `u32` global length, `u32` regional length,
//! then every parameter block as little-endian `f64` in layout order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::ModelParams;
use crate::error::{Error, Result};
use crate::features::REGIONAL_DIM;

pub const MODEL_MAGIC: &[u8; 8] = b"LSSVMW01";

pub fn write_model<W: Write>(mut out: W, w: &ModelParams) -> std::io::Result<()> {
    out.write_all(MODEL_MAGIC)?;
    out.write_all(&(w.e_len() as u32).to_le_bytes())?;
    out.write_all(&(REGIONAL_DIM as u32).to_le_bytes())?;
    for v in w.as_slice() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()
}

fn truncated(_: std::io::Error) -> Error {
    Error::Format("truncated model file".into())
}

pub fn read_model<R: Read>(mut input: R) -> Result<ModelParams> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MODEL_MAGIC {
        return Err(Error::Format("not a model file".into()));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word).map_err(truncated)?;
    let e_len = u32::from_le_bytes(word) as usize;
    input.read_exact(&mut word).map_err(truncated)?;
    let s_len = u32::from_le_bytes(word) as usize;
    if s_len != REGIONAL_DIM {
        return Err(Error::Format(format!(
            "regional length {s_len}, expected {REGIONAL_DIM}"
        )));
    }
    let n = super::Layout::new(e_len).len();
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(truncated)?;
    if bytes.len() != 8 * n {
        return Err(Error::Format(format!(
            "expected {} weight bytes, found {}",
            8 * n,
            bytes.len()
        )));
    }
    let w = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ModelParams::from_vec(e_len, w)
}

pub fn save_model(path: &Path, w: &ModelParams) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_model(BufWriter::new(file), w).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelParams> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let n = super::super::Layout::new(3).len();
        let w = ModelParams::from_vec(3, (0..n).map(|i| i as f64 * 0.1 - 2.0).collect()).unwrap();
        let mut buf = Vec::new();
        write_model(&mut buf, &w).unwrap();
        assert_eq!(buf.len(), 16 + 8 * n);
        assert_eq!(&buf[..8], b"LSSVMW01");
        assert_eq!(read_model(buf.as_slice()).unwrap(), w);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let w = ModelParams::zeros(2);
        let mut buf = Vec::new();
        write_model(&mut buf, &w).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_model(bad.as_slice()), Err(Error::Format(_))));
        buf.pop();
        assert!(matches!(read_model(buf.as_slice()), Err(Error::Format(_))));
    }
}
