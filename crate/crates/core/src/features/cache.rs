//! Binary feature cache: one little-endian record per image.
//!
//! ```text
//! magic "LSALFEA1"
//! u32 N, u32 regional width (35), u32 E
//! f64 phi_s[N][35]   row-major
//! f64 phi_e[E]
//! f64 area[N]        pixels
//! u8  border[N]
//! u32 edge count, then (u32 j, u32 k, f64 v_jk) per edge
//! ```

use std::io::{Read, Write};

use super::{Extraction, FeatureBundle, RegionSaliencyFeatures, RegionalRow, REGIONAL_DIM};
use crate::error::{Error, Result};
use crate::mrf::RegionGraph;

pub const FEATURE_MAGIC: &[u8; 8] = b"LSALFEA1";

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRecord {
    pub phi_s: Vec<RegionalRow>,
    pub phi_e: Vec<f64>,
    pub areas: Vec<f64>,
    pub border: Vec<bool>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl FeatureRecord {
    pub fn from_extraction(ex: &Extraction) -> Self {
        Self {
            phi_s: ex.bundle.regional.phi_s.clone(),
            phi_e: ex.bundle.phi_e.clone(),
            areas: ex.bundle.areas.clone(),
            border: ex.bundle.border.clone(),
            edges: ex.graph.edges().to_vec(),
        }
    }

    /// Rebuilds the model inputs; `eps` is the log-likelihood clamp.
    pub fn into_parts(self, eps: f64) -> Result<(FeatureBundle, RegionGraph)> {
        let n = self.phi_s.len();
        let graph = RegionGraph::new(n, self.edges)?;
        let bundle = FeatureBundle {
            regional: RegionSaliencyFeatures::from_phi_s(self.phi_s, eps)?,
            phi_e: self.phi_e,
            areas: self.areas,
            border: self.border,
        };
        Ok((bundle, graph))
    }
}

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Format(format!("{v} does not fit in u32")))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub fn write_record<W: Write>(mut w: W, rec: &FeatureRecord) -> std::io::Result<()> {
    let n = rec.phi_s.len();
    let mut buf = Vec::with_capacity(32 + n * (REGIONAL_DIM + 2) * 8 + rec.phi_e.len() * 8);
    buf.extend_from_slice(FEATURE_MAGIC);
    let to_io = |e: Error| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string());
    put_u32(&mut buf, n).map_err(to_io)?;
    put_u32(&mut buf, REGIONAL_DIM).map_err(to_io)?;
    put_u32(&mut buf, rec.phi_e.len()).map_err(to_io)?;
    rec.phi_s
        .iter()
        .flatten()
        .for_each(|&v| put_f64(&mut buf, v));
    rec.phi_e.iter().for_each(|&v| put_f64(&mut buf, v));
    rec.areas.iter().for_each(|&v| put_f64(&mut buf, v));
    buf.extend(rec.border.iter().map(|&b| u8::from(b)));
    put_u32(&mut buf, rec.edges.len()).map_err(to_io)?;
    for &(j, k, v) in &rec.edges {
        put_u32(&mut buf, j).map_err(to_io)?;
        put_u32(&mut buf, k).map_err(to_io)?;
        put_f64(&mut buf, v);
    }
    w.write_all(&buf)
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| Error::Format(format!("record truncated at byte {}", self.pos)))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn read_record<R: Read>(mut r: R) -> Result<FeatureRecord> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)
        .map_err(|e| Error::Format(format!("reading feature record: {e}")))?;
    let mut c = Cursor {
        data: &data,
        pos: 0,
    };
    if c.take(8)? != FEATURE_MAGIC {
        return Err(Error::Format("bad feature record magic".into()));
    }
    let n = c.u32()?;
    let width = c.u32()?;
    if width != REGIONAL_DIM {
        return Err(Error::Format(format!(
            "regional width {width}, expected {REGIONAL_DIM}"
        )));
    }
    let e = c.u32()?;
    let mut phi_s = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = [0.0; REGIONAL_DIM];
        for v in row.iter_mut() {
            *v = c.f64()?;
        }
        phi_s.push(row);
    }
    let phi_e = (0..e).map(|_| c.f64()).collect::<Result<_>>()?;
    let areas = (0..n).map(|_| c.f64()).collect::<Result<_>>()?;
    let border = c.take(n)?.iter().map(|&b| b != 0).collect();
    let m = c.u32()?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        edges.push((c.u32()?, c.u32()?, c.f64()?));
    }
    if c.pos != data.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after feature record",
            data.len() - c.pos
        )));
    }
    Ok(FeatureRecord {
        phi_s,
        phi_e,
        areas,
        border,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn record_round_trips(
            n in 1usize..6,
            e in 0usize..20,
            seed in any::<u64>(),
        ) {
            let mut s = seed;
            let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 11) as f64 / (1u64 << 53) as f64 };
            let rec = FeatureRecord {
                phi_s: (0..n).map(|_| { let mut r = [0.0; REGIONAL_DIM]; r.iter_mut().for_each(|v| *v = next()); r }).collect(),
                phi_e: (0..e).map(|_| next()).collect(),
                areas: (0..n).map(|_| (next() * 100.0).floor() + 1.0).collect(),
                border: (0..n).map(|_| next() > 0.5).collect(),
                edges: (1..n).map(|k| (k - 1, k, next().max(1e-3))).collect(),
            };
            let mut bytes = Vec::new();
            write_record(&mut bytes, &rec).unwrap();
            prop_assert_eq!(&bytes[..8], FEATURE_MAGIC);
            prop_assert_eq!(read_record(&bytes[..]).unwrap(), rec);
        }
    }

    #[test]
    fn bad_magic_and_truncation_rejected() {
        assert!(read_record(&b"LSALFEA2\0\0\0\0"[..]).is_err());
        let rec = FeatureRecord {
            phi_s: vec![[0.5; REGIONAL_DIM]],
            phi_e: vec![0.1; 3],
            areas: vec![4.0],
            border: vec![true],
            edges: vec![],
        };
        let mut bytes = Vec::new();
        write_record(&mut bytes, &rec).unwrap();
        assert!(read_record(&bytes[..bytes.len() - 1]).is_err());
    }
}
