//! On-disk cache of assembled differentials.
//!
//! File layout, all integers little-endian:
//!
//! | field   | type      |
//! |---------|-----------|
//! | magic   | `b"KSZM"` |
//! | version | `u32` (1) |
//! | prime   | `u32`     |
//! | rows    | `u64`     |
//! | cols    | `u64`     |
//! | nnz     | `u64`     |
//!
//! followed by `nnz` triplets `(row: u32, col: u32, value: u32)` sorted by
//! `(row, col)`. Files are named by the SHA-256 of the cache key.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use koszul_core::field::PrimeField;
use koszul_core::sparse::SparseMatrix;
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

pub const MAGIC: [u8; 4] = *b"KSZM";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8 + 8;

/// Identity of one differential `delta_{p,q}` of one complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheKey {
    pub curve: String,
    pub b: String,
    pub l: String,
    pub p: i64,
    pub q: i64,
    pub prime: u32,
    pub seed: u64,
}

impl CacheKey {
    pub fn digest(&self) -> String {
        let text = format!("{}\n{}\n{}\n{}\n{}\n{}\n{}", self.curve, self.b, self.l, self.p, self.q, self.prime, self.seed);
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

pub fn encode(m: &SparseMatrix, prime: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 12 * m.nnz());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&prime.to_le_bytes());
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    out.extend_from_slice(&(m.nnz() as u64).to_le_bytes());
    for &(r, c, v) in m.entries() {
        out.extend_from_slice(&r.to_le_bytes());
        out.extend_from_slice(&c.to_le_bytes());
        out.extend_from_slice(&v.value().to_le_bytes());
    }
    out
}

/// Decodes a cache image; the prime must match `field`.
pub fn decode(bytes: &[u8], field: PrimeField) -> std::result::Result<SparseMatrix, String> {
    if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
        return Err("missing KSZM header".into());
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    if u32_at(4) != VERSION {
        return Err(format!("unsupported version {}", u32_at(4)));
    }
    if u32_at(8) != field.modulus() {
        return Err(format!("prime {} differs from {}", u32_at(8), field.modulus()));
    }
    let (rows, cols, nnz) = (u64_at(12) as usize, u64_at(20) as usize, u64_at(28) as usize);
    if bytes.len() != HEADER_LEN + 12 * nnz {
        return Err(format!("expected {} triplets", nnz));
    }
    let mut entries = Vec::with_capacity(nnz);
    for k in 0..nnz {
        let o = HEADER_LEN + 12 * k;
        let v = u32_at(o + 8);
        if v >= field.modulus() {
            return Err(format!("value {v} not reduced"));
        }
        entries.push((u32_at(o), u32_at(o + 4), field.elem(v as i64)));
    }
    if entries.windows(2).any(|w| (w[0].0, w[0].1) >= (w[1].0, w[1].1)) {
        return Err("triplets not strictly sorted".into());
    }
    SparseMatrix::new(rows, cols, entries).map_err(|e| e.to_string())
}

/// Directory of cached matrices.
#[derive(Clone, Debug)]
pub struct MatrixCache {
    dir: PathBuf,
}

impl MatrixCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
        Ok(MatrixCache { dir })
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}.kszm", key.digest()))
    }

    pub fn load(&self, key: &CacheKey, field: PrimeField) -> Result<Option<SparseMatrix>> {
        let path = self.path(key);
        let mut bytes = Vec::new();
        match fs::File::open(&path) {
            Ok(mut f) => f.read_to_end(&mut bytes).map_err(|e| HarnessError::io(&path, e))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(HarnessError::io(&path, e)),
        };
        decode(&bytes, field).map(Some).map_err(|reason| HarnessError::BadCache { path, reason })
    }

    /// Writes through a temporary file so concurrent readers never see a
    /// partial matrix.
    pub fn store(&self, key: &CacheKey, m: &SparseMatrix, prime: u32) -> Result<()> {
        let path = self.path(key);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let write = |p: &Path| -> std::io::Result<()> {
            let mut w = BufWriter::new(fs::File::create(p)?);
            w.write_all(&encode(m, prime))?;
            w.flush()
        };
        write(&tmp).map_err(|e| HarnessError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| HarnessError::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use koszul_core::field::Fp;

    #[test]
    fn header_layout() {
        let f = PrimeField::new(10007).unwrap();
        let m = SparseMatrix::new(2, 3, vec![(0, 2, Fp::ONE), (1, 0, f.elem(-1))]).unwrap();
        let bytes = encode(&m, 10007);
        assert_eq!(&bytes[..4], b"KSZM");
        assert_eq!(bytes[4..8], 1u32.to_le_bytes());
        assert_eq!(bytes[8..12], 10007u32.to_le_bytes());
        assert_eq!(bytes[28..36], 2u64.to_le_bytes());
        assert_eq!(bytes.len(), 36 + 24);
        // second triplet: row 1, col 0, value p - 1
        assert_eq!(bytes[48..60], [1, 0, 0, 0, 0, 0, 0, 0, 0x16, 0x27, 0, 0]);
        assert_eq!(decode(&bytes, f).unwrap(), m);
        let other = PrimeField::new(32003).unwrap();
        assert!(decode(&bytes, other).is_err());
        assert!(decode(&bytes[..40], f).is_err());
    }

    #[test]
    fn keys_separate_differentials() {
        let k = CacheKey { curve: "c".into(), b: "0".into(), l: "5*inf".into(), p: 1, q: 1, prime: 10007, seed: 1 };
        let mut k2 = k.clone();
        k2.q = 2;
        assert_ne!(k.digest(), k2.digest());
        assert_eq!(k.digest().len(), 64);
    }
}
