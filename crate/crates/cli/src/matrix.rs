//! The VDMX container: a 28-byte little-endian header followed by an
//! `n x p` column-major `f64` payload.
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `VDMX`                            |
//! | 4      | 4    | version, `u32` = 1                      |
//! | 8      | 4    | flags, `u32`; bit 0: columns standardized |
//! | 12     | 8    | `n`, `u64`                              |
//! | 20     | 8    | `p`, `u64`                              |
//! | 28     | 8np  | payload                                 |

use std::borrow::Cow;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use memmap2::Mmap;
use thiserror::Error;
use vdselect_core::ambient::dot;
use vdselect_core::{ColumnProvider, Result as VdResult, VdError};

pub const MAGIC: [u8; 4] = *b"VDMX";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 28;
pub const FLAG_STANDARDIZED: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("not a VDMX file (bad magic)")]
    BadMagic,

    #[error("unsupported VDMX version {0}")]
    BadVersion(u32),

    #[error("file holds {found} bytes, expected at least {expected}")]
    TruncatedFile { expected: u64, found: u64 },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: u64, found: u64 },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for MatrixError {
    fn from(e: std::io::Error) -> Self {
        MatrixError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixHeader {
    pub n: usize,
    pub p: usize,
    pub flags: u32,
}

impl MatrixHeader {
    pub fn is_standardized(&self) -> bool {
        self.flags & FLAG_STANDARDIZED != 0
    }

    /// Validates the header bytes against the total file length.
    fn parse(head: &[u8], file_len: u64) -> Result<Self, MatrixError> {
        if head.len() < HEADER_LEN || file_len < HEADER_LEN as u64 {
            return Err(MatrixError::TruncatedFile {
                expected: HEADER_LEN as u64,
                found: file_len,
            });
        }
        if head[0..4] != MAGIC {
            return Err(MatrixError::BadMagic);
        }
        let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().expect("4 bytes"));
        let u64_at = |o: usize| u64::from_le_bytes(head[o..o + 8].try_into().expect("8 bytes"));
        let version = u32_at(4);
        if version != VERSION {
            return Err(MatrixError::BadVersion(version));
        }
        let flags = u32_at(8);
        let (n, p) = (u64_at(12), u64_at(20));
        let expected = n
            .checked_mul(p)
            .and_then(|np| np.checked_mul(8))
            .and_then(|b| b.checked_add(HEADER_LEN as u64))
            .ok_or(MatrixError::SizeMismatch {
                expected: u64::MAX,
                found: file_len,
            })?;
        if file_len < expected {
            return Err(MatrixError::TruncatedFile {
                expected,
                found: file_len,
            });
        }
        if file_len > expected {
            return Err(MatrixError::SizeMismatch {
                expected,
                found: file_len,
            });
        }
        Ok(Self {
            n: n as usize,
            p: p as usize,
            flags,
        })
    }

    fn encode(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[0..4].copy_from_slice(&MAGIC);
        h[4..8].copy_from_slice(&VERSION.to_le_bytes());
        h[8..12].copy_from_slice(&self.flags.to_le_bytes());
        h[12..20].copy_from_slice(&(self.n as u64).to_le_bytes());
        h[20..28].copy_from_slice(&(self.p as u64).to_le_bytes());
        h
    }
}

/// Writes an `n x p` column-major matrix.
pub fn matrix_write(path: &Path, n: usize, p: usize, data: &[f64], flags: u32) -> Result<(), MatrixError> {
    if data.len() as u64 != n as u64 * p as u64 {
        return Err(MatrixError::SizeMismatch {
            expected: n as u64 * p as u64,
            found: data.len() as u64,
        });
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MatrixHeader { n, p, flags }.encode())?;
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// True when the file starts with the VDMX magic.
pub fn has_magic(path: &Path) -> Result<bool, MatrixError> {
    let mut head = [0u8; 4];
    let mut f = File::open(path)?;
    let mut read = 0;
    while read < 4 {
        let k = f.read(&mut head[read..])?;
        if k == 0 {
            return Ok(false);
        }
        read += k;
    }
    Ok(head == MAGIC)
}

/// A matrix loaded fully into memory.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixData {
    pub header: MatrixHeader,
    pub data: Vec<f64>,
}

pub fn matrix_read(path: &Path) -> Result<MatrixData, MatrixError> {
    let bytes = std::fs::read(path)?;
    let header = MatrixHeader::parse(&bytes, bytes.len() as u64)?;
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(MatrixData { header, data })
}

impl ColumnProvider for MatrixData {
    fn n(&self) -> usize {
        self.header.n
    }
    fn p(&self) -> usize {
        self.header.p
    }
    fn column(&self, j: usize) -> Cow<'_, [f64]> {
        let n = self.header.n;
        Cow::Borrowed(&self.data[j * n..(j + 1) * n])
    }
}

/// A memory-mapped matrix; columns are decoded on access and the payload
/// is never copied as a whole.
pub struct MappedMatrix {
    pub header: MatrixHeader,
    map: Mmap,
}

pub fn matrix_open(path: &Path) -> Result<MappedMatrix, MatrixError> {
    let file = File::open(path)?;
    let len = file.metadata()?.len();
    if len < HEADER_LEN as u64 {
        return Err(MatrixError::TruncatedFile {
            expected: HEADER_LEN as u64,
            found: len,
        });
    }
    // The mapping is read-only and the file is not expected to change
    // while a run is in progress.
    let map = unsafe { Mmap::map(&file)? };
    let header = MatrixHeader::parse(&map, len)?;
    Ok(MappedMatrix { header, map })
}

impl MappedMatrix {
    fn column_bytes(&self, j: usize) -> &[u8] {
        let n = self.header.n;
        let start = HEADER_LEN + 8 * n * j;
        &self.map[start..start + 8 * n]
    }
}

fn decode(bytes: &[u8]) -> impl Iterator<Item = f64> + '_ {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
}

impl ColumnProvider for MappedMatrix {
    fn n(&self) -> usize {
        self.header.n
    }
    fn p(&self) -> usize {
        self.header.p
    }
    fn column(&self, j: usize) -> Cow<'_, [f64]> {
        Cow::Owned(decode(self.column_bytes(j)).collect())
    }
    fn inner_products_range(&self, r: &[f64], start: usize, out: &mut [f64]) {
        let mut col = vec![0.0; self.header.n];
        for (i, o) in out.iter_mut().enumerate() {
            col.iter_mut()
                .zip(decode(self.column_bytes(start + i)))
                .for_each(|(c, v)| *c = v);
            *o = dot(&col, r);
        }
    }
}

/// Centers each column and scales it to unit norm on the fly.
pub struct Standardized<P> {
    inner: P,
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl<P: ColumnProvider> Standardized<P> {
    pub fn new(inner: P) -> VdResult<Self> {
        let n = inner.n();
        let mut mean = Vec::with_capacity(inner.p());
        let mut scale = Vec::with_capacity(inner.p());
        for j in 0..inner.p() {
            let col = inner.column(j);
            let mu = col.iter().sum::<f64>() / n as f64;
            let ss = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>().sqrt();
            let max = col.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if ss <= 1e-12 * max * (n as f64).sqrt() || ss == 0.0 {
                return Err(VdError::DegenerateColumn { norm: ss });
            }
            mean.push(mu);
            scale.push(ss);
        }
        Ok(Self { inner, mean, scale })
    }
}

impl<P: ColumnProvider> ColumnProvider for Standardized<P> {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn p(&self) -> usize {
        self.inner.p()
    }
    fn column(&self, j: usize) -> Cow<'_, [f64]> {
        let (mu, s) = (self.mean[j], self.scale[j]);
        Cow::Owned(self.inner.column(j).iter().map(|v| (v - mu) / s).collect())
    }
    fn inner_products_range(&self, r: &[f64], start: usize, out: &mut [f64]) {
        self.inner.inner_products_range(r, start, out);
        let sum_r: f64 = r.iter().sum();
        for (i, o) in out.iter_mut().enumerate() {
            let j = start + i;
            *o = (*o - self.mean[j] * sum_r) / self.scale[j];
        }
    }
}
