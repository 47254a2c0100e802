//! Versioned binary model files.
//!
//! Layout (all little-endian), in order:
//!
//! ```text
//! magic  b"EDGC"
//! version u32                         (currently 1)
//! n, m, k u64                         feature / component / cluster counts
//! centroid        n × f64
//! basis rows      m·n × f64           row-major H
//! eigenvalues     m × f64
//! whitening       m × f64             diag of W
//! space tag       u8                  0 = whitened, 1 = centered-original
//! cluster centroids  k·d × f64        d = m (whitened) or n (original)
//! discriminants   k·m × f64           row-major
//! threshold count u64, thresholds     1 or k × f64
//! fused flag      u8, fused vectors   k·n × f64 when the flag is 1
//! checksum        u64                 CRC-64/XZ of all preceding bytes
//! ```
//!
//! The file carries deployment state only: cluster membership of the
//! training rows, the component-selection rule and the ridge are training
//! metadata and are not serialized. A reloaded model therefore has empty
//! assignments, no selection tag, and a NaN ridge; its deployment behavior
//! is bit-identical to the saved model's.

use std::path::Path;

use edgc_core::corrector::{
    CenteringStats, ClusterPartition, ClusterSpace, CorrectorModel, DiscriminantSet,
    ProjectionBasis, Thresholds, WhiteningWeights,
};
use ndarray::{Array1, Array2};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"EDGC";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("not a corrector model file (bad magic)")]
    BadMagic,
    #[error("unsupported model file version {found} (this build reads version {VERSION})")]
    VersionMismatch { found: u32 },
    #[error("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("file truncated at offset {offset}: needed {needed} more bytes")]
    Truncated { offset: usize, needed: usize },
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid model data: {0}")]
    Model(#[from] edgc_core::Error),
}

pub type Result<T> = std::result::Result<T, ModelFileError>;

// CRC-64/XZ (reflected ECMA-182 polynomial).
const CRC64_POLY: u64 = 0xC96C_5795_D787_0F42;

const fn crc64_table() -> [u64; 256] {
    let mut table = [0u64; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = i as u64;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 1 == 1 {
                (crc >> 1) ^ CRC64_POLY
            } else {
                crc >> 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

static CRC64_TABLE: [u64; 256] = crc64_table();

pub fn crc64(bytes: &[u8]) -> u64 {
    let mut crc = !0u64;
    for &b in bytes {
        crc = CRC64_TABLE[((crc ^ b as u64) & 0xFF) as usize] ^ (crc >> 8);
    }
    !crc
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s<'a>(&mut self, values: impl IntoIterator<Item = &'a f64>) {
        for v in values {
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
    }
}

pub fn save_model(model: &CorrectorModel, path: &Path) -> Result<()> {
    let n = model.n_features() as u64;
    let m = model.n_components() as u64;
    let k = model.n_clusters() as u64;
    let mut w = Writer {
        buf: Vec::with_capacity(1024),
    };
    w.buf.extend_from_slice(MAGIC);
    w.u32(VERSION);
    w.u64(n);
    w.u64(m);
    w.u64(k);
    w.f64s(model.centering.centroid.iter());
    w.f64s(model.basis.components().iter());
    w.f64s(model.basis.eigenvalues().iter());
    w.f64s(model.whitening.inv_sqrt_eigenvalues.iter());
    w.buf.push(match model.clusters.space {
        ClusterSpace::Whitened => 0,
        ClusterSpace::CenteredOriginal => 1,
    });
    w.f64s(model.clusters.centroids.iter());
    w.f64s(model.discriminants.vectors.iter());
    match &model.discriminants.thresholds {
        Thresholds::Single(t) => {
            w.u64(1);
            w.f64s(std::iter::once(t));
        }
        Thresholds::PerCluster(ts) => {
            w.u64(ts.len() as u64);
            w.f64s(ts.iter());
        }
    }
    match &model.fused_vectors {
        Some(f) => {
            w.buf.push(1);
            w.f64s(f.iter());
        }
        None => w.buf.push(0),
    }
    let checksum = crc64(&w.buf);
    w.u64(checksum);
    std::fs::write(path, &w.buf)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.offset + len > self.bytes.len() {
            return Err(ModelFileError::Truncated {
                offset: self.offset,
                needed: self.offset + len - self.bytes.len(),
            });
        }
        let slice = &self.bytes[self.offset..self.offset + len];
        self.offset += len;
        Ok(slice)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64_vec(&mut self, count: usize) -> Result<Vec<f64>> {
        let raw = self.take(count * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn load_model(path: &Path) -> Result<CorrectorModel> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < MAGIC.len() + 4 {
        return Err(ModelFileError::BadMagic);
    }
    if &bytes[..4] != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(ModelFileError::VersionMismatch { found: version });
    }

    let mut cur = Cursor {
        bytes: &bytes,
        offset: 8,
    };
    let n = cur.u64()? as usize;
    let m = cur.u64()? as usize;
    let k = cur.u64()? as usize;
    const LIMIT: usize = 1 << 32;
    if n == 0 || m == 0 || k == 0 || n > LIMIT || m > LIMIT || k > LIMIT || m > n {
        return Err(ModelFileError::Malformed(format!(
            "implausible dimensions n={n}, m={m}, k={k}"
        )));
    }

    let centroid = Array1::from(cur.f64_vec(n)?);
    let basis_rows =
        Array2::from_shape_vec((m, n), cur.f64_vec(m * n)?).expect("shape matches read count");
    let eigenvalues = Array1::from(cur.f64_vec(m)?);
    let weights = Array1::from(cur.f64_vec(m)?);
    let space = match cur.u8()? {
        0 => ClusterSpace::Whitened,
        1 => ClusterSpace::CenteredOriginal,
        other => {
            return Err(ModelFileError::Malformed(format!(
                "unknown clustering-space tag {other}"
            )))
        }
    };
    let centroid_dim = match space {
        ClusterSpace::Whitened => m,
        ClusterSpace::CenteredOriginal => n,
    };
    let cluster_centroids = Array2::from_shape_vec((k, centroid_dim), cur.f64_vec(k * centroid_dim)?)
        .expect("shape matches read count");
    let vectors =
        Array2::from_shape_vec((k, m), cur.f64_vec(k * m)?).expect("shape matches read count");
    let threshold_count = cur.u64()? as usize;
    if threshold_count != 1 && threshold_count != k {
        return Err(ModelFileError::Malformed(format!(
            "threshold count {threshold_count} must be 1 or {k}"
        )));
    }
    let thresholds_raw = cur.f64_vec(threshold_count)?;
    let thresholds = if threshold_count == 1 {
        Thresholds::Single(thresholds_raw[0])
    } else {
        Thresholds::PerCluster(thresholds_raw)
    };
    let fused = match cur.u8()? {
        0 => None,
        1 => Some(
            Array2::from_shape_vec((k, n), cur.f64_vec(k * n)?)
                .expect("shape matches read count"),
        ),
        other => {
            return Err(ModelFileError::Malformed(format!(
                "unknown fused-vector flag {other}"
            )))
        }
    };
    let stored_checksum = cur.u64()?;
    if cur.offset != bytes.len() {
        return Err(ModelFileError::Malformed(format!(
            "{} trailing bytes",
            bytes.len() - cur.offset
        )));
    }
    let computed = crc64(&bytes[..bytes.len() - 8]);
    if stored_checksum != computed {
        return Err(ModelFileError::ChecksumMismatch {
            stored: stored_checksum,
            computed,
        });
    }

    let basis = ProjectionBasis::from_raw(basis_rows, eigenvalues, None)?;
    let model = CorrectorModel::from_parts(
        CenteringStats { centroid },
        basis,
        WhiteningWeights {
            inv_sqrt_eigenvalues: weights,
        },
        ClusterPartition {
            centroids: cluster_centroids,
            assignments: Vec::new(),
            space,
        },
        DiscriminantSet {
            vectors,
            thresholds,
            ridge: f64::NAN,
        },
        fused,
    )?;
    Ok(model)
}
