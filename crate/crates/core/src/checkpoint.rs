//! Checkpoint file: hash-function parameters plus the fixed hash centers.
//!
//! ```text
//! 0..4   magic "RSHN"
//! 4..6   version, LE u16 (= 1)
//! 6..8   parameter element width in bytes, LE u16 (= 8, IEEE-754 binary64)
//! then   M, dims[0..M], H, L, K as LE u64
//! then   centers, K*L signed bytes (+1/-1), row-major
//! then   per modality: W1 (d x H), b1 (H), W2 (H x L), b2 (L), LE floats
//! ```

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::encoder::{HashCenters, HashEncoderParams, ModalityParams};
use crate::error::{Error, FormatError, Result};

const MAGIC: [u8; 4] = *b"RSHN";
const VERSION: u16 = 1;
const ELEM_WIDTH: u16 = 8;

/// Writes atomically: the file appears under `path` only once complete.
pub fn save_checkpoint(
    params: &HashEncoderParams,
    centers: &HashCenters,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    if centers.code_length() != params.code_length {
        return Err(Error::Shape(format!(
            "centers have length {}, encoder emits {}",
            centers.code_length(),
            params.code_length
        )));
    }
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&ELEM_WIDTH.to_le_bytes());
    let mut put = |v: usize| out.extend_from_slice(&(v as u64).to_le_bytes());
    put(params.modalities.len());
    for d in params.dims() {
        put(d);
    }
    put(params.hidden_dim);
    put(params.code_length);
    put(centers.class_count());
    out.extend(centers.view().iter().map(|&c| (c as i8) as u8));
    for s in params.slices() {
        for v in s {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }

    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &out).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], FormatError> {
        let end =
            self.pos
                .checked_add(n)
                .filter(|&e| e <= self.bytes.len())
                .ok_or(FormatError::Truncated {
                    expected: (self.pos as u64).saturating_add(n as u64),
                    found: self.bytes.len() as u64,
                })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> std::result::Result<usize, FormatError> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| FormatError::DimensionOverflow { rows: v, cols: 1 })
    }

    fn floats(&mut self, rows: usize, cols: usize) -> std::result::Result<Vec<f64>, FormatError> {
        let n = rows
            .checked_mul(cols)
            .filter(|n| n.checked_mul(8).is_some())
            .ok_or(FormatError::DimensionOverflow {
                rows: rows as u64,
                cols: cols as u64,
            })?;
        Ok(self
            .take(n * 8)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn parse(bytes: &[u8]) -> std::result::Result<(Vec<ModalityParams>, Array2<f64>), FormatError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4).map_err(|_| {
        let mut found = [0; 4];
        found[..bytes.len().min(4)].copy_from_slice(&bytes[..bytes.len().min(4)]);
        FormatError::BadMagic {
            expected: MAGIC,
            found,
        }
    })?;
    if magic != MAGIC {
        let mut found = [0; 4];
        found.copy_from_slice(magic);
        return Err(FormatError::BadMagic {
            expected: MAGIC,
            found,
        });
    }
    let version = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let width = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
    if width != ELEM_WIDTH {
        return Err(FormatError::InvalidPayload(format!(
            "unsupported element width {width}"
        )));
    }
    let m = r.u64()?;
    if m == 0 || m > 1024 {
        return Err(FormatError::InvalidPayload(format!(
            "implausible modality count {m}"
        )));
    }
    let dims = (0..m)
        .map(|_| r.u64())
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let (h, l, k) = (r.u64()?, r.u64()?, r.u64()?);
    let kl = k.checked_mul(l).ok_or(FormatError::DimensionOverflow {
        rows: k as u64,
        cols: l as u64,
    })?;
    let centers: Vec<f64> = r
        .take(kl)?
        .iter()
        .map(|&b| match b as i8 {
            1 => Ok(1.0),
            -1 => Ok(-1.0),
            other => Err(FormatError::InvalidPayload(format!("center entry {other}"))),
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut modalities = Vec::with_capacity(m);
    for d in dims {
        let w1 = r.floats(d, h)?;
        let b1 = r.floats(1, h)?;
        let w2 = r.floats(h, l)?;
        let b2 = r.floats(1, l)?;
        modalities.push(ModalityParams {
            w1: Array2::from_shape_vec((d, h), w1).expect("sized"),
            b1: Array1::from(b1),
            w2: Array2::from_shape_vec((h, l), w2).expect("sized"),
            b2: Array1::from(b2),
        });
    }
    if r.pos != bytes.len() {
        return Err(FormatError::InvalidPayload(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok((
        modalities,
        Array2::from_shape_vec((k, l), centers).expect("sized"),
    ))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(HashEncoderParams, HashCenters)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (modalities, centers) = parse(&bytes).map_err(|e| Error::format(path, e))?;
    Ok((
        HashEncoderParams::from_modalities(modalities)?,
        HashCenters::new(centers)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{init_centers, init_params};

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let params = init_params(&[5, 3], 7, 4, 1).unwrap();
        let centers = init_centers(3, 4, 2).unwrap();
        save_checkpoint(&params, &centers, &path).unwrap();
        let (p, c) = load_checkpoint(&path).unwrap();
        assert_eq!(p, params);
        assert_eq!(c, centers);
        assert!(!path.with_extension("tmp").exists());
    }

    #[test]
    fn corrupt_magic_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let params = init_params(&[2, 2], 3, 2, 1).unwrap();
        let centers = init_centers(2, 2, 2).unwrap();
        save_checkpoint(&params, &centers, &path).unwrap();
        let good = fs::read(&path).unwrap();

        let mut bad = good.clone();
        bad[1] = b'?';
        fs::write(&path, &bad).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(Error::Format {
                source: FormatError::BadMagic { .. },
                ..
            })
        ));

        fs::write(&path, &good[..good.len() - 3]).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(Error::Format {
                source: FormatError::Truncated { .. },
                ..
            })
        ));

        let mut wrong_version = good;
        wrong_version[4] = 9;
        fs::write(&path, &wrong_version).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(Error::Format {
                source: FormatError::UnsupportedVersion(9),
                ..
            })
        ));
    }
}
