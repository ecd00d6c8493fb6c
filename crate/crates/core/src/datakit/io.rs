//! Fixed binary layouts for features and labels.
//!
//! ```text
//! 0..4    magic ("FMAT" features, "LMAT" labels/masks)
//! 4..6    version, little-endian u16 (= 1)
//! 6..8    reserved, zero
//! 8..16   rows, little-endian u64
//! 16..24  cols, little-endian u64
//! 24..    payload, row-major: f32 LE for FMAT, one byte {0,1} for LMAT
//! ```
//!
//! A noise mask is stored as an LMAT file with a single column.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::{FeatureMatrix, LabelMatrix};
use crate::error::{Error, FormatError, Result};

pub(crate) const FMAT_MAGIC: [u8; 4] = *b"FMAT";
pub(crate) const LMAT_MAGIC: [u8; 4] = *b"LMAT";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 24;

fn header(magic: [u8; 4], rows: usize, cols: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(&magic);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    out
}

/// Validates the header and returns (rows, cols, payload).
fn parse(bytes: &[u8], magic: [u8; 4], elem: u64) -> std::result::Result<(usize, usize, &[u8]), FormatError> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[..4] != magic {
            let mut found = [0; 4];
            found.copy_from_slice(&bytes[..4]);
            return Err(FormatError::BadMagic {
                expected: magic,
                found,
            });
        }
        return Err(FormatError::Truncated {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let mut found = [0; 4];
    found.copy_from_slice(&bytes[..4]);
    if found != magic {
        return Err(FormatError::BadMagic {
            expected: magic,
            found,
        });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(elem))
        .filter(|&b| usize::try_from(b).is_ok())
        .ok_or(FormatError::DimensionOverflow { rows, cols })?;
    let payload = &bytes[HEADER_LEN..];
    if (payload.len() as u64) < expected {
        return Err(FormatError::Truncated {
            expected,
            found: payload.len() as u64,
        });
    }
    if (payload.len() as u64) > expected {
        return Err(FormatError::InvalidPayload(format!(
            "{} trailing bytes",
            payload.len() as u64 - expected
        )));
    }
    Ok((rows as usize, cols as usize, payload))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn save_features(matrix: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut out = header(FMAT_MAGIC, matrix.rows(), matrix.cols());
    out.reserve(matrix.as_slice().len() * 4);
    for v in matrix.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    write(path.as_ref(), &out)
}

pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let bytes = read(path)?;
    let (rows, cols, payload) = parse(&bytes, FMAT_MAGIC, 4).map_err(|e| Error::format(path, e))?;
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let values = Array2::from_shape_vec((rows, cols), data)
        .map_err(|e| Error::format(path, FormatError::InvalidPayload(e.to_string())))?;
    FeatureMatrix::new(values)
}

fn save_bytes(path: &Path, rows: usize, cols: usize, data: &[u8]) -> Result<()> {
    let mut out = header(LMAT_MAGIC, rows, cols);
    out.extend_from_slice(data);
    write(path, &out)
}

fn load_bytes(path: &Path) -> Result<Array2<u8>> {
    let bytes = read(path)?;
    let (rows, cols, payload) = parse(&bytes, LMAT_MAGIC, 1).map_err(|e| Error::format(path, e))?;
    if let Some(bad) = payload.iter().find(|&&b| b > 1) {
        return Err(Error::format(
            path,
            FormatError::InvalidPayload(format!("label byte {bad} is not 0 or 1")),
        ));
    }
    Array2::from_shape_vec((rows, cols), payload.to_vec())
        .map_err(|e| Error::format(path, FormatError::InvalidPayload(e.to_string())))
}

pub fn save_labels(labels: &LabelMatrix, path: impl AsRef<Path>) -> Result<()> {
    save_bytes(
        path.as_ref(),
        labels.rows(),
        labels.class_count(),
        labels.as_slice(),
    )
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelMatrix> {
    LabelMatrix::new(load_bytes(path.as_ref())?)
}

pub fn save_mask(mask: &[bool], path: impl AsRef<Path>) -> Result<()> {
    let data: Vec<u8> = mask.iter().map(|&b| u8::from(b)).collect();
    save_bytes(path.as_ref(), mask.len(), 1, &data)
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<Vec<bool>> {
    let path = path.as_ref();
    let values = load_bytes(path)?;
    if values.ncols() != 1 {
        return Err(Error::format(
            path,
            FormatError::InvalidPayload(format!("mask must have one column, found {}", values.ncols())),
        ));
    }
    Ok(values.iter().map(|&b| b == 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn features_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.fmat");
        let m = FeatureMatrix::from_vec(5, 3, (0..15).map(|i| i as f32 * 0.37 - 2.0).collect()).unwrap();
        save_features(&m, &path).unwrap();
        assert_eq!(load_features(&path).unwrap(), m);
    }

    #[test]
    fn header_bytes_are_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.fmat");
        let m = FeatureMatrix::from_vec(1, 2, vec![1.0, -2.5]).unwrap();
        save_features(&m, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..8], &[0x46, 0x4D, 0x41, 0x54, 0x01, 0x00, 0x00, 0x00]);
        assert_eq!(&bytes[8..16], &1u64.to_le_bytes());
        assert_eq!(&bytes[16..24], &2u64.to_le_bytes());
        assert_eq!(&bytes[24..28], &1.0f32.to_le_bytes());
        assert_eq!(bytes.len(), 32);
    }

    #[test]
    fn bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.fmat");
        let m = FeatureMatrix::from_vec(2, 2, vec![0.0; 4]).unwrap();
        save_features(&m, &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[0] = b'X';
        fs::write(&path, &bytes).unwrap();
        let err = load_features(&path).unwrap_err();
        assert!(matches!(
            err,
            Error::Format {
                source: FormatError::BadMagic { .. },
                ..
            }
        ));
        assert!(err.to_string().contains("bad magic"));
    }

    #[test]
    fn truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.fmat");
        // header claims 10 rows, payload carries 9
        let mut bytes = header(FMAT_MAGIC, 10, 1);
        for i in 0..9 {
            bytes.extend_from_slice(&(i as f32).to_le_bytes());
        }
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_features(&path),
            Err(Error::Format {
                source: FormatError::Truncated {
                    expected: 40,
                    found: 36
                },
                ..
            })
        ));
    }

    #[test]
    fn dimension_overflow() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.fmat");
        fs::write(&path, header(FMAT_MAGIC, u64::MAX as usize, 2)).unwrap();
        assert!(matches!(
            load_features(&path),
            Err(Error::Format {
                source: FormatError::DimensionOverflow { .. },
                ..
            })
        ));
    }

    #[test]
    fn labels_and_mask_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let labels = LabelMatrix::new(array![[0u8, 1, 0], [1, 0, 1]]).unwrap();
        save_labels(&labels, dir.path().join("y")).unwrap();
        assert_eq!(load_labels(dir.path().join("y")).unwrap(), labels);
        let mask = vec![true, false, false, true];
        save_mask(&mask, dir.path().join("m")).unwrap();
        assert_eq!(load_mask(dir.path().join("m")).unwrap(), mask);
    }

    #[test]
    fn label_file_rejects_feature_magic() {
        let dir = tempfile::tempdir().unwrap();
        let m = FeatureMatrix::from_vec(1, 1, vec![0.0]).unwrap();
        save_features(&m, dir.path().join("x")).unwrap();
        assert!(load_labels(dir.path().join("x")).is_err());
    }
}
