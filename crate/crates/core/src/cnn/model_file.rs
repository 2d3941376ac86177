//! Trained CNN bundled with its input standardization, and its binary file.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic        8 bytes  "CSDACNN\0"
//! version      u32
//! input_len, filters, kernel, hidden, classes   5 × u32
//! std mean, std std                              2 × f64
//! epochs, batch_size u32 ×2, learning_rate f64, seed u64
//! 6 × (u64 element count, then that many f64)   declared block order
//! ```

use std::fs;
use std::path::Path;

use crate::dataset::{Label, Standardizer};
use crate::error::{Error, Result};

use super::network::{argmax, Architecture, CnnParams};
use super::train::TrainConfig;

pub const MODEL_MAGIC: [u8; 8] = *b"CSDACNN\0";
pub const MODEL_VERSION: u32 = 1;

/// Windows per forward pass during batched inference.
const PREDICT_BATCH: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    pub params: CnnParams,
    pub standardizer: Standardizer,
    pub train_config: TrainConfig,
}

impl CnnModel {
    pub fn arch(&self) -> Architecture {
        self.params.arch
    }

    /// Class and probabilities for a raw (unstandardized) window. Exact
    /// probability ties resolve to class 0.
    pub fn predict_raw(&self, window: &[f64]) -> Result<(Label, Vec<f64>)> {
        let x = self.standardizer.apply(window);
        let p = self.params.predict_proba(&[&x])?.remove(0);
        Ok((Label::from_class_index(argmax(&p)), p))
    }

    pub fn predict_batch_raw(&self, windows: &[&[f64]]) -> Result<Vec<Label>> {
        let mut out = Vec::with_capacity(windows.len());
        for chunk in windows.chunks(PREDICT_BATCH) {
            let scaled: Vec<Vec<f64>> = chunk.iter().map(|w| self.standardizer.apply(w)).collect();
            let refs: Vec<&[f64]> = scaled.iter().map(Vec::as_slice).collect();
            for p in self.params.predict_proba(&refs)? {
                out.push(Label::from_class_index(argmax(&p)));
            }
        }
        Ok(out)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let a = self.params.arch;
        let mut out = Vec::with_capacity(128 + a.param_count() * 8);
        out.extend_from_slice(&MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        for dim in [a.input_len, a.filters, a.kernel, a.hidden, a.classes] {
            out.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.standardizer.mean.to_le_bytes());
        out.extend_from_slice(&self.standardizer.std.to_le_bytes());
        let c = &self.train_config;
        out.extend_from_slice(&(c.epochs as u32).to_le_bytes());
        out.extend_from_slice(&(c.batch_size as u32).to_le_bytes());
        out.extend_from_slice(&c.learning_rate.to_le_bytes());
        out.extend_from_slice(&c.seed.to_le_bytes());
        for block in self.params.blocks() {
            out.extend_from_slice(&(block.len() as u64).to_le_bytes());
            for v in block.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0, path };
        if r.take(8)? != MODEL_MAGIC {
            return Err(Error::Malformed {
                what: "CNN model",
                path: path.to_path_buf(),
                detail: "bad magic bytes".into(),
            });
        }
        let version = r.u32()?;
        if version != MODEL_VERSION {
            return Err(Error::VersionMismatch {
                path: path.to_path_buf(),
                expected: MODEL_VERSION,
                found: version,
            });
        }
        let arch = Architecture {
            input_len: r.u32()? as usize,
            filters: r.u32()? as usize,
            kernel: r.u32()? as usize,
            hidden: r.u32()? as usize,
            classes: r.u32()? as usize,
        };
        arch.validate()?;
        let standardizer = Standardizer {
            mean: r.f64()?,
            std: r.f64()?,
        };
        let train_config = TrainConfig {
            epochs: r.u32()? as usize,
            batch_size: r.u32()? as usize,
            learning_rate: r.f64()?,
            seed: r.u64()?,
        };
        let mut blocks = Vec::with_capacity(6);
        for shape in arch.block_shapes() {
            let expected: usize = shape.iter().product();
            let count = r.u64()? as usize;
            if count != expected {
                return Err(Error::Inconsistent {
                    path: path.to_path_buf(),
                    detail: format!("parameter block of shape {shape:?} declares {count} values"),
                });
            }
            let raw = r.take(count * 8)?;
            blocks.push(
                raw.chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                    .collect(),
            );
        }
        if r.pos != bytes.len() {
            return Err(Error::Inconsistent {
                path: path.to_path_buf(),
                detail: format!("{} trailing bytes after the last block", bytes.len() - r.pos),
            });
        }
        Ok(Self {
            params: CnnParams::from_blocks(arch, blocks)?,
            standardizer,
            train_config,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(Error::TruncatedPayload {
                path: self.path.to_path_buf(),
                detail: format!("needed {n} bytes at offset {}, file has {}", self.pos, self.bytes.len()),
            });
        };
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> CnnModel {
        let arch = Architecture {
            input_len: 12,
            filters: 3,
            kernel: 5,
            hidden: 4,
            classes: 2,
        };
        CnnModel {
            params: CnnParams::init_uniform(arch, 17).unwrap(),
            standardizer: Standardizer { mean: -1.25, std: 3.5 },
            train_config: TrainConfig {
                epochs: 3,
                batch_size: 8,
                learning_rate: 5e-4,
                seed: 17,
            },
        }
    }

    #[test]
    fn bytes_round_trip() {
        let m = model();
        let back = CnnModel::from_bytes(&m.to_bytes(), Path::new("mem")).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = model().to_bytes();
        let p = Path::new("mem");
        assert!(matches!(
            CnnModel::from_bytes(&bytes[..bytes.len() - 1], p),
            Err(Error::TruncatedPayload { .. })
        ));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(CnnModel::from_bytes(&extra, p), Err(Error::Inconsistent { .. })));
        let mut wrong_version = bytes.clone();
        wrong_version[8] = 7;
        assert!(matches!(
            CnnModel::from_bytes(&wrong_version, p),
            Err(Error::VersionMismatch { found: 7, .. })
        ));
        let mut bad_magic = bytes;
        bad_magic[0] = b'X';
        assert!(matches!(CnnModel::from_bytes(&bad_magic, p), Err(Error::Malformed { .. })));
    }

    #[test]
    fn raw_prediction_standardizes_first() {
        let m = model();
        let raw: Vec<f64> = (0..12).map(|i| i as f64 * 0.7 - 3.0).collect();
        let scaled = m.standardizer.apply(&raw);
        let (label, p) = m.predict_raw(&raw).unwrap();
        let direct = m.params.predict_proba(&[&scaled]).unwrap().remove(0);
        assert_eq!(p, direct);
        assert_eq!(label.class_index(), argmax(&direct));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(m.predict_batch_raw(&[&raw, &raw]).unwrap(), vec![label, label]);
        assert!(m.predict_raw(&raw[..11]).is_err());
    }
}
