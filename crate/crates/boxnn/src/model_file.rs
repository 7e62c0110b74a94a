//! Versioned binary model file.
//!
//! All integers and floats are little-endian; floats are IEEE-754 doubles
//! written bit for bit, so a save/load round trip is exact.
//!
//! ```text
//! magic        8 bytes  "BOXNNMDL"
//! version      u32      1
//! dim          u32      n
//! classes      u32      K
//! boxes        u32      M
//! has_config   u8       0 or 1
//! [config]     u64 boxes, f64 tau, f64 clip, f64 lr, u64 epochs,
//!              u64 batch_size, u64 seed, f64 init_halfwidth, u8 stratified
//! M rows of    u32 label, n x f64 lower, n x f64 upper
//! ```

use std::fs;
use std::io::{self, Cursor, Read, Write};
use std::path::Path;

use boxnn_core::{BoxModel, BoxRegion, TrainConfig};
use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

pub const MAGIC: &[u8; 8] = b"BOXNNMDL";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("not a box model file (bad magic)")]
    BadMagic,
    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),
    #[error("model file is truncated or malformed: {0}")]
    Malformed(#[from] io::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("invalid model contents: {0}")]
    Invalid(#[from] boxnn_core::Error),
}

/// A model together with the configuration that trained it, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: BoxModel,
    pub config: Option<TrainConfig>,
}

pub fn encode(file: &ModelFile) -> Vec<u8> {
    let model = &file.model;
    let mut out = Vec::with_capacity(64 + model.len() * (4 + 16 * model.dim()));
    let w = &mut out;
    w.write_all(MAGIC).unwrap();
    w.write_u32::<LE>(VERSION).unwrap();
    w.write_u32::<LE>(model.dim() as u32).unwrap();
    w.write_u32::<LE>(model.num_classes() as u32).unwrap();
    w.write_u32::<LE>(model.len() as u32).unwrap();
    match &file.config {
        None => w.write_u8(0).unwrap(),
        Some(c) => {
            w.write_u8(1).unwrap();
            w.write_u64::<LE>(c.boxes as u64).unwrap();
            w.write_f64::<LE>(c.tau).unwrap();
            w.write_f64::<LE>(c.clip).unwrap();
            w.write_f64::<LE>(c.lr).unwrap();
            w.write_u64::<LE>(c.epochs as u64).unwrap();
            w.write_u64::<LE>(c.batch_size as u64).unwrap();
            w.write_u64::<LE>(c.seed).unwrap();
            w.write_f64::<LE>(c.init_halfwidth).unwrap();
            w.write_u8(u8::from(c.stratified)).unwrap();
        }
    }
    for b in model.boxes() {
        w.write_u32::<LE>(b.label() as u32).unwrap();
        for &v in b.lower().iter().chain(b.upper()) {
            w.write_f64::<LE>(v).unwrap();
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<ModelFile, ModelFileError> {
    let mut r = Cursor::new(bytes);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| ModelFileError::BadMagic)?;
    if &magic != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    let version = r.read_u32::<LE>()?;
    if version != VERSION {
        return Err(ModelFileError::UnsupportedVersion(version));
    }
    let dim = r.read_u32::<LE>()? as usize;
    let classes = r.read_u32::<LE>()? as usize;
    let count = r.read_u32::<LE>()? as usize;
    let config = match r.read_u8()? {
        0 => None,
        1 => Some(TrainConfig {
            boxes: r.read_u64::<LE>()? as usize,
            tau: r.read_f64::<LE>()?,
            clip: r.read_f64::<LE>()?,
            lr: r.read_f64::<LE>()?,
            epochs: r.read_u64::<LE>()? as usize,
            batch_size: r.read_u64::<LE>()? as usize,
            seed: r.read_u64::<LE>()?,
            init_halfwidth: r.read_f64::<LE>()?,
            stratified: r.read_u8()? != 0,
        }),
        other => {
            return Err(ModelFileError::Malformed(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("config flag {other}"),
            )))
        }
    };
    // Check the declared size against the payload before allocating anything.
    let row = dim.checked_mul(16).and_then(|v| v.checked_add(4));
    let need = row.and_then(|row| row.checked_mul(count));
    let left = bytes.len() - r.position() as usize;
    if need != Some(left) {
        return Err(ModelFileError::Malformed(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("header declares {count} boxes of dimension {dim} but {left} bytes follow"),
        )));
    }
    let mut boxes = Vec::with_capacity(count);
    for _ in 0..count {
        let label = r.read_u32::<LE>()? as usize;
        let mut lower = vec![0.0; dim];
        let mut upper = vec![0.0; dim];
        r.read_f64_into::<LE>(&mut lower)?;
        r.read_f64_into::<LE>(&mut upper)?;
        boxes.push(BoxRegion::new(lower, upper, label)?);
    }
    if (r.position() as usize) != bytes.len() {
        return Err(ModelFileError::Malformed(io::Error::new(
            io::ErrorKind::InvalidData,
            "trailing bytes",
        )));
    }
    let model = BoxModel::new(boxes, classes)?;
    if model.dim() != dim {
        return Err(ModelFileError::Malformed(io::Error::new(
            io::ErrorKind::InvalidData,
            "dimension mismatch",
        )));
    }
    Ok(ModelFile { model, config })
}

pub fn save(file: &ModelFile, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
    let path = path.as_ref();
    fs::write(path, encode(file)).map_err(|source| ModelFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load(path: impl AsRef<Path>) -> Result<ModelFile, ModelFileError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| ModelFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ModelFile {
        let boxes = vec![
            BoxRegion::new(vec![-0.1, 0.2], vec![0.3, 0.2], 0).unwrap(),
            BoxRegion::new(vec![0.1 + 0.2, 0.5], vec![1.7, 0.9], 2).unwrap(),
        ];
        ModelFile {
            model: BoxModel::new(boxes, 3).unwrap(),
            config: Some(TrainConfig::default()),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let f = sample();
        let bytes = encode(&f);
        assert_eq!(decode(&bytes).unwrap(), f);
        assert_eq!(encode(&decode(&bytes).unwrap()), bytes);
        let bare = ModelFile { config: None, ..f };
        assert_eq!(decode(&encode(&bare)).unwrap(), bare);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = encode(&sample());
        assert!(matches!(
            decode(b"NOTAMODEL..."),
            Err(ModelFileError::BadMagic)
        ));
        assert!(matches!(
            decode(&bytes[..bytes.len() - 3]),
            Err(ModelFileError::Malformed(_))
        ));
        let mut versioned = bytes.clone();
        versioned[8] = 9;
        assert!(matches!(
            decode(&versioned),
            Err(ModelFileError::UnsupportedVersion(9))
        ));
        let mut extra = bytes;
        extra.push(0);
        assert!(matches!(decode(&extra), Err(ModelFileError::Malformed(_))));
    }
}
