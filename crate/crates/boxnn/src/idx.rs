//! IDX files as distributed for MNIST and Fashion-MNIST.
//!
//! Images: big-endian `u32` magic `0x00000803`, then `count`, `rows`, `cols`,
//! then `count * rows * cols` unsigned bytes. Labels: magic `0x00000801`,
//! `count`, then `count` bytes. Pixels are divided by 255 and each image is
//! flattened row-major, so coordinate `r * cols + c` is pixel `(r, c)`.

use std::fs;
use std::io::{self, Cursor, Write};
use std::path::Path;

use boxnn_core::Dataset;
use byteorder::{BigEndian, ReadBytesExt, WriteBytesExt};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, thiserror::Error)]
pub enum IdxError {
    #[error("{path}: bad magic {found:#010x}, expected {expected:#010x}")]
    BadMagic {
        path: String,
        expected: u32,
        found: u32,
    },

    #[error(
        "{path}: truncated, header promises {expected} bytes of payload but {found} are present"
    )]
    Truncated {
        path: String,
        expected: usize,
        found: usize,
    },

    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },

    #[error(transparent)]
    Dataset(#[from] boxnn_core::Error),
}

/// Raw image payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

fn read_file(path: &Path) -> Result<Vec<u8>, IdxError> {
    fs::read(path).map_err(|source| IdxError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn header(cur: &mut Cursor<&[u8]>, name: &str, words: usize) -> Result<Vec<u32>, IdxError> {
    let mut out = Vec::with_capacity(words);
    for _ in 0..words {
        let v = cur
            .read_u32::<BigEndian>()
            .map_err(|_| IdxError::Truncated {
                path: name.to_string(),
                expected: 4 * words,
                found: cur.get_ref().len(),
            })?;
        out.push(v);
    }
    Ok(out)
}

fn check_magic(name: &str, expected: u32, found: u32) -> Result<(), IdxError> {
    if found != expected {
        return Err(IdxError::BadMagic {
            path: name.to_string(),
            expected,
            found,
        });
    }
    Ok(())
}

pub fn parse_images(bytes: &[u8], name: &str) -> Result<IdxImages, IdxError> {
    let mut cur = Cursor::new(bytes);
    let magic = header(&mut cur, name, 1)?[0];
    check_magic(name, IMAGES_MAGIC, magic)?;
    let dims = header(&mut cur, name, 3)?;
    let (count, rows, cols) = (dims[0] as usize, dims[1] as usize, dims[2] as usize);
    let body = &bytes[cur.position() as usize..];
    let expected = count.checked_mul(rows).and_then(|v| v.checked_mul(cols));
    let Some(expected) = expected.filter(|&e| e <= body.len()) else {
        return Err(IdxError::Truncated {
            path: name.to_string(),
            expected: expected.unwrap_or(usize::MAX),
            found: body.len(),
        });
    };
    let pixels = body[..expected].to_vec();
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_labels(bytes: &[u8], name: &str) -> Result<Vec<u8>, IdxError> {
    let mut cur = Cursor::new(bytes);
    let magic = header(&mut cur, name, 1)?[0];
    check_magic(name, LABELS_MAGIC, magic)?;
    let count = header(&mut cur, name, 1)?[0] as usize;
    let body = &bytes[cur.position() as usize..];
    if body.len() < count {
        return Err(IdxError::Truncated {
            path: name.to_string(),
            expected: count,
            found: body.len(),
        });
    }
    Ok(body[..count].to_vec())
}

/// Builds a dataset from parsed IDX payloads. The class count is one more
/// than the largest label present.
pub fn to_dataset(images: &IdxImages, labels: &[u8]) -> Result<Dataset, IdxError> {
    if images.count != labels.len() {
        return Err(IdxError::CountMismatch {
            images: images.count,
            labels: labels.len(),
        });
    }
    let dim = images.rows * images.cols;
    let pixels = images
        .pixels
        .iter()
        .map(|&p| f64::from(p) / 255.0)
        .collect();
    let labels: Vec<usize> = labels.iter().map(|&y| usize::from(y)).collect();
    let classes = labels.iter().max().map_or(1, |m| m + 1);
    Ok(Dataset::new(pixels, labels, dim, classes)?)
}

pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<Dataset, IdxError> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let images = parse_images(&read_file(ip)?, &ip.display().to_string())?;
    let labels = parse_labels(&read_file(lp)?, &lp.display().to_string())?;
    to_dataset(&images, &labels)
}

pub fn encode_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [
        IMAGES_MAGIC,
        images.count as u32,
        images.rows as u32,
        images.cols as u32,
    ] {
        out.write_u32::<BigEndian>(v).expect("vec write");
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.write_u32::<BigEndian>(LABELS_MAGIC).expect("vec write");
    out.write_u32::<BigEndian>(labels.len() as u32)
        .expect("vec write");
    out.extend_from_slice(labels);
    out
}

/// Writes a dataset as a pair of IDX files with images shaped `rows x cols`.
/// Pixels are rounded to the nearest multiple of 1/255.
pub fn write_idx(
    dataset: &Dataset,
    rows: usize,
    cols: usize,
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<(), IdxError> {
    assert_eq!(
        rows * cols,
        dataset.dim(),
        "image shape must match dataset dimension"
    );
    let images = IdxImages {
        count: dataset.len(),
        rows,
        cols,
        pixels: dataset
            .pixels()
            .iter()
            .map(|&p| (p * 255.0).round() as u8)
            .collect(),
    };
    let labels: Vec<u8> = dataset.labels().iter().map(|&y| y as u8).collect();
    for (path, bytes) in [
        (images_path.as_ref(), encode_images(&images)),
        (labels_path.as_ref(), encode_labels(&labels)),
    ] {
        fs::File::create(path)
            .and_then(|mut f| f.write_all(&bytes))
            .map_err(|source| IdxError::Io {
                path: path.display().to_string(),
                source,
            })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (Vec<u8>, Vec<u8>) {
        let images = IdxImages {
            count: 2,
            rows: 2,
            cols: 2,
            pixels: vec![0, 128, 255, 64, 1, 2, 3, 4],
        };
        (encode_images(&images), encode_labels(&[7, 1]))
    }

    #[test]
    fn divides_by_255() {
        let (img, lab) = fixture();
        let d = to_dataset(
            &parse_images(&img, "img").unwrap(),
            &parse_labels(&lab, "lab").unwrap(),
        )
        .unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.dim(), 4);
        assert_eq!(d.num_classes(), 8);
        assert_eq!(d.row(0), &[0.0, 128.0 / 255.0, 1.0, 64.0 / 255.0]);
        assert_eq!(d.labels(), &[7, 1]);
    }

    #[test]
    fn swapped_magic_is_rejected() {
        let (img, lab) = fixture();
        assert!(matches!(
            parse_labels(&img, "x"),
            Err(IdxError::BadMagic {
                found: IMAGES_MAGIC,
                ..
            })
        ));
        assert!(matches!(
            parse_images(&lab, "x"),
            Err(IdxError::BadMagic {
                found: LABELS_MAGIC,
                ..
            })
        ));
    }

    #[test]
    fn truncation_is_reported() {
        let (img, lab) = fixture();
        assert!(matches!(
            parse_images(&img[..img.len() - 1], "x"),
            Err(IdxError::Truncated { .. })
        ));
        assert!(matches!(
            parse_images(&img[..10], "x"),
            Err(IdxError::Truncated { .. })
        ));
        assert!(matches!(
            parse_labels(&lab[..9], "x"),
            Err(IdxError::Truncated { .. })
        ));
    }

    #[test]
    fn count_mismatch_is_reported() {
        let (img, _) = fixture();
        let err = to_dataset(&parse_images(&img, "x").unwrap(), &[1, 2, 3]).unwrap_err();
        assert!(matches!(
            err,
            IdxError::CountMismatch {
                images: 2,
                labels: 3
            }
        ));
    }
}
