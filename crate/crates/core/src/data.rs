//! IDX dataset ingestion and binary-pair filtering.
//!
//! Parses the big-endian IDX format MNIST and Fashion-MNIST ship in,
//! transparently handling gzip by sniffing the two magic bytes. Pixels are
//! scaled to [0, 1]; labels keep their original class indices until a pair
//! filter remaps the chosen two classes to {0, 1}.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use flate2::read::GzDecoder;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const PIXELS: usize = 784;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetId {
    Mnist,
    FashionMnist,
}

impl std::fmt::Display for DatasetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DatasetId::Mnist => write!(f, "mnist"),
            DatasetId::FashionMnist => write!(f, "fashion"),
        }
    }
}

/// Canonical Fashion-MNIST class indices for the classes used here.
pub mod fashion_class {
    pub const T_SHIRT: u8 = 0;
    pub const TROUSER: u8 = 1;
    pub const DRESS: u8 = 3;
    pub const SANDAL: u8 = 5;
    pub const ANKLE_BOOT: u8 = 9;
}

#[derive(Clone, Debug)]
pub struct LabeledImageSet {
    /// m×784 pixel rows in [0, 1].
    pub images: Matrix,
    pub labels: Vec<u8>,
}

impl LabeledImageSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// A two-class subset with labels remapped to 0 (class `a`) and 1 (class
/// `b`); label 1 is the positive class everywhere downstream.
#[derive(Clone, Debug)]
pub struct BinaryPairSet {
    pub images: Matrix,
    pub labels: Vec<u8>,
    pub class_a: u8,
    pub class_b: u8,
}

impl BinaryPairSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn open_maybe_gz(path: &Path) -> Result<Box<dyn Read>> {
    let mut file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut sniff = [0u8; 2];
    use std::io::Seek;
    let n = file
        .read(&mut sniff)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    file.rewind()
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    if n == 2 && sniff == [0x1f, 0x8b] {
        Ok(Box::new(GzDecoder::new(BufReader::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

fn read_u32_be(reader: &mut dyn Read, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    reader
        .read_exact(&mut buf)
        .map_err(|_| Error::IdxTruncated(path.display().to_string()))?;
    Ok(u32::from_be_bytes(buf))
}

/// Parse an IDX image/label file pair into an image set.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<LabeledImageSet> {
    let mut ir = open_maybe_gz(images_path)?;
    let magic = read_u32_be(&mut ir, images_path)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::IdxMagic {
            path: images_path.display().to_string(),
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let m = read_u32_be(&mut ir, images_path)? as usize;
    let rows = read_u32_be(&mut ir, images_path)? as usize;
    let cols = read_u32_be(&mut ir, images_path)? as usize;
    if rows != 28 || cols != 28 {
        return Err(Error::Validation(format!(
            "expected 28x28 images, found {rows}x{cols} in {}",
            images_path.display()
        )));
    }
    let mut raw = vec![0u8; m * PIXELS];
    ir.read_exact(&mut raw)
        .map_err(|_| Error::IdxTruncated(images_path.display().to_string()))?;
    let pixels: Vec<f64> = raw.iter().map(|&b| b as f64 / 255.0).collect();
    let images = Matrix::from_vec(m, PIXELS, pixels)?;

    let mut lr = open_maybe_gz(labels_path)?;
    let magic = read_u32_be(&mut lr, labels_path)?;
    if magic != LABEL_MAGIC {
        return Err(Error::IdxMagic {
            path: labels_path.display().to_string(),
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let m_labels = read_u32_be(&mut lr, labels_path)? as usize;
    if m_labels != m {
        return Err(Error::IdxCountMismatch {
            images: m,
            labels: m_labels,
        });
    }
    let mut labels = vec![0u8; m_labels];
    lr.read_exact(&mut labels)
        .map_err(|_| Error::IdxTruncated(labels_path.display().to_string()))?;

    Ok(LabeledImageSet { images, labels })
}

/// Keep only classes `a` and `b`, in their original order, remapping
/// `a → 0` and `b → 1`.
pub fn filter_pair(set: &LabeledImageSet, a: u8, b: u8) -> Result<BinaryPairSet> {
    if a == b {
        return Err(Error::Validation(format!(
            "pair needs two classes, got {a} twice"
        )));
    }
    let mut images = Vec::new();
    let mut labels = Vec::new();
    let (mut seen_a, mut seen_b) = (false, false);
    for (i, &label) in set.labels.iter().enumerate() {
        if label == a || label == b {
            images.push(set.images.row(i).to_vec());
            labels.push(if label == a {
                seen_a = true;
                0
            } else {
                seen_b = true;
                1
            });
        }
    }
    if !seen_a || !seen_b {
        let missing = if seen_a { b } else { a };
        return Err(Error::Degenerate(format!(
            "class {missing} absent from the dataset"
        )));
    }
    Ok(BinaryPairSet {
        images: Matrix::from_rows(&images)?,
        labels,
        class_a: a,
        class_b: b,
    })
}

/// Writers for round-trip fixtures and synthetic pipelines.
pub fn write_idx_images(path: &Path, images: &[Vec<u8>]) -> Result<()> {
    use std::io::Write;
    let mut out = Vec::new();
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&28u32.to_be_bytes());
    out.extend_from_slice(&28u32.to_be_bytes());
    for img in images {
        out.extend_from_slice(img);
    }
    let mut f = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(&out)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    use std::io::Write;
    let mut out = Vec::new();
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    let mut f = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(&out)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Standard file names within a dataset directory.
pub fn idx_paths(dir: &Path, train: bool) -> (std::path::PathBuf, std::path::PathBuf) {
    let prefix = if train { "train" } else { "t10k" };
    let images = dir.join(format!("{prefix}-images-idx3-ubyte.gz"));
    let labels = dir.join(format!("{prefix}-labels-idx1-ubyte.gz"));
    if images.exists() && labels.exists() {
        return (images, labels);
    }
    (
        dir.join(format!("{prefix}-images-idx3-ubyte")),
        dir.join(format!("{prefix}-labels-idx1-ubyte")),
    )
}
