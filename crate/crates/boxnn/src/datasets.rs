//! Where datasets live on disk.
//!
//! A data directory holds one subdirectory per dataset, each with the four
//! standard IDX files: `train-images-idx3-ubyte`, `train-labels-idx1-ubyte`,
//! `t10k-images-idx3-ubyte`, `t10k-labels-idx1-ubyte`.

use std::path::{Path, PathBuf};

use boxnn_core::Dataset;

use crate::idx::{load_idx, IdxError};

pub const DATA_DIR_ENV: &str = "BOXNN_DATA_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn prefix(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "t10k",
        }
    }
}

/// Explicit path, else `$BOXNN_DATA_DIR`, else `./data`.
pub fn resolve_data_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"))
}

pub fn split_paths(root: &Path, dataset: &str, split: Split) -> (PathBuf, PathBuf) {
    let dir = root.join(dataset);
    (
        dir.join(format!("{}-images-idx3-ubyte", split.prefix())),
        dir.join(format!("{}-labels-idx1-ubyte", split.prefix())),
    )
}

pub fn load_split(root: &Path, dataset: &str, split: Split) -> Result<Dataset, IdxError> {
    let (images, labels) = split_paths(root, dataset, split);
    load_idx(images, labels)
}
