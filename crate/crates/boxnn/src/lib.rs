//! IO and tooling around [`boxnn_core`]: IDX dataset loading, the binary
//! model file, TOML training configs, CSV reports and the oracle-backed
//! verification suite behind `boxnn verify`.

pub mod config;
pub mod datasets;
pub mod idx;
pub mod model_file;
pub mod report;
pub mod verify;

pub use boxnn_core as core;
