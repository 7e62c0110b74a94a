//! Nearest-box classification under the `l0` distance.
//!
//! A [`BoxModel`] is an ordered set of labeled axis-aligned boxes. An input is
//! assigned the label of the box it can reach by changing the fewest
//! coordinates, and the gap between the nearest box and the nearest box of a
//! different label yields an exact certificate against sparse perturbations.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, dataset
//! loaders and the command line live in the `boxnn` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod certify;
pub mod curve;
pub mod dataset;
mod error;
pub mod geometry;
pub mod model;
pub mod oracle;
pub mod softmin;
pub mod train;

pub use certify::{cert, predict, CertResult};
pub use curve::{cert_acc_curve, median_certified_radius, CertCurve};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use geometry::{box_l0_distance, conical_distance, BoxRegion};
pub use model::BoxModel;
pub use softmin::soft_min;
pub use train::{init_model, loss, relaxed_certificate, train, LossReport, TrainConfig};
