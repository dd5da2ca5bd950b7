//! Topological and gradient feature extraction for retinal fundus images.
//!
//! Two feature pipelines share a common image layer:
//!
//! - [`cubical`] computes sublevel-filtration persistence diagrams of a
//!   single-channel image, and [`betti`] samples them into Betti curves.
//!   Four channels (gray, R, G, B) times two homology dimensions times 100
//!   thresholds give an 800-dimensional vector per image.
//! - [`hog`] computes a Histogram of Oriented Gradients descriptor
//!   (9 orientations, 8×8 cells, 2×2 blocks, L2-Hys) which has 26,244
//!   entries for a 224×224 image.
//!
//! [`ml`] provides seven classifiers behind one fit/predict contract and
//! [`eval`] runs stratified k-fold cross-validation with the usual metric
//! tables. [`dataset`], [`features`] and [`workflow`] tie everything to
//! files on disk; the `topohog` binary is a thin wrapper over [`workflow`].

pub mod betti;
pub mod cubical;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod hog;
pub mod imageio;
pub mod ml;
pub mod svg;
pub mod workflow;

pub use error::{Error, Result};
