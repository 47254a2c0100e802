//! Error correction for high-dimensional classifier outputs, plus the
//! measure-concentration toolbox that explains why it works.
//!
//! The crate has three parts:
//!
//! * [`corrector`] — trains a 1-nn routed set of regularized Fisher
//!   discriminants on top of a PCA/whitening pipeline and applies it to
//!   relabel classifier outputs. Two deployment paths are provided: the
//!   projected path ([`corrector::apply_corrector`]) and a fused path
//!   ([`corrector::apply_fused`]) that folds projection and whitening into
//!   precomputed full-dimensional vectors.
//! * [`separation`] — samplers for ball-supported distributions and Monte
//!   Carlo estimators that check empirical Fisher-separability frequencies
//!   against their closed-form lower bounds.
//! * [`metrics`] — ROC/AUC evaluation, sliding-window score integration and
//!   principal-component relevance analysis.
//!
//! All randomized routines take explicit seeds and produce bit-identical
//! results across runs and across worker counts: parallel work is always
//! split into fixed batches whose RNG substreams derive from the master seed
//! by counter, and partial results are combined in batch order.
//!
//! The `parallel` feature (on by default) runs the hot loops on rayon;
//! without it the same code degrades to sequential iteration.

pub mod corrector;
pub mod dataset;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod metrics;
pub mod separation;

mod parallel;

pub use dataset::{ClassLabel, LabeledDataset};
pub use error::{Error, Result};
pub use fisher::fisher_separable;
