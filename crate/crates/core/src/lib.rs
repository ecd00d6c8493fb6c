//! Self-paced cross-modal hashing under noisy labels.
//!
//! Per-modality MLP hash functions are trained with a contrastive
//! cross-modal term and a center aggregation term; after a warm-up, each
//! instance's aggregation loss is weighted by a closed-form self-paced
//! weight so that instances whose labels look wrong (loss above the pace
//! parameter) drop out of training. Retrieval quality is measured by MAP in
//! Hamming space.
//!
//! Modules, bottom-up: [`datakit`] (data and file formats), [`encoder`]
//! (hash functions and centers), [`losses`], [`pacer`] (self-paced
//! weights), [`trainer`], [`evaluator`], and [`benchmark`] / [`cli`] tying
//! them into experiments.

// Parameter checks are written as `!(x > 0.0)` on purpose: NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod checkpoint;
pub mod cli;
pub mod datakit;
pub mod encoder;
pub mod error;
pub mod evaluator;
pub mod exec;
pub mod losses;
pub mod pacer;
pub mod seed;
pub mod trainer;

pub use error::{Error, FormatError, Result};
pub use exec::Exec;
