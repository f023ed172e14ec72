//! Face-embedding template aggregation toolkit.
//!
//! Face-recognition systems usually enroll a person from several images and
//! must then answer every probe against a single stored representation. This
//! crate builds that representation — the *template* — from a set of embedding
//! vectors, and measures how well different ways of building it hold up under
//! an L2 match metric:
//!
//! - [`embedding`]: the vector type, validation, and the distance / threshold
//!   primitives everything else is defined in terms of.
//! - [`aggregation`]: dimension-wise reductions (mean, median, min, max,
//!   percentiles) plus reference oracle strategies, and an incremental mean
//!   for streaming enrollment.
//! - [`evaluation`]: template/test splits of per-person galleries, match and
//!   non-match error, and side-by-side strategy comparison reports.
//! - [`analysis`]: saturation curves, every-nth subsampling, and greedy
//!   template-image selection.
//! - [`synthgen`]: a deterministic synthetic dataset generator with known
//!   ground-truth centers, for experiments and tests.
//! - [`io`]: the on-disk dataset format, delimited import/export, and report
//!   rendering (text table, delimited, JSON).
//!
//! All distance computation is done in `f64`, regardless of how the inputs
//! were stored. Every seeded operation is deterministic: the same inputs, flags
//! and seed produce byte-identical reports, independent of worker count.

pub mod aggregation;
pub mod analysis;
pub mod embedding;
pub mod evaluation;
pub mod io;
pub mod synthgen;

/// Version string stamped into report provenance blocks.
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
