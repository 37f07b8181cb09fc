//! Morse-Smale segmentation preserving lossy compression.
//!
//! A base error-bounded compressor produces `f̂` from a field `f`; the edit
//! engine then lowers a sparse set of values of `f̂` until the steepest-ascent
//! and steepest-descent segmentation of the result matches that of `f`
//! exactly, without leaving the error bound. The edits are stored losslessly
//! next to the compressed payload.

pub mod base_codec;
pub mod edit_codec;
pub mod edit_engine;
mod error;
mod exec;
pub mod field;
pub mod grid;
pub mod huffman;
pub mod metrics;
pub mod mss;

pub use error::{Error, Result};
pub use exec::Exec;
pub use field::{AnyField, BoundMode, Dtype, Element, ErrorBound, ScalarField, SyntheticKind};
pub use grid::{sos_greater, GridTopology};
pub use mss::{DirectionField, SegmentationLabels};
