//! Real-time abandoned-luggage detection for fixed surveillance cameras.
//!
//! The detector runs in two stages. The first finds *static objects*: pixels
//! that differ from a running background estimate but are not moving, grouped
//! into connected components and tracked across frames by box overlap. The
//! second runs a two-classifier cascade over each static track every few
//! frames, smooths the scores over time and settles the track's label by
//! majority vote.
//!
//! Module map:
//!
//! - [`imgproc`]: raster types and pure pixel operations.
//! - [`background`]: running-average background model and foreground mask.
//! - [`sod`]: motion mask, static mask and per-frame candidate extraction.
//! - [`tracker`]: IoU association of candidates into tracks.
//! - [`cascade`]: classifier trait, linear stand-in model, scheduling,
//!   smoothing and voting.
//! - [`samplegen`]: synthetic training samples by alpha compositing.
//! - [`eval`]: frame- and pixel-level precision / recall / F1.
//! - [`synth`]: scripted scene renderer with exact ground truth.
//! - [`training`]: split, augmentation and training of both stages.
//! - [`config`], [`pipeline`], [`video`], [`pnm`]: wiring and file formats.

pub mod background;
pub mod cascade;
pub mod config;
pub mod error;
pub mod eval;
pub mod imgproc;
pub mod pipeline;
pub mod pnm;
pub mod samplegen;
pub mod sod;
pub mod synth;
pub mod tracker;
pub mod training;
pub mod video;

pub use error::{Error, Result};
pub use imgproc::{BinaryMask, Blob, BoundingBox, Frame, GrayImage};
