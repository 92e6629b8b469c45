//! Analytics for recorded instrument practice.
//!
//! The crate turns Standard MIDI File recordings into four kinds of views:
//!
//! * a progress matrix of per-note timing deviations over repetitions of an
//!   exercise ([`alignment`], [`heatmap::progress_matrix`]),
//! * fretboard count and two-player comparison grids ([`heatmap`]),
//! * a similarity layout of many fretboard grids with outlier flags
//!   ([`similarity`]),
//! * per-recording sequences of notes classified by their role in a scale
//!   ([`theory`]).
//!
//! Every view can be rendered to a deterministic SVG document with
//! [`render`].

pub mod alignment;
pub mod heatmap;
pub mod midi;
pub mod render;
pub mod score;
pub mod similarity;
pub mod stats;
pub mod theory;

pub use alignment::{Alignment, FitMode, NoteDeviation, Segment, TimeMap};
pub use heatmap::{CellCategory, ComparisonGrid, FretboardGrid, ProgressMatrix};
pub use midi::{ExerciseKind, NoteEvent, Recording, RecordingMeta};
pub use score::{Fretboard, FretboardCoord, ReferenceNote, ReferenceScore, Tuning};
pub use similarity::{DistanceMatrix, Layout2D};
pub use theory::{NoteRole, RoleSequence, ScaleSpec};
