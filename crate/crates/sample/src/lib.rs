//! Deterministic synthetic practice catalogs.
//!
//! [`generate_catalog`] writes a complete catalog from a [`GeneratorSpec`]
//! and, next to every recording, a `<stem>.truth.json` file describing what
//! was injected. The same spec and seed always produce the same bytes; the
//! random stream is pinned in [`rng`].

mod generate;
pub mod rng;
mod spec;
mod truth;

pub use generate::{generate_catalog, load_truth, truth_path, GenerateError, PPQ};
pub use spec::{
    ExerciseSpec, GeneratorSpec, ImprovisationSpec, LongBlueNote, OutlierSpec, PlayerSpec, ProblemNote, StyleBias,
    DEMO_EXERCISE, DEMO_IMPROVISATION,
};
pub use truth::{LongBlueNoteTruth, RecordingTruth, RepetitionTruth};
