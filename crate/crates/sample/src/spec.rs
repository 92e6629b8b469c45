use chrono::{DateTime, TimeZone, Utc};
use practice_scope::score::{ScoreDocument, ScoreDocumentNote};
use practice_scope::{ExerciseKind, ScaleSpec};
use serde::{Deserialize, Serialize};

/// Where a player tends to play: relative weight per string (string 1
/// first) and an inclusive fret range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StyleBias {
    pub string_weights: Vec<f64>,
    pub fret_range: (u8, u8),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PlayerSpec {
    pub name: String,
    pub jitter_std_dev_seconds: f64,
    pub style_bias: StyleBias,
    /// Tempo relative to the score's reference tempo.
    #[serde(default = "one")]
    pub tempo_scale: f64,
    /// Jitter shrinks linearly from the first repetition to the last.
    #[serde(default)]
    pub improving: bool,
    /// Score index of a note played late by a constant amount in every
    /// repetition.
    #[serde(default)]
    pub problem_note: Option<ProblemNote>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ProblemNote {
    pub index: usize,
    pub late_seconds: f64,
}

/// A scored exercise played in repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExerciseSpec {
    pub score: ScoreDocument,
    pub kind: ExerciseKind,
    pub repetitions_per_session: usize,
    pub sessions: usize,
    /// Lowest fret of the hand position used for fingering, if fixed.
    #[serde(default)]
    pub position_fret: Option<u8>,
}

/// Free improvisation over a scale, one recording per session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ImprovisationSpec {
    pub exercise: String,
    pub scale: ScaleSpec,
    pub sessions: usize,
    pub notes_per_session: usize,
    /// Probability of keeping a drawn blue note; other drawn pitches outside
    /// the scale are always redrawn.
    pub blue_note_keep_probability: f64,
    /// Candidate note lengths in seconds.
    pub durations_seconds: Vec<f64>,
    #[serde(default)]
    pub outlier: Option<OutlierSpec>,
    #[serde(default)]
    pub long_blue_note: Option<LongBlueNote>,
}

/// One extra recording played in an unusual region of the neck.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OutlierSpec {
    pub player: String,
    pub style_bias: StyleBias,
}

/// Stretches one blue note of a given session to a fixed length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LongBlueNote {
    pub player: String,
    pub session: usize,
    pub duration_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub first_session: DateTime<Utc>,
    pub session_interval_days: u32,
    pub players: Vec<PlayerSpec>,
    #[serde(default)]
    pub exercises: Vec<ExerciseSpec>,
    #[serde(default)]
    pub improvisations: Vec<ImprovisationSpec>,
}

pub const DEMO_EXERCISE: &str = "a-minor-pentatonic-run";
pub const DEMO_IMPROVISATION: &str = "a-minor-blues-improv";

fn eighths(pitches: &[u8]) -> Vec<ScoreDocumentNote> {
    pitches
        .iter()
        .enumerate()
        .map(|(i, &pitch)| ScoreDocumentNote { pitch, onset_beats: i as f64 * 0.5, duration_beats: 0.5 })
        .collect()
}

impl GeneratorSpec {
    /// The bundled demo: four players, an ascending A minor pentatonic run
    /// in the fifth-position box, and blues improvisations.
    pub fn demo() -> Self {
        let low = StyleBias { string_weights: vec![0.0, 0.0, 0.0, 1.0, 2.0, 2.0], fret_range: (3, 8) };
        let high = StyleBias { string_weights: vec![2.0, 2.0, 1.0, 0.0, 0.0, 0.0], fret_range: (5, 10) };
        let middle = StyleBias { string_weights: vec![0.0, 1.0, 2.0, 2.0, 1.0, 0.0], fret_range: (4, 9) };
        let open = StyleBias { string_weights: vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0], fret_range: (0, 5) };
        GeneratorSpec {
            seed: 20_240_304,
            first_session: Utc.with_ymd_and_hms(2024, 3, 4, 18, 0, 0).unwrap(),
            session_interval_days: 7,
            players: vec![
                PlayerSpec {
                    name: "alex".into(),
                    jitter_std_dev_seconds: 0.03,
                    style_bias: low,
                    tempo_scale: 1.0,
                    improving: true,
                    problem_note: Some(ProblemNote { index: 5, late_seconds: 0.12 }),
                },
                PlayerSpec {
                    name: "blair".into(),
                    jitter_std_dev_seconds: 0.02,
                    style_bias: high,
                    tempo_scale: 1.0,
                    improving: false,
                    problem_note: None,
                },
                PlayerSpec {
                    name: "casey".into(),
                    jitter_std_dev_seconds: 0.04,
                    style_bias: middle,
                    tempo_scale: 1.0,
                    improving: false,
                    problem_note: None,
                },
                PlayerSpec {
                    name: "drew".into(),
                    jitter_std_dev_seconds: 0.025,
                    style_bias: open,
                    tempo_scale: 1.1,
                    improving: false,
                    problem_note: None,
                },
            ],
            exercises: vec![ExerciseSpec {
                score: ScoreDocument {
                    exercise: DEMO_EXERCISE.into(),
                    reference_tempo_bpm: 100.0,
                    notes: eighths(&[45, 48, 50, 52, 55, 57, 60, 62, 64, 67, 69, 72]),
                },
                kind: ExerciseKind::ScalePattern,
                repetitions_per_session: 4,
                sessions: 3,
                position_fret: Some(5),
            }],
            improvisations: vec![ImprovisationSpec {
                exercise: DEMO_IMPROVISATION.into(),
                scale: ScaleSpec::a_minor_pentatonic_blues(),
                sessions: 4,
                notes_per_session: 72,
                blue_note_keep_probability: 0.25,
                durations_seconds: vec![0.15, 0.2, 0.3, 0.45],
                outlier: Some(OutlierSpec {
                    player: "casey".into(),
                    style_bias: StyleBias { string_weights: vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0], fret_range: (15, 20) },
                }),
                long_blue_note: Some(LongBlueNote { player: "blair".into(), session: 2, duration_seconds: 3.0 }),
            }],
        }
    }
}
