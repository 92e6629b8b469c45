use serde::{Deserialize, Serialize};

/// Injected timing of one repetition, one entry per score note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RepetitionTruth {
    pub jitter_ticks: Vec<i64>,
    pub jitter_seconds: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LongBlueNoteTruth {
    pub index: usize,
    pub pitch: u8,
    pub onset_seconds: f64,
    pub duration_seconds: f64,
}

/// Contents of `<recording>.truth.json`.
///
/// Deviations are played onset minus the score onset at the file's own
/// tempo, positive meaning late. The jitter of every repetition sums to zero
/// and is uncorrelated with score position, so a least-squares time map fitted
/// to the played onsets recovers it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RecordingTruth {
    pub recording_id: String,
    pub player: String,
    pub exercise: String,
    pub ppq: u16,
    pub micros_per_quarter: u32,
    /// Played seconds per score beat; absent for improvisations.
    pub seconds_per_beat: Option<f64>,
    pub tempo_scale: f64,
    pub repetitions: Vec<RepetitionTruth>,
    pub problem_note: Option<usize>,
    pub outlier: bool,
    pub long_blue_note: Option<LongBlueNoteTruth>,
}

impl RecordingTruth {
    pub fn seconds_per_tick(&self) -> f64 {
        self.micros_per_quarter as f64 / (self.ppq as f64 * 1e6)
    }
}
