//! Reference scores, instrument tuning and fretboard coordinate arithmetic.
//!
//! Scores live in the beat domain (quarter notes) so that a reference is
//! independent of whatever tempo a performance happens to be played at.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::midi::{self, ParseError};

/// Open-string pitches of a six-string guitar in standard tuning, string 1
/// (high E) first.
pub const STANDARD_GUITAR: [u8; 6] = [64, 59, 55, 50, 45, 40];

pub const DEFAULT_FRET_COUNT: u8 = 22;

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("tuning must list at least one string")]
    EmptyTuning,
    #[error("tuning must be strictly decreasing from string 1, got {0:?}")]
    UnorderedTuning(Vec<u8>),
    #[error("coordinate string {string} fret {fret} is outside a {strings}-string, {fret_count}-fret board")]
    CoordOutOfRange { string: u8, fret: u8, strings: usize, fret_count: u8 },
    #[error("score has no notes")]
    Empty,
    #[error("score notes are not sorted by onset then pitch (first offending index {0})")]
    Unsorted(usize),
    #[error("note {index}: {reason}")]
    InvalidNote { index: usize, reason: String },
    #[error("reference tempo must be a positive number of beats per minute, got {0}")]
    InvalidTempo(f64),
    #[error("notes {indices:?} exceed the voice limit of {limit}")]
    VoiceLimit { limit: usize, indices: Vec<usize> },
    #[error("unrecognised score document: expected a Standard MIDI File or JSON")]
    UnknownFormat,
    #[error("invalid score JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Midi(#[from] ParseError),
}

/// Open-string pitches ordered from string 1 (highest) to string S (lowest).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Tuning {
    open_pitches: Vec<u8>,
}

impl Tuning {
    pub fn new(open_pitches: Vec<u8>) -> Result<Self, ScoreError> {
        if open_pitches.is_empty() {
            return Err(ScoreError::EmptyTuning);
        }
        if open_pitches.windows(2).any(|w| w[0] <= w[1]) || open_pitches.iter().any(|&p| p > 127) {
            return Err(ScoreError::UnorderedTuning(open_pitches));
        }
        Ok(Self { open_pitches })
    }

    pub fn standard_guitar() -> Self {
        Self { open_pitches: STANDARD_GUITAR.to_vec() }
    }

    pub fn string_count(&self) -> usize {
        self.open_pitches.len()
    }

    /// Open pitch of a 1-based string number.
    pub fn open_pitch(&self, string: u8) -> Option<u8> {
        (string as usize).checked_sub(1).and_then(|i| self.open_pitches.get(i)).copied()
    }

    pub fn open_pitches(&self) -> &[u8] {
        &self.open_pitches
    }
}

impl TryFrom<Vec<u8>> for Tuning {
    type Error = ScoreError;
    fn try_from(v: Vec<u8>) -> Result<Self, Self::Error> {
        Tuning::new(v)
    }
}

impl From<Tuning> for Vec<u8> {
    fn from(t: Tuning) -> Self {
        t.open_pitches
    }
}

/// A position on the neck: 1-based string, 0-based fret (0 is the open string).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FretboardCoord {
    pub string: u8,
    pub fret: u8,
}

impl FretboardCoord {
    pub const fn new(string: u8, fret: u8) -> Self {
        Self { string, fret }
    }
}

/// A tuning together with the number of frets, i.e. the bounded grid of
/// playable cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Fretboard {
    pub tuning: Tuning,
    pub fret_count: u8,
}

impl Default for Fretboard {
    fn default() -> Self {
        Self { tuning: Tuning::standard_guitar(), fret_count: DEFAULT_FRET_COUNT }
    }
}

impl Fretboard {
    pub fn new(tuning: Tuning, fret_count: u8) -> Self {
        Self { tuning, fret_count }
    }

    pub fn strings(&self) -> usize {
        self.tuning.string_count()
    }

    /// Columns of a grid over this board (frets 0 through `fret_count`).
    pub fn columns(&self) -> usize {
        self.fret_count as usize + 1
    }

    pub fn contains(&self, coord: FretboardCoord) -> bool {
        coord.string >= 1 && (coord.string as usize) <= self.strings() && coord.fret <= self.fret_count
    }

    pub fn pitch_at(&self, coord: FretboardCoord) -> Result<u8, ScoreError> {
        let out_of_range = || ScoreError::CoordOutOfRange {
            string: coord.string,
            fret: coord.fret,
            strings: self.strings(),
            fret_count: self.fret_count,
        };
        if !self.contains(coord) {
            return Err(out_of_range());
        }
        let open = self.tuning.open_pitch(coord.string).ok_or_else(out_of_range)?;
        let pitch = open as u16 + coord.fret as u16;
        if pitch > 127 {
            return Err(out_of_range());
        }
        Ok(pitch as u8)
    }

    /// Every cell sounding `pitch`, ordered by string number.
    pub fn coords_for_pitch(&self, pitch: u8) -> Vec<FretboardCoord> {
        self.tuning
            .open_pitches()
            .iter()
            .enumerate()
            .filter_map(|(i, &open)| {
                let fret = pitch.checked_sub(open)?;
                (fret <= self.fret_count).then(|| FretboardCoord::new(i as u8 + 1, fret))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReferenceNote {
    pub index: usize,
    pub pitch: u8,
    pub onset_beats: f64,
    pub duration_beats: f64,
}

/// The ground truth a repetition is compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReferenceScore {
    pub exercise: String,
    pub reference_tempo_bpm: f64,
    pub notes: Vec<ReferenceNote>,
}

/// On-disk JSON form of a score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ScoreDocument {
    pub exercise: String,
    pub reference_tempo_bpm: f64,
    pub notes: Vec<ScoreDocumentNote>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ScoreDocumentNote {
    pub pitch: u8,
    pub onset_beats: f64,
    pub duration_beats: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreOptions {
    /// Maximum number of simultaneously sounding notes.
    pub voice_limit: usize,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self { voice_limit: 1 }
    }
}

impl ReferenceScore {
    /// Validate a JSON-shaped document into a score.
    pub fn from_document(doc: ScoreDocument, opts: ScoreOptions) -> Result<Self, ScoreError> {
        if !(doc.reference_tempo_bpm.is_finite() && doc.reference_tempo_bpm > 0.0) {
            return Err(ScoreError::InvalidTempo(doc.reference_tempo_bpm));
        }
        if doc.notes.is_empty() {
            return Err(ScoreError::Empty);
        }
        for (index, n) in doc.notes.iter().enumerate() {
            let reason = if n.pitch > 127 {
                Some("pitch above 127")
            } else if !(n.onset_beats.is_finite() && n.onset_beats >= 0.0) {
                Some("onset must be a nonnegative number of beats")
            } else if !(n.duration_beats.is_finite() && n.duration_beats > 0.0) {
                Some("duration must be positive")
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(ScoreError::InvalidNote { index, reason: reason.to_string() });
            }
        }
        if let Some(i) = doc.notes.windows(2).position(|w| {
            (w[0].onset_beats, w[0].pitch).partial_cmp(&(w[1].onset_beats, w[1].pitch))
                == Some(std::cmp::Ordering::Greater)
        }) {
            return Err(ScoreError::Unsorted(i + 1));
        }
        let overloaded = voice_overflow(&doc.notes, opts.voice_limit);
        if !overloaded.is_empty() {
            return Err(ScoreError::VoiceLimit { limit: opts.voice_limit, indices: overloaded });
        }
        let notes = doc
            .notes
            .into_iter()
            .enumerate()
            .map(|(index, n)| ReferenceNote {
                index,
                pitch: n.pitch,
                onset_beats: n.onset_beats,
                duration_beats: n.duration_beats,
            })
            .collect();
        Ok(Self { exercise: doc.exercise, reference_tempo_bpm: doc.reference_tempo_bpm, notes })
    }

    pub fn to_document(&self) -> ScoreDocument {
        ScoreDocument {
            exercise: self.exercise.clone(),
            reference_tempo_bpm: self.reference_tempo_bpm,
            notes: self
                .notes
                .iter()
                .map(|n| ScoreDocumentNote {
                    pitch: n.pitch,
                    onset_beats: n.onset_beats,
                    duration_beats: n.duration_beats,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("score documents always serialize")
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    /// Nominal seconds per beat at the reference tempo.
    pub fn seconds_per_beat(&self) -> f64 {
        60.0 / self.reference_tempo_bpm
    }

    pub fn pitches(&self) -> Vec<u8> {
        self.notes.iter().map(|n| n.pitch).collect()
    }

    pub fn is_monophonic(&self) -> bool {
        voice_overflow_ref(&self.notes, 1).is_empty()
    }
}

// Indices of notes at whose onset more than `limit` notes sound.
fn voice_overflow(notes: &[ScoreDocumentNote], limit: usize) -> Vec<usize> {
    let spans: Vec<(f64, f64)> = notes.iter().map(|n| (n.onset_beats, n.duration_beats)).collect();
    overflow(&spans, limit)
}

fn voice_overflow_ref(notes: &[ReferenceNote], limit: usize) -> Vec<usize> {
    let spans: Vec<(f64, f64)> = notes.iter().map(|n| (n.onset_beats, n.duration_beats)).collect();
    overflow(&spans, limit)
}

fn overflow(spans: &[(f64, f64)], limit: usize) -> Vec<usize> {
    const EPS: f64 = 1e-9;
    (0..spans.len())
        .filter(|&i| {
            let onset = spans[i].0;
            let sounding = spans[..i].iter().filter(|(o, d)| o + d > onset + EPS).count() + 1;
            sounding > limit
        })
        .collect()
}

/// Load a score from either a reference Standard MIDI File or the JSON score
/// format. `exercise` names the score when the document itself carries no
/// name (MIDI input).
pub fn load_score(bytes: &[u8], exercise: &str, opts: ScoreOptions) -> Result<ReferenceScore, ScoreError> {
    if bytes.starts_with(b"MThd") {
        return score_from_smf(bytes, exercise, opts);
    }
    let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
    if first == Some(&b'{') {
        let doc: ScoreDocument = serde_json::from_slice(bytes).map_err(|e| ScoreError::Json(e.to_string()))?;
        return ReferenceScore::from_document(doc, opts);
    }
    Err(ScoreError::UnknownFormat)
}

fn score_from_smf(bytes: &[u8], exercise: &str, opts: ScoreOptions) -> Result<ReferenceScore, ScoreError> {
    let smf = midi::parse_smf(bytes)?;
    let (mut notes, _) = midi::pair_note_ticks(&smf.events);
    notes.sort_by_key(|n| (n.on_tick, n.pitch, n.channel));
    let ppq = smf.tempo_map.ppq() as f64;
    let bpm = 60_000_000.0 / smf.tempo_map.micros_per_quarter_at(0) as f64;
    let doc = ScoreDocument {
        exercise: exercise.to_string(),
        reference_tempo_bpm: bpm,
        notes: notes
            .iter()
            .map(|n| ScoreDocumentNote {
                pitch: n.pitch,
                onset_beats: n.on_tick as f64 / ppq,
                duration_beats: (n.off_tick - n.on_tick) as f64 / ppq,
            })
            .collect(),
    };
    ReferenceScore::from_document(doc, opts)
}

/// Pitch-class names used in labels.
pub fn pitch_class_name(pc: u8) -> &'static str {
    const NAMES: [&str; 12] = ["C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"];
    NAMES[(pc % 12) as usize]
}

/// Scientific pitch notation, e.g. 57 → "A3".
pub fn note_name(pitch: u8) -> String {
    format!("{}{}", pitch_class_name(pitch % 12), pitch as i32 / 12 - 1)
}
