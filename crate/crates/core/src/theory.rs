//! Scale-role classification of played notes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::midi::Recording;
use crate::score::pitch_class_name;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScaleSpecError {
    #[error("pitch class {0} is outside 0..=11")]
    PitchClassOutOfRange(u8),
    #[error("root pitch class {0} is not part of the scale")]
    RootNotInScale(u8),
    #[error("pitch classes {0:?} are listed as both scale and blue notes")]
    Overlap(Vec<u8>),
}

/// A scale as pitch-class sets, plus the chromatic "blue" tones allowed on
/// top of it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "RawScaleSpec")]
pub struct ScaleSpec {
    pub name: String,
    pub root_pitch_class: u8,
    pub scale_pitch_classes: BTreeSet<u8>,
    pub blue_pitch_classes: BTreeSet<u8>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawScaleSpec {
    name: String,
    root_pitch_class: u8,
    scale_pitch_classes: BTreeSet<u8>,
    blue_pitch_classes: BTreeSet<u8>,
}

impl TryFrom<RawScaleSpec> for ScaleSpec {
    type Error = ScaleSpecError;
    fn try_from(raw: RawScaleSpec) -> Result<Self, Self::Error> {
        ScaleSpec::new(raw.name, raw.root_pitch_class, raw.scale_pitch_classes, raw.blue_pitch_classes)
    }
}

impl ScaleSpec {
    pub fn new(
        name: impl Into<String>,
        root_pitch_class: u8,
        scale_pitch_classes: BTreeSet<u8>,
        blue_pitch_classes: BTreeSet<u8>,
    ) -> Result<Self, ScaleSpecError> {
        if let Some(&pc) = scale_pitch_classes
            .iter()
            .chain(&blue_pitch_classes)
            .chain(std::iter::once(&root_pitch_class))
            .find(|&&pc| pc > 11)
        {
            return Err(ScaleSpecError::PitchClassOutOfRange(pc));
        }
        if !scale_pitch_classes.contains(&root_pitch_class) {
            return Err(ScaleSpecError::RootNotInScale(root_pitch_class));
        }
        let overlap: Vec<u8> = scale_pitch_classes.intersection(&blue_pitch_classes).copied().collect();
        if !overlap.is_empty() {
            return Err(ScaleSpecError::Overlap(overlap));
        }
        Ok(Self { name: name.into(), root_pitch_class, scale_pitch_classes, blue_pitch_classes })
    }

    /// A minor pentatonic (A C D E G) with E♭ as the blue note.
    pub fn a_minor_pentatonic_blues() -> Self {
        Self::new("A minor pentatonic blues", 9, [9, 0, 2, 4, 7].into(), [3].into()).expect("valid built-in")
    }

    /// Pitch classes of each role, for legends.
    pub fn pitch_classes(&self, role: NoteRole) -> Vec<u8> {
        (0..12u8).filter(|&pc| classify_pitch_class(pc, self) == role).collect()
    }

    pub fn role_label(&self, role: NoteRole) -> String {
        let names: Vec<&str> = self.pitch_classes(role).into_iter().map(pitch_class_name).collect();
        match role {
            NoteRole::Outside => role.label().to_string(),
            _ => format!("{} ({})", role.label(), names.join(" ")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NoteRole {
    Root,
    ScaleTone,
    BlueNote,
    Outside,
}

impl NoteRole {
    pub const ALL: [NoteRole; 4] = [NoteRole::Root, NoteRole::ScaleTone, NoteRole::BlueNote, NoteRole::Outside];

    pub fn label(self) -> &'static str {
        match self {
            NoteRole::Root => "root",
            NoteRole::ScaleTone => "scale tone",
            NoteRole::BlueNote => "blue note",
            NoteRole::Outside => "outside",
        }
    }
}

fn classify_pitch_class(pc: u8, spec: &ScaleSpec) -> NoteRole {
    if pc == spec.root_pitch_class {
        NoteRole::Root
    } else if spec.blue_pitch_classes.contains(&pc) {
        NoteRole::BlueNote
    } else if spec.scale_pitch_classes.contains(&pc) {
        NoteRole::ScaleTone
    } else {
        NoteRole::Outside
    }
}

pub fn classify_note(pitch: u8, spec: &ScaleSpec) -> NoteRole {
    classify_pitch_class(pitch % 12, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoleSpan {
    pub start_seconds: f64,
    pub duration_seconds: f64,
    pub role: NoteRole,
    pub pitch: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoleSequence {
    pub recording_id: String,
    pub spans: Vec<RoleSpan>,
}

impl RoleSequence {
    pub fn end_seconds(&self) -> f64 {
        self.spans.iter().map(|s| s.start_seconds + s.duration_seconds).fold(0.0, f64::max)
    }
}

pub fn role_sequence(recording: &Recording, spec: &ScaleSpec) -> RoleSequence {
    RoleSequence {
        recording_id: recording.id.clone(),
        spans: recording
            .notes
            .iter()
            .map(|n| RoleSpan {
                start_seconds: n.onset_seconds,
                duration_seconds: n.duration_seconds,
                role: classify_note(n.pitch, spec),
                pitch: n.pitch,
            })
            .collect(),
    }
}

/// Fraction of total note duration per role.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoleShares {
    pub root: f64,
    pub scale_tone: f64,
    pub blue_note: f64,
    pub outside: f64,
}

impl RoleShares {
    pub fn get(&self, role: NoteRole) -> f64 {
        match role {
            NoteRole::Root => self.root,
            NoteRole::ScaleTone => self.scale_tone,
            NoteRole::BlueNote => self.blue_note,
            NoteRole::Outside => self.outside,
        }
    }

    fn slot(&mut self, role: NoteRole) -> &mut f64 {
        match role {
            NoteRole::Root => &mut self.root,
            NoteRole::ScaleTone => &mut self.scale_tone,
            NoteRole::BlueNote => &mut self.blue_note,
            NoteRole::Outside => &mut self.outside,
        }
    }

    pub fn sum(&self) -> f64 {
        self.root + self.scale_tone + self.blue_note + self.outside
    }
}

pub fn role_duration_shares(sequence: &RoleSequence) -> RoleShares {
    let mut shares = RoleShares::default();
    let total: f64 = sequence.spans.iter().map(|s| s.duration_seconds).sum();
    if total <= 0.0 {
        return shares;
    }
    for span in &sequence.spans {
        *shares.slot(span.role) += span.duration_seconds;
    }
    for role in NoteRole::ALL {
        *shares.slot(role) /= total;
    }
    shares
}
