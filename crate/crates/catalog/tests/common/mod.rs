#![allow(dead_code)]

use chrono::{TimeZone, Utc};
use practice_scope::score::{ScoreDocument, ScoreDocumentNote, ScoreOptions};
use practice_scope::{ExerciseKind, RecordingMeta, ReferenceScore};
use practice_scope_catalog::Catalog;
use smf_writer::{SmfWriter, TrackBuilder, WrittenNote};

pub const EXERCISE: &str = "box-run";
pub const PITCHES: [u8; 6] = [57, 60, 62, 64, 67, 69];

pub fn score() -> ReferenceScore {
    let notes = PITCHES
        .iter()
        .enumerate()
        .map(|(i, &pitch)| ScoreDocumentNote { pitch, onset_beats: i as f64 * 0.5, duration_beats: 0.5 })
        .collect();
    ReferenceScore::from_document(
        ScoreDocument { exercise: EXERCISE.into(), reference_tempo_bpm: 120.0, notes },
        ScoreOptions::default(),
    )
    .unwrap()
}

/// Two passes through the score at 120 BPM on strings 2–4, `lag` ticks late
/// on the third note.
pub fn performance(lag: u32) -> Vec<u8> {
    let channel_for = |p: u8| match p {
        57 | 60 => 3,
        62 | 64 => 2,
        _ => 1,
    };
    let mut notes = Vec::new();
    for rep in 0..2u32 {
        for (i, &p) in PITCHES.iter().enumerate() {
            let on = rep * 2400 + i as u32 * 240 + if i == 2 { lag } else { 0 };
            notes.push(WrittenNote { channel: channel_for(p), key: p, velocity: 90, on_tick: on, off_tick: on + 200 });
        }
    }
    let mut t = TrackBuilder::new();
    t.tempo(0, 500_000).notes(&notes);
    SmfWriter::new(480).track(t).to_bytes()
}

pub fn meta(player: &str, day: u32) -> RecordingMeta {
    RecordingMeta {
        player: player.into(),
        exercise: EXERCISE.into(),
        recorded_at: Utc.with_ymd_and_hms(2024, 3, day, 18, 30, 0).unwrap(),
        exercise_kind: ExerciseKind::ScalePattern,
    }
}

/// A catalog with a score and five recordings by two players.
pub fn populated(dir: &std::path::Path) -> Catalog {
    let cat = Catalog::open(dir).unwrap();
    cat.put_score(&score()).unwrap();
    for (player, day, lag) in [("ana", 1, 40), ("ben", 2, 0), ("ana", 8, 20), ("ben", 9, 10), ("ana", 15, 5)] {
        cat.ingest(&performance(lag), meta(player, day), None).unwrap();
    }
    cat
}
