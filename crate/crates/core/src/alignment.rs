//! Matching performances against a reference score.
//!
//! A practice recording usually contains several passes through the same
//! exercise. [`segment_repetitions`] cuts it into those passes,
//! [`align_notes`] finds the note correspondence of one pass, [`fit_time_map`]
//! removes the global tempo and offset, and [`compute_deviations`] yields the
//! signed timing error of every reference note.
//!
//! Correspondence is decided on pitch alone. The dynamic program charges 0
//! for a match of equal pitches and 1 for every substitution, missed
//! reference note and extra recorded note; timing only enters afterwards.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::midi::{NoteEvent, Recording};
use crate::score::ReferenceScore;

/// A repetition is accepted when at least this fraction of the score matched.
pub const MIN_MATCH_RATE: f64 = 0.5;

/// One pass through the exercise inside a longer recording.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Segment {
    pub recording_id: String,
    pub recorded_at: Option<DateTime<Utc>>,
    pub repetition_index: usize,
    pub start_seconds: f64,
    pub match_rate: f64,
    pub notes: Vec<NoteEvent>,
}

/// A recorded note referenced from an alignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AlignedNote {
    /// Index into the aligned note list.
    pub position: usize,
    pub pitch: u8,
    pub onset_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AlignedPair {
    pub ref_index: usize,
    pub recorded: Option<AlignedNote>,
}

/// Monotone correspondence between recorded notes and a score.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Alignment {
    /// One entry per reference note, in score order.
    pub pairs: Vec<AlignedPair>,
    /// Recorded notes not matched to any reference note.
    pub insertions: Vec<AlignedNote>,
    pub cost: u32,
}

impl Alignment {
    pub fn matched(&self) -> impl Iterator<Item = (usize, AlignedNote)> + '_ {
        self.pairs.iter().filter_map(|p| p.recorded.map(|r| (p.ref_index, r)))
    }

    pub fn match_count(&self) -> usize {
        self.matched().count()
    }

    pub fn match_rate(&self) -> f64 {
        if self.pairs.is_empty() {
            0.0
        } else {
            self.match_count() as f64 / self.pairs.len() as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    None,
    Offset,
    #[default]
    Affine,
}

impl fmt::Display for FitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMode::None => "none",
            FitMode::Offset => "offset",
            FitMode::Affine => "affine",
        })
    }
}

impl FromStr for FitMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(FitMode::None),
            "offset" => Ok(FitMode::Offset),
            "affine" => Ok(FitMode::Affine),
            other => Err(format!("unknown fit mode `{other}` (expected none, offset or affine)")),
        }
    }
}

/// Beats → seconds: `seconds = seconds_per_beat * beats + offset_seconds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TimeMap {
    /// The mode actually used after degradation.
    pub mode: FitMode,
    pub seconds_per_beat: f64,
    pub offset_seconds: f64,
}

impl TimeMap {
    pub fn predict(&self, beats: f64) -> f64 {
        self.seconds_per_beat * beats + self.offset_seconds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NoteDeviation {
    pub ref_index: usize,
    /// Recorded minus predicted onset; negative is early. `None` for a miss.
    pub deviation_seconds: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Diagonal,
    Deletion,
    Insertion,
}

// Cumulative cost table with `table[i][j]` = cost of aligning the first i
// reference pitches with the first j recorded pitches.
fn cost_table(reference: &[u8], recorded: &[u8]) -> Vec<Vec<u32>> {
    let (n, m) = (reference.len(), recorded.len());
    let mut t = vec![vec![0u32; m + 1]; n + 1];
    for (j, cell) in t[0].iter_mut().enumerate() {
        *cell = j as u32;
    }
    for i in 1..=n {
        t[i][0] = i as u32;
        for j in 1..=m {
            let sub = u32::from(reference[i - 1] != recorded[j - 1]);
            t[i][j] = (t[i - 1][j - 1] + sub).min(t[i - 1][j] + 1).min(t[i][j - 1] + 1);
        }
    }
    t
}

// Walk back from (n, end), preferring diagonal over deletion over insertion.
fn traceback(t: &[Vec<u32>], reference: &[u8], recorded: &[u8], end: usize) -> Vec<(Step, usize, usize)> {
    let (mut i, mut j) = (reference.len(), end);
    let mut steps = Vec::with_capacity(i + j);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let sub = u32::from(reference[i - 1] != recorded[j - 1]);
            if t[i][j] == t[i - 1][j - 1] + sub {
                steps.push((Step::Diagonal, i - 1, j - 1));
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && t[i][j] == t[i - 1][j] + 1 {
            steps.push((Step::Deletion, i - 1, j));
            i -= 1;
        } else {
            steps.push((Step::Insertion, i, j - 1));
            j -= 1;
        }
    }
    steps.reverse();
    steps
}

fn build_alignment(reference: &[u8], notes: &[NoteEvent], steps: &[(Step, usize, usize)], cost: u32) -> Alignment {
    let aligned = |position: usize| AlignedNote {
        position,
        pitch: notes[position].pitch,
        onset_seconds: notes[position].onset_seconds,
    };
    let mut pairs: Vec<AlignedPair> =
        (0..reference.len()).map(|ref_index| AlignedPair { ref_index, recorded: None }).collect();
    let mut insertions = Vec::new();
    for &(step, i, j) in steps {
        match step {
            Step::Diagonal if reference[i] == notes[j].pitch => pairs[i].recorded = Some(aligned(j)),
            // A substitution is a missed reference note plus an extra note.
            Step::Diagonal | Step::Insertion => insertions.push(aligned(j)),
            Step::Deletion => {}
        }
    }
    Alignment { pairs, insertions, cost }
}

/// Minimum-cost monotone alignment of pitch sequences.
pub fn align_pitches(reference: &[u8], recorded: &[u8]) -> u32 {
    cost_table(reference, recorded)[reference.len()][recorded.len()]
}

/// Globally align one segment's notes to the score.
pub fn align_notes(notes: &[NoteEvent], score: &ReferenceScore) -> Alignment {
    let reference = score.pitches();
    let recorded: Vec<u8> = notes.iter().map(|n| n.pitch).collect();
    let t = cost_table(&reference, &recorded);
    let cost = t[reference.len()][recorded.len()];
    let steps = traceback(&t, &reference, &recorded, recorded.len());
    build_alignment(&reference, notes, &steps, cost)
}

/// Align the score against a prefix of `notes` whose end is free: trailing
/// recorded notes cost nothing. Among equally cheap prefixes the one with the
/// most matches wins, then the shortest.
fn align_free_end(notes: &[NoteEvent], reference: &[u8]) -> Alignment {
    let recorded: Vec<u8> = notes.iter().map(|n| n.pitch).collect();
    let t = cost_table(reference, &recorded);
    let last = &t[reference.len()];
    let best = *last.iter().min().expect("table has at least one column");
    let mut chosen: Option<Alignment> = None;
    for (end, _) in last.iter().enumerate().filter(|(_, &c)| c == best) {
        let steps = traceback(&t, reference, &recorded, end);
        let candidate = build_alignment(reference, &notes[..end], &steps, best);
        if chosen.as_ref().map_or(true, |c| candidate.match_count() > c.match_count()) {
            chosen = Some(candidate);
        }
    }
    chosen.expect("at least one column attains the minimum")
}

/// Cut a recording into repetitions of the score.
///
/// Starting at the first unconsumed note, the score is aligned against the
/// remaining notes with a free end. The pass is accepted when its match rate
/// reaches [`MIN_MATCH_RATE`]; the segment spans the first through the last
/// matched note and the search resumes after it. The loop stops once fewer
/// than half a score's worth of notes remain or a pass is rejected.
pub fn segment_repetitions(recording: &Recording, score: &ReferenceScore) -> Vec<Segment> {
    let reference = score.pitches();
    let min_remaining = MIN_MATCH_RATE * reference.len() as f64;
    let mut segments = Vec::new();
    let mut start = 0usize;
    if reference.is_empty() {
        return segments;
    }
    while start < recording.notes.len() && (recording.notes.len() - start) as f64 >= min_remaining {
        let remaining = &recording.notes[start..];
        let pass = align_free_end(remaining, &reference);
        if pass.match_rate() < MIN_MATCH_RATE {
            break;
        }
        let positions: Vec<usize> = pass.matched().map(|(_, r)| r.position).collect();
        let (first, last) = (positions[0], *positions.last().expect("match rate > 0"));
        let notes = remaining[first..=last].to_vec();
        let match_rate = align_notes(&notes, score).match_rate();
        segments.push(Segment {
            recording_id: recording.id.clone(),
            recorded_at: Some(recording.meta.recorded_at),
            repetition_index: segments.len(),
            start_seconds: notes[0].onset_seconds,
            match_rate,
            notes,
        });
        start += last + 1;
    }
    segments
}

/// Fit a beats → seconds map to the matched pairs of an alignment.
///
/// `segment_start` anchors the nominal map used by [`FitMode::None`]: the
/// first reference note is predicted at that time. Affine fits fall back to
/// offset fits when fewer than two distinct beat positions are matched (or
/// the slope comes out non-positive), and offset fits fall back to the
/// nominal map when nothing matched.
pub fn fit_time_map(alignment: &Alignment, score: &ReferenceScore, mode: FitMode, segment_start: f64) -> TimeMap {
    let nominal = score.seconds_per_beat();
    let points: Vec<(f64, f64)> = alignment
        .matched()
        .map(|(ref_index, rec)| (score.notes[ref_index].onset_beats, rec.onset_seconds))
        .collect();

    if mode == FitMode::Affine && points.len() >= 2 {
        let n = points.len() as f64;
        let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
        let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
        if sxx > 0.0 {
            let slope = sxy / sxx;
            if slope > 0.0 {
                return TimeMap { mode: FitMode::Affine, seconds_per_beat: slope, offset_seconds: mean_y - slope * mean_x };
            }
        }
    }
    if mode != FitMode::None && !points.is_empty() {
        let offset = points.iter().map(|(x, y)| y - nominal * x).sum::<f64>() / points.len() as f64;
        return TimeMap { mode: FitMode::Offset, seconds_per_beat: nominal, offset_seconds: offset };
    }
    let first_beat = score.notes.first().map_or(0.0, |n| n.onset_beats);
    TimeMap { mode: FitMode::None, seconds_per_beat: nominal, offset_seconds: segment_start - nominal * first_beat }
}

pub fn compute_deviations(alignment: &Alignment, time_map: &TimeMap, score: &ReferenceScore) -> Vec<NoteDeviation> {
    alignment
        .pairs
        .iter()
        .map(|p| NoteDeviation {
            ref_index: p.ref_index,
            deviation_seconds: p
                .recorded
                .map(|r| r.onset_seconds - time_map.predict(score.notes[p.ref_index].onset_beats)),
        })
        .collect()
}

/// Sum of squared deviations over matched notes.
pub fn residual_sum_of_squares(deviations: &[NoteDeviation]) -> f64 {
    deviations.iter().filter_map(|d| d.deviation_seconds).map(|d| d * d).sum()
}

/// Alignment, fitted map and deviations of one segment.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SegmentAnalysis {
    pub alignment: Alignment,
    pub time_map: TimeMap,
    pub deviations: Vec<NoteDeviation>,
}

pub fn analyze_segment(segment: &Segment, score: &ReferenceScore, mode: FitMode) -> SegmentAnalysis {
    let alignment = align_notes(&segment.notes, score);
    let time_map = fit_time_map(&alignment, score, mode, segment.start_seconds);
    let deviations = compute_deviations(&alignment, &time_map, score);
    SegmentAnalysis { alignment, time_map, deviations }
}
