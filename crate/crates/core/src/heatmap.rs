//! Aggregations behind the progress heatmap and the fretboard heatmaps.

use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::{analyze_segment, FitMode, Segment};
use crate::midi::NoteEvent;
use crate::score::ReferenceScore;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("grid shapes differ: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
pub struct ShapeMismatch {
    pub left_rows: usize,
    pub left_cols: usize,
    pub right_rows: usize,
    pub right_cols: usize,
}

/// Where a progress column came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProgressColumn {
    pub recording_id: String,
    pub repetition_index: usize,
}

/// Timing deviations with reference notes as rows (top = first note) and
/// repetitions as columns (left = earliest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProgressMatrix {
    pub exercise: String,
    pub rows: usize,
    pub cols: usize,
    /// Pitch of each row's reference note.
    pub pitches: Vec<u8>,
    pub columns: Vec<ProgressColumn>,
    /// Row-major; `None` marks a missed note.
    pub deviations: Vec<Option<f64>>,
}

impl ProgressMatrix {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.deviations[row * self.cols + col]
    }

    pub fn column(&self, col: usize) -> Vec<Option<f64>> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn row(&self, row: usize) -> &[Option<f64>] {
        &self.deviations[row * self.cols..(row + 1) * self.cols]
    }

    /// Mean absolute deviation over the matched notes of a column.
    pub fn column_mean_abs(&self, col: usize) -> Option<f64> {
        let values: Vec<f64> = self.column(col).into_iter().flatten().map(f64::abs).collect();
        crate::stats::mean(&values)
    }
}

/// Order segments chronologically: by recording time, then by start within
/// the recording.
pub fn sort_segments(segments: &mut [Segment]) {
    segments.sort_by(|a, b| {
        a.recorded_at
            .cmp(&b.recorded_at)
            .then(a.start_seconds.total_cmp(&b.start_seconds))
    });
}

/// One column per segment, in the order given. Use [`sort_segments`] to
/// concatenate several recordings chronologically.
pub fn progress_matrix(segments: &[Segment], score: &ReferenceScore, mode: FitMode) -> ProgressMatrix {
    let rows = score.len();
    let cols = segments.len();
    let mut deviations = vec![None; rows * cols];
    for (col, segment) in segments.iter().enumerate() {
        for d in analyze_segment(segment, score, mode).deviations {
            deviations[d.ref_index * cols + col] = d.deviation_seconds;
        }
    }
    ProgressMatrix {
        exercise: score.exercise.clone(),
        rows,
        cols,
        pitches: score.pitches(),
        columns: segments
            .iter()
            .map(|s| ProgressColumn { recording_id: s.recording_id.clone(), repetition_index: s.repetition_index })
            .collect(),
        deviations,
    }
}

/// Play counts per fretboard cell: strings as rows (string 1 first), frets
/// as columns (fret 0 first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FretboardGrid {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub counts: Vec<u32>,
    pub total_notes: u32,
    pub unmapped_notes: u32,
}

impl FretboardGrid {
    pub fn empty(strings: usize, fret_count: u8) -> Self {
        let cols = fret_count as usize + 1;
        Self { rows: strings, cols, counts: vec![0; strings * cols], total_notes: 0, unmapped_notes: 0 }
    }

    /// Count at a 1-based string and a fret.
    pub fn count(&self, string: u8, fret: u8) -> u32 {
        self.counts[(string as usize - 1) * self.cols + fret as usize]
    }

    pub fn max_count(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn mapped_total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn fret_count(&self) -> u8 {
        (self.cols - 1) as u8
    }

    fn check_shape(&self, other: &Self) -> Result<(), ShapeMismatch> {
        if (self.rows, self.cols) == (other.rows, other.cols) {
            Ok(())
        } else {
            Err(ShapeMismatch { left_rows: self.rows, left_cols: self.cols, right_rows: other.rows, right_cols: other.cols })
        }
    }

    /// Cellwise sum of two equally shaped grids.
    pub fn try_add(&self, other: &Self) -> Result<Self, ShapeMismatch> {
        self.check_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect(),
            total_notes: self.total_notes + other.total_notes,
            unmapped_notes: self.unmapped_notes + other.unmapped_notes,
        })
    }
}

impl Add for &FretboardGrid {
    type Output = FretboardGrid;

    /// Panics on mismatched shapes; use [`FretboardGrid::try_add`] otherwise.
    fn add(self, rhs: Self) -> FretboardGrid {
        self.try_add(rhs).expect("grids must share a shape")
    }
}

pub fn fretboard_counts(notes: &[NoteEvent], strings: usize, fret_count: u8) -> FretboardGrid {
    let mut grid = FretboardGrid::empty(strings, fret_count);
    for note in notes {
        grid.total_notes += 1;
        match note.coord {
            Some(c) if c.string >= 1 && (c.string as usize) <= strings && c.fret <= fret_count => {
                grid.counts[(c.string as usize - 1) * grid.cols + c.fret as usize] += 1;
            }
            _ => grid.unmapped_notes += 1,
        }
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CellCategory {
    #[serde(rename = "onlyA")]
    OnlyA,
    #[serde(rename = "onlyB")]
    OnlyB,
    Both,
    Neither,
}

impl CellCategory {
    fn swapped(self) -> Self {
        match self {
            Self::OnlyA => Self::OnlyB,
            Self::OnlyB => Self::OnlyA,
            other => other,
        }
    }
}

/// Which of two players used each cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonGrid {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<CellCategory>,
}

impl ComparisonGrid {
    pub fn get(&self, string: u8, fret: u8) -> CellCategory {
        self.cells[(string as usize - 1) * self.cols + fret as usize]
    }

    pub fn swapped(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, cells: self.cells.iter().map(|c| c.swapped()).collect() }
    }

    pub fn count(&self, category: CellCategory) -> usize {
        self.cells.iter().filter(|&&c| c == category).count()
    }
}

pub fn comparison_grid(a: &FretboardGrid, b: &FretboardGrid) -> Result<ComparisonGrid, ShapeMismatch> {
    a.check_shape(b)?;
    let cells = a
        .counts
        .iter()
        .zip(&b.counts)
        .map(|(&x, &y)| match (x > 0, y > 0) {
            (true, false) => CellCategory::OnlyA,
            (false, true) => CellCategory::OnlyB,
            (true, true) => CellCategory::Both,
            (false, false) => CellCategory::Neither,
        })
        .collect();
    Ok(ComparisonGrid { rows: a.rows, cols: a.cols, cells })
}
