use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Utc};
use practice_scope::midi::IngestDiagnostics;
use practice_scope::score::{ScoreError, ScoreOptions};
use practice_scope::{ExerciseKind, Fretboard, FretboardCoord, RecordingMeta, ReferenceScore, ScaleSpec};
use practice_scope_catalog::{Catalog, CatalogError};
use smf_writer::{SmfWriter, TrackBuilder, WrittenNote};
use thiserror::Error;

use crate::rng::SampleRng;
use crate::spec::{ExerciseSpec, GeneratorSpec, ImprovisationSpec, PlayerSpec, StyleBias};
use crate::truth::{LongBlueNoteTruth, RecordingTruth, RepetitionTruth};

/// Ticks per quarter note in every generated file. Divisible by 2, 3, 4, 5
/// and 64 so common rhythms land on whole ticks.
pub const PPQ: u16 = 960;
const IMPROVISATION_MICROS_PER_QUARTER: u32 = 500_000;
const VELOCITY_RANGE: (i64, i64) = (72, 108);
const MAX_DRAW_ATTEMPTS: usize = 10_000;

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("output directory {0} is not empty")]
    NotEmpty(PathBuf),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("generated recording {id} did not ingest cleanly: {diagnostics:?}")]
    Unclean { id: String, diagnostics: IngestDiagnostics },
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed truth file {path}: {source}")]
    Truth {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn invalid(msg: impl Into<String>) -> GenerateError {
    GenerateError::InvalidSpec(msg.into())
}

fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> GenerateError {
    let context = context.into();
    move |source| GenerateError::Io { context, source }
}

/// Where the truth file of a recording lives: next to its `.mid` file.
pub fn truth_path(catalog: &Catalog, id: &str) -> Result<PathBuf, GenerateError> {
    Ok(catalog.recording_path(id)?.with_extension("truth.json"))
}

pub fn load_truth(catalog: &Catalog, id: &str) -> Result<RecordingTruth, GenerateError> {
    let path = truth_path(catalog, id)?;
    let bytes = fs::read(&path).map_err(io(format!("reading {}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|source| GenerateError::Truth { path, source })
}

/// Writes a fresh catalog into `out_dir`, which must be missing or empty.
///
/// Generation is single-threaded and draws from one random stream in a
/// fixed order: scored exercises (players, then sessions), then
/// improvisations (players, sessions, then the outlier).
pub fn generate_catalog(spec: &GeneratorSpec, out_dir: impl AsRef<Path>) -> Result<Catalog, GenerateError> {
    let out_dir = out_dir.as_ref();
    if out_dir.exists() {
        let mut entries = fs::read_dir(out_dir).map_err(io(format!("listing {}", out_dir.display())))?;
        if entries.next().is_some() {
            return Err(GenerateError::NotEmpty(out_dir.to_path_buf()));
        }
    }
    let board = Fretboard::default();
    validate(spec, &board)?;
    let catalog = Catalog::open(out_dir)?;
    let mut gen = Generator { spec, board, rng: SampleRng::new(spec.seed), catalog: &catalog };

    for (slot, exercise) in spec.exercises.iter().enumerate() {
        let score = ReferenceScore::from_document(exercise.score.clone(), ScoreOptions::default())?;
        catalog.put_score(&score)?;
        for player in &spec.players {
            gen.scored(&score, exercise, player, slot)?;
        }
    }
    for (k, imp) in spec.improvisations.iter().enumerate() {
        catalog.put_scale(&imp.exercise, &imp.scale)?;
        let slot = spec.exercises.len() + k;
        for player in &spec.players {
            for session in 0..imp.sessions {
                let long = imp
                    .long_blue_note
                    .as_ref()
                    .filter(|l| l.player == player.name && l.session == session)
                    .map(|l| l.duration_seconds);
                gen.improvisation(imp, &player.name, &player.style_bias, session, slot, long, false)?;
            }
        }
        if let Some(outlier) = &imp.outlier {
            gen.improvisation(imp, &outlier.player, &outlier.style_bias, imp.sessions, slot, None, true)?;
        }
    }
    Ok(catalog)
}

fn validate(spec: &GeneratorSpec, board: &Fretboard) -> Result<(), GenerateError> {
    let check_bias = |who: &str, bias: &StyleBias| {
        if bias.string_weights.len() != board.strings() {
            return Err(invalid(format!("{who}: expected {} string weights", board.strings())));
        }
        if bias.string_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || bias.string_weights.iter().sum::<f64>() <= 0.0
        {
            return Err(invalid(format!("{who}: string weights must be nonnegative with a positive sum")));
        }
        let (lo, hi) = bias.fret_range;
        if lo > hi || hi > board.fret_count {
            return Err(invalid(format!("{who}: fret range {lo}..={hi} is not on the board")));
        }
        Ok(())
    };
    for (i, p) in spec.players.iter().enumerate() {
        if spec.players[..i].iter().any(|q| q.name == p.name) {
            return Err(invalid(format!("player {} is listed twice", p.name)));
        }
        if !(p.jitter_std_dev_seconds.is_finite() && p.jitter_std_dev_seconds >= 0.0) {
            return Err(invalid(format!("{}: jitter must be a nonnegative number of seconds", p.name)));
        }
        if !(p.tempo_scale.is_finite() && p.tempo_scale > 0.0) {
            return Err(invalid(format!("{}: tempo scale must be positive", p.name)));
        }
        check_bias(&p.name, &p.style_bias)?;
    }
    for e in &spec.exercises {
        if e.repetitions_per_session == 0 {
            return Err(invalid(format!("{}: at least one repetition per session", e.score.exercise)));
        }
    }
    for imp in &spec.improvisations {
        if imp.durations_seconds.is_empty() || imp.durations_seconds.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(invalid(format!("{}: durations must be positive", imp.exercise)));
        }
        if !(0.0..=1.0).contains(&imp.blue_note_keep_probability) {
            return Err(invalid(format!("{}: blue note probability must lie in [0, 1]", imp.exercise)));
        }
        if let Some(o) = &imp.outlier {
            check_bias(&format!("outlier {}", o.player), &o.style_bias)?;
        }
        if let Some(l) = &imp.long_blue_note {
            if !spec.players.iter().any(|p| p.name == l.player) || l.session >= imp.sessions {
                return Err(invalid(format!("{}: long blue note names no generated session", imp.exercise)));
            }
            if !(l.duration_seconds.is_finite() && l.duration_seconds > 0.0) {
                return Err(invalid(format!("{}: long blue note duration must be positive", imp.exercise)));
            }
        }
    }
    Ok(())
}

struct Generator<'a> {
    spec: &'a GeneratorSpec,
    board: Fretboard,
    rng: SampleRng,
    catalog: &'a Catalog,
}

impl Generator<'_> {
    fn recorded_at(&self, session: usize, slot: usize) -> DateTime<Utc> {
        self.spec.first_session
            + Duration::days(self.spec.session_interval_days as i64 * session as i64)
            + Duration::hours(slot as i64)
    }

    fn velocity(&mut self) -> u8 {
        self.rng.range_inclusive(VELOCITY_RANGE.0, VELOCITY_RANGE.1) as u8
    }

    fn store(&self, notes: &[WrittenNote], micros: u32, meta: RecordingMeta) -> Result<String, GenerateError> {
        let mut track = TrackBuilder::new();
        track.tempo(0, micros);
        track.notes(notes);
        let bytes = SmfWriter::new(PPQ).track(track).to_bytes();
        let outcome = self.catalog.ingest(&bytes, meta, None)?;
        if !outcome.diagnostics.is_clean() {
            return Err(GenerateError::Unclean { id: outcome.id, diagnostics: outcome.diagnostics });
        }
        Ok(outcome.id)
    }

    fn write_truth(&self, truth: &RecordingTruth) -> Result<(), GenerateError> {
        let path = truth_path(self.catalog, &truth.recording_id)?;
        let mut bytes = serde_json::to_vec_pretty(truth).expect("truth serialises");
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(io(format!("writing {}", path.display())))
    }

    fn scored(
        &mut self,
        score: &ReferenceScore,
        exercise: &ExerciseSpec,
        player: &PlayerSpec,
        slot: usize,
    ) -> Result<(), GenerateError> {
        let plan = JitterPlan::new(score, exercise, player, &mut self.rng)?;
        let seconds_per_tick = plan.micros as f64 / (PPQ as f64 * 1e6);
        let fingering: Vec<FretboardCoord> = score
            .notes
            .iter()
            .map(|n| finger(&self.board, n.pitch, exercise.position_fret, &player.style_bias))
            .collect::<Result<_, _>>()?;
        let ppq = PPQ as i64;
        let span = score
            .notes
            .iter()
            .map(|n| ((n.onset_beats + n.duration_beats) * PPQ as f64).round() as i64)
            .max()
            .unwrap_or(0);
        let rps = exercise.repetitions_per_session;

        for session in 0..exercise.sessions {
            let columns = &plan.columns[session * rps..(session + 1) * rps];
            let mut notes = Vec::new();
            for (r, dev) in columns.iter().enumerate() {
                let base = ppq + r as i64 * (span + 2 * ppq);
                let onsets: Vec<i64> = plan.onsets.iter().zip(dev).map(|(t, d)| base + t + d).collect();
                for (i, &on) in onsets.iter().enumerate() {
                    let held = on + plan.durations[i] * 3 / 4;
                    let off = onsets.get(i + 1).map_or(held, |&next| held.min(next)).max(on + 1);
                    let coord = fingering[i];
                    notes.push(WrittenNote {
                        channel: coord.string - 1,
                        key: score.notes[i].pitch,
                        velocity: self.velocity(),
                        on_tick: on as u32,
                        off_tick: off as u32,
                    });
                }
            }
            let meta = RecordingMeta {
                player: player.name.clone(),
                exercise: score.exercise.clone(),
                recorded_at: self.recorded_at(session, slot),
                exercise_kind: exercise.kind,
            };
            let id = self.store(&notes, plan.micros, meta)?;
            self.write_truth(&RecordingTruth {
                recording_id: id,
                player: player.name.clone(),
                exercise: score.exercise.clone(),
                ppq: PPQ,
                micros_per_quarter: plan.micros,
                seconds_per_beat: Some(plan.micros as f64 / 1e6),
                tempo_scale: player.tempo_scale,
                repetitions: columns
                    .iter()
                    .map(|dev| RepetitionTruth {
                        jitter_ticks: dev.clone(),
                        jitter_seconds: dev.iter().map(|&d| d as f64 * seconds_per_tick).collect(),
                    })
                    .collect(),
                problem_note: player.problem_note.map(|p| p.index),
                outlier: false,
                long_blue_note: None,
            })?;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn improvisation(
        &mut self,
        imp: &ImprovisationSpec,
        player: &str,
        bias: &StyleBias,
        session: usize,
        slot: usize,
        long_blue: Option<f64>,
        outlier: bool,
    ) -> Result<(), GenerateError> {
        let ticks_per_second = PPQ as f64 * 1e6 / IMPROVISATION_MICROS_PER_QUARTER as f64;
        let to_ticks = |s: f64| ((s * ticks_per_second).round() as i64).max(1);
        let mut drawn: Vec<(FretboardCoord, u8, i64, u8)> = Vec::with_capacity(imp.notes_per_session);
        for _ in 0..imp.notes_per_session {
            let (coord, pitch) = self.draw_note(imp, bias)?;
            let dur = to_ticks(imp.durations_seconds[self.rng.below(imp.durations_seconds.len() as u64) as usize]);
            let velocity = self.velocity();
            drawn.push((coord, pitch, dur, velocity));
        }

        let mut long_index = None;
        if let Some(seconds) = long_blue {
            let is_blue = |p: u8| imp.scale.blue_pitch_classes.contains(&(p % 12));
            let index = match drawn.iter().position(|d| is_blue(d.1)) {
                Some(i) => i,
                None => {
                    let i = drawn.len() / 2;
                    let (coord, pitch) = blue_in_region(&self.board, &imp.scale, bias).ok_or_else(|| {
                        invalid(format!("{}: {player}'s region has no blue note for the long note", imp.exercise))
                    })?;
                    let slot = drawn.get_mut(i).ok_or_else(|| invalid("long blue note needs at least one note"))?;
                    slot.0 = coord;
                    slot.1 = pitch;
                    i
                }
            };
            drawn[index].2 = to_ticks(seconds);
            long_index = Some(index);
        }

        let mut notes = Vec::with_capacity(drawn.len());
        let mut long_truth = None;
        let mut tick = PPQ as i64;
        for (i, &(coord, pitch, dur, velocity)) in drawn.iter().enumerate() {
            notes.push(WrittenNote {
                channel: coord.string - 1,
                key: pitch,
                velocity,
                on_tick: tick as u32,
                off_tick: (tick + dur) as u32,
            });
            if long_index == Some(i) {
                long_truth = Some(LongBlueNoteTruth {
                    index: i,
                    pitch,
                    onset_seconds: tick as f64 / ticks_per_second,
                    duration_seconds: dur as f64 / ticks_per_second,
                });
            }
            tick += dur;
        }
        let meta = RecordingMeta {
            player: player.to_string(),
            exercise: imp.exercise.clone(),
            recorded_at: self.recorded_at(session, slot),
            exercise_kind: ExerciseKind::Improvisation,
        };
        let id = self.store(&notes, IMPROVISATION_MICROS_PER_QUARTER, meta)?;
        self.write_truth(&RecordingTruth {
            recording_id: id,
            player: player.to_string(),
            exercise: imp.exercise.clone(),
            ppq: PPQ,
            micros_per_quarter: IMPROVISATION_MICROS_PER_QUARTER,
            seconds_per_beat: None,
            tempo_scale: 1.0,
            repetitions: Vec::new(),
            problem_note: None,
            outlier,
            long_blue_note: long_truth,
        })
    }

    /// A string by weight and a fret uniformly from the range, redrawn until
    /// the pitch is a scale tone or a blue note that survives the keep draw.
    fn draw_note(&mut self, imp: &ImprovisationSpec, bias: &StyleBias) -> Result<(FretboardCoord, u8), GenerateError> {
        let (lo, hi) = bias.fret_range;
        for _ in 0..MAX_DRAW_ATTEMPTS {
            let string = self.rng.weighted(&bias.string_weights) as u8 + 1;
            let fret = self.rng.range_inclusive(lo as i64, hi as i64) as u8;
            let coord = FretboardCoord::new(string, fret);
            let pitch = self.board.pitch_at(coord)?;
            let pc = pitch % 12;
            if imp.scale.scale_pitch_classes.contains(&pc) {
                return Ok((coord, pitch));
            }
            if imp.scale.blue_pitch_classes.contains(&pc) && self.rng.next_f64() < imp.blue_note_keep_probability {
                return Ok((coord, pitch));
            }
        }
        Err(invalid(format!("{}: no scale tone found in the region {bias:?}", imp.exercise)))
    }
}

fn blue_in_region(board: &Fretboard, scale: &ScaleSpec, bias: &StyleBias) -> Option<(FretboardCoord, u8)> {
    let (lo, hi) = bias.fret_range;
    (0..board.strings())
        .filter(|&s| bias.string_weights[s] > 0.0)
        .flat_map(|s| (lo..=hi).map(move |f| FretboardCoord::new(s as u8 + 1, f)))
        .find_map(|c| {
            let p = board.pitch_at(c).ok()?;
            scale.blue_pitch_classes.contains(&(p % 12)).then_some((c, p))
        })
}

/// Fingering for a scored note: inside a four-fret hand position when one
/// is given (nearest to it otherwise), else the player's favourite string.
fn finger(board: &Fretboard, pitch: u8, position: Option<u8>, bias: &StyleBias) -> Result<FretboardCoord, GenerateError> {
    let candidates = board.coords_for_pitch(pitch);
    let best = match position {
        Some(pos) => candidates.into_iter().min_by_key(|c| {
            let distance = if c.fret < pos { pos - c.fret } else { c.fret.saturating_sub(pos + 3) };
            (distance, c.fret, c.string)
        }),
        None => candidates.into_iter().min_by(|a, b| {
            let wa = bias.string_weights[a.string as usize - 1];
            let wb = bias.string_weights[b.string as usize - 1];
            wb.total_cmp(&wa).then(a.fret.cmp(&b.fret)).then(a.string.cmp(&b.string))
        }),
    };
    best.ok_or_else(|| invalid(format!("pitch {pitch} cannot be played on the board")))
}

/// Per-repetition onset offsets in ticks for one player on one exercise.
///
/// Every offset vector is a sum of integer multiples of three-note vectors
/// `v = (b_k - b_j) e_i - (b_k - b_i) e_j + (b_j - b_i) e_k`, where `b` is
/// score position in grid units. Such a `v` is orthogonal to both the
/// constant vector and `b`, so neither an offset nor an affine fit absorbs
/// any of it.
struct JitterPlan {
    micros: u32,
    onsets: Vec<i64>,
    durations: Vec<i64>,
    columns: Vec<Vec<i64>>,
}

struct Triple {
    idx: [usize; 3],
    v: [i64; 3],
}

impl Triple {
    fn new(b: &[i64], idx: [usize; 3]) -> Self {
        let [bi, bj, bk] = idx.map(|i| b[i]);
        Self { idx, v: [bk - bj, -(bk - bi), bj - bi] }
    }

    fn norm(&self) -> f64 {
        (self.v.iter().map(|x| (x * x) as f64).sum::<f64>()).sqrt()
    }

    fn peak(&self) -> i64 {
        self.v.iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    fn add_to(&self, column: &mut [i64], c: i64) {
        for (&i, &x) in self.idx.iter().zip(&self.v) {
            column[i] += c * x;
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl JitterPlan {
    fn new(
        score: &ReferenceScore,
        exercise: &ExerciseSpec,
        player: &PlayerSpec,
        rng: &mut SampleRng,
    ) -> Result<Self, GenerateError> {
        let micros = (60e6 / (score.reference_tempo_bpm * player.tempo_scale)).round();
        if !(1.0..(1u32 << 24) as f64).contains(&micros) {
            return Err(invalid(format!("{}: tempo out of the MIDI range", player.name)));
        }
        let micros = micros as u32;
        let on_grid = |beats: f64, what: &str, i: usize| {
            let ticks = beats * PPQ as f64;
            if (ticks - ticks.round()).abs() > 1e-9 {
                Err(invalid(format!("{}: note {i} {what} is not a whole number of ticks", score.exercise)))
            } else {
                Ok(ticks.round() as i64)
            }
        };
        let onsets: Vec<i64> =
            score.notes.iter().enumerate().map(|(i, n)| on_grid(n.onset_beats, "onset", i)).collect::<Result<_, _>>()?;
        let durations: Vec<i64> =
            score.notes.iter().map(|n| ((n.duration_beats * PPQ as f64).round() as i64).max(1)).collect();
        let n = onsets.len();
        let min_gap = onsets.windows(2).map(|w| w[1] - w[0]).min();
        if min_gap.is_some_and(|g| g <= 0) {
            return Err(invalid(format!("{}: scored exercises need strictly increasing onsets", score.exercise)));
        }
        // Keeps every note inside its own half of the gap to its neighbours
        // and clear of the rests around the repetition.
        let limit = min_gap.map_or(PPQ as i64 / 2, |g| (g / 2 - 1).min(PPQ as i64 / 2));

        let grid = onsets.iter().skip(1).fold(0, |g, t| gcd(g, t - onsets[0]));
        let b: Vec<i64> = if grid == 0 { vec![0; n] } else { onsets.iter().map(|t| (t - onsets[0]) / grid).collect() };
        let seconds_per_tick = micros as f64 / (PPQ as f64 * 1e6);
        let sigma_ticks = player.jitter_std_dev_seconds / seconds_per_tick;

        let mut base = vec![0i64; n];
        let mut reserved = Vec::new();
        if let Some(p) = player.problem_note {
            if p.index == 0 || p.index + 1 >= n {
                return Err(invalid(format!("{}: problem note needs a neighbour on each side", player.name)));
            }
            let t = Triple::new(&b, [p.index - 1, p.index, p.index + 1]);
            let c = (p.late_seconds / seconds_per_tick / t.v[1] as f64).round() as i64;
            if c.abs() * t.peak() > limit {
                return Err(invalid(format!("{}: problem note lateness exceeds half the note spacing", player.name)));
            }
            t.add_to(&mut base, c);
            reserved.extend(t.idx);
        }
        let free: Vec<usize> = (0..n).filter(|i| !reserved.contains(i)).collect();
        let triples: Vec<Triple> =
            free.chunks_exact(3).map(|c| Triple::new(&b, [c[0], c[1], c[2]])).filter(|t| t.peak() > 0).collect();

        let total = exercise.sessions * exercise.repetitions_per_session;
        let valid = |coeffs: &[i64], scale: i64| triples.iter().zip(coeffs).all(|(t, c)| (c * scale).abs() * t.peak() <= limit);
        let mut columns = Vec::with_capacity(total);
        if player.improving {
            // Jitter shrinks linearly to one unit in the last repetition.
            let mean_scale = (total as f64 + 1.0) / 2.0;
            let mut units: Vec<i64> = triples
                .iter()
                .map(|t| {
                    let g = rng.gaussian();
                    let c = (g * sigma_ticks * 3f64.sqrt() / t.norm() / mean_scale).round() as i64;
                    if c == 0 && sigma_ticks > 0.0 {
                        if g < 0.0 {
                            -1
                        } else {
                            1
                        }
                    } else {
                        c
                    }
                })
                .collect();
            while !valid(&units, total as i64) {
                if units.iter().all(|c| c.abs() <= 1) {
                    return Err(invalid(format!(
                        "{}: {} repetitions are too many for a linearly improving player",
                        player.name, total
                    )));
                }
                for c in &mut units {
                    *c = c.signum() * (c.abs() / 2).max(c.abs().min(1));
                }
            }
            for r in 0..total {
                let mut column = base.clone();
                for (t, c) in triples.iter().zip(&units) {
                    t.add_to(&mut column, c * (total - r) as i64);
                }
                columns.push(column);
            }
        } else {
            for _ in 0..total {
                let mut coeffs: Vec<i64> = triples
                    .iter()
                    .map(|t| (rng.gaussian() * sigma_ticks * 3f64.sqrt() / t.norm()).round() as i64)
                    .collect();
                while !valid(&coeffs, 1) {
                    for c in &mut coeffs {
                        *c /= 2;
                    }
                }
                let mut column = base.clone();
                for (t, c) in triples.iter().zip(&coeffs) {
                    t.add_to(&mut column, *c);
                }
                columns.push(column);
            }
        }
        Ok(Self { micros, onsets, durations, columns })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_vectors_are_orthogonal_to_offset_and_position() {
        let b = [0, 1, 3, 4, 9, 10];
        for idx in [[0, 1, 2], [1, 3, 5], [0, 4, 5]] {
            let t = Triple::new(&b, idx);
            let sum: i64 = t.v.iter().sum();
            let dot: i64 = t.v.iter().zip(idx).map(|(x, i)| x * b[i]).sum();
            assert_eq!((sum, dot), (0, 0), "{idx:?}");
        }
    }

    #[test]
    fn box_fingering_keeps_the_hand_still() {
        let board = Fretboard::default();
        let bias = StyleBias { string_weights: vec![1.0; 6], fret_range: (0, 22) };
        let coords: Vec<(u8, u8)> = [45, 48, 50, 52, 55, 57, 60, 62, 64, 67, 69, 72]
            .iter()
            .map(|&p| finger(&board, p, Some(5), &bias).unwrap())
            .map(|c| (c.string, c.fret))
            .collect();
        assert_eq!(
            coords,
            [(6, 5), (6, 8), (5, 5), (5, 7), (4, 5), (4, 7), (3, 5), (3, 7), (2, 5), (2, 8), (1, 5), (1, 8)]
        );
    }

    #[test]
    fn unplayable_pitch_is_reported() {
        let board = Fretboard::default();
        let bias = StyleBias { string_weights: vec![1.0; 6], fret_range: (0, 5) };
        assert!(finger(&board, 20, None, &bias).is_err());
    }
}
