//! Standard MIDI File ingestion.
//!
//! [`parse_smf`] decodes format 0 and format 1 files with PPQ time division
//! into a single tick-ordered event stream plus a [`TempoMap`]. [`pair_notes`]
//! turns note-on/note-off pairs into [`NoteEvent`]s measured in seconds, and
//! [`infer_string_fret`] places each note on the fretboard.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::score::{Fretboard, FretboardCoord};

/// Tempo assumed until the first tempo event: 120 quarter notes per minute.
pub const DEFAULT_MICROS_PER_QUARTER: u32 = 500_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed MIDI file at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    MissingHeader,
    BadHeaderLength(u32),
    UnsupportedFormat(u16),
    SmpteDivision,
    ZeroPpq,
    Truncated,
    MissingTracks { expected: u16, found: u16 },
    VlqTooLong,
    MissingRunningStatus,
    UnexpectedStatus(u8),
    DataByteOutOfRange(u8),
    InvalidTempo,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MissingHeader => write!(f, "file does not start with an MThd chunk"),
            Self::BadHeaderLength(n) => write!(f, "header chunk length {n} is shorter than 6"),
            Self::UnsupportedFormat(n) => write!(f, "SMF format {n} is not supported (only 0 and 1)"),
            Self::SmpteDivision => write!(f, "SMPTE time division is not supported"),
            Self::ZeroPpq => write!(f, "pulses per quarter note must be positive"),
            Self::Truncated => write!(f, "unexpected end of data"),
            Self::MissingTracks { expected, found } => {
                write!(f, "header announces {expected} tracks but only {found} were found")
            }
            Self::VlqTooLong => write!(f, "variable-length quantity longer than 4 bytes"),
            Self::MissingRunningStatus => write!(f, "data byte with no running status in effect"),
            Self::UnexpectedStatus(b) => write!(f, "unexpected status byte {b:#04x}"),
            Self::DataByteOutOfRange(b) => write!(f, "data byte {b:#04x} has its high bit set"),
            Self::InvalidTempo => write!(f, "tempo meta event must carry a positive 3-byte value"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum RawEventKind {
    NoteOn { channel: u8, pitch: u8, velocity: u8 },
    NoteOff { channel: u8, pitch: u8, velocity: u8 },
    TempoChange { micros_per_quarter: u32 },
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RawEvent {
    pub tick: u64,
    pub kind: RawEventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TempoEntry {
    pub tick: u64,
    pub micros_per_quarter: u32,
}

/// Piecewise-constant tempo over ticks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TempoMap {
    ppq: u16,
    entries: Vec<TempoEntry>,
}

impl TempoMap {
    /// Builds a map from unordered tempo changes. When several changes share
    /// a tick the last one wins; a 120 BPM entry is implied at tick 0.
    ///
    /// Panics if `ppq` or any tempo is zero.
    pub fn new(ppq: u16, changes: impl IntoIterator<Item = TempoEntry>) -> Self {
        assert!(ppq > 0, "ppq must be positive");
        let mut by_tick = BTreeMap::new();
        by_tick.insert(0u64, DEFAULT_MICROS_PER_QUARTER);
        for e in changes {
            assert!(e.micros_per_quarter > 0, "tempo must be positive");
            by_tick.insert(e.tick, e.micros_per_quarter);
        }
        let entries = by_tick
            .into_iter()
            .map(|(tick, micros_per_quarter)| TempoEntry { tick, micros_per_quarter })
            .collect();
        Self { ppq, entries }
    }

    pub fn constant(ppq: u16, micros_per_quarter: u32) -> Self {
        Self::new(ppq, [TempoEntry { tick: 0, micros_per_quarter }])
    }

    pub fn ppq(&self) -> u16 {
        self.ppq
    }

    pub fn entries(&self) -> &[TempoEntry] {
        &self.entries
    }

    pub fn micros_per_quarter_at(&self, tick: u64) -> u32 {
        let idx = self.entries.partition_point(|e| e.tick <= tick);
        self.entries[idx.saturating_sub(1)].micros_per_quarter
    }

    /// Seconds elapsed from tick 0, integrating over tempo segments.
    ///
    /// The sum is accumulated exactly in tick·µs units and divided once, so
    /// values are reproducible to the last bit.
    pub fn ticks_to_seconds(&self, tick: u64) -> f64 {
        let mut acc: u128 = 0;
        for (i, e) in self.entries.iter().enumerate() {
            if e.tick >= tick {
                break;
            }
            let end = self.entries.get(i + 1).map_or(tick, |next| next.tick.min(tick));
            acc += (end - e.tick) as u128 * e.micros_per_quarter as u128;
        }
        acc as f64 / (self.ppq as f64 * 1e6)
    }
}

/// A decoded file: the merged event stream of all tracks.
#[derive(Debug, Clone, PartialEq)]
pub struct Smf {
    pub format: u16,
    pub tempo_map: TempoMap,
    pub events: Vec<RawEvent>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { offset: self.pos, kind }
    }

    fn u8(&mut self) -> Result<u8, ParseError> {
        let b = *self.bytes.get(self.pos).ok_or_else(|| self.err(ParseErrorKind::Truncated))?;
        self.pos += 1;
        Ok(b)
    }

    fn peek(&self) -> Result<u8, ParseError> {
        self.bytes.get(self.pos).copied().ok_or_else(|| self.err(ParseErrorKind::Truncated))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ParseError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| self.err(ParseErrorKind::Truncated))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u16(&mut self) -> Result<u16, ParseError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, ParseError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn vlq(&mut self) -> Result<u32, ParseError> {
        let start = self.pos;
        let mut value = 0u32;
        for _ in 0..4 {
            let b = self.u8()?;
            value = (value << 7) | (b & 0x7f) as u32;
            if b & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(ParseError { offset: start, kind: ParseErrorKind::VlqTooLong })
    }

    fn data_byte(&mut self) -> Result<u8, ParseError> {
        let at = self.pos;
        let b = self.u8()?;
        if b & 0x80 != 0 {
            return Err(ParseError { offset: at, kind: ParseErrorKind::DataByteOutOfRange(b) });
        }
        Ok(b)
    }
}

/// Decode a variable-length quantity from the start of `bytes`, returning the
/// value and the number of bytes consumed.
pub fn read_vlq(bytes: &[u8]) -> Result<(u32, usize), ParseError> {
    let mut c = Cursor { bytes, pos: 0 };
    let v = c.vlq()?;
    Ok((v, c.pos))
}

/// Parse a Standard MIDI File, merging all tracks into one tick-ordered list.
pub fn parse_smf(bytes: &[u8]) -> Result<Smf, ParseError> {
    let mut c = Cursor { bytes, pos: 0 };
    if bytes.len() < 4 || &bytes[..4] != b"MThd" {
        return Err(c.err(ParseErrorKind::MissingHeader));
    }
    c.pos = 4;
    let header_len = c.u32()?;
    if header_len < 6 {
        return Err(ParseError { offset: 4, kind: ParseErrorKind::BadHeaderLength(header_len) });
    }
    let header_start = c.pos;
    let format = c.u16()?;
    if format > 1 {
        return Err(ParseError { offset: header_start, kind: ParseErrorKind::UnsupportedFormat(format) });
    }
    let ntracks = c.u16()?;
    let division_at = c.pos;
    let division = c.u16()?;
    if division & 0x8000 != 0 {
        return Err(ParseError { offset: division_at, kind: ParseErrorKind::SmpteDivision });
    }
    if division == 0 {
        return Err(ParseError { offset: division_at, kind: ParseErrorKind::ZeroPpq });
    }
    c.pos = header_start;
    c.take(header_len as usize)?;

    let mut tracks: Vec<Vec<RawEvent>> = Vec::new();
    while c.pos < bytes.len() {
        let chunk_at = c.pos;
        let id = c.take(4)?;
        let len = c.u32()? as usize;
        let body_at = c.pos;
        let body = c.take(len).map_err(|_| ParseError { offset: chunk_at, kind: ParseErrorKind::Truncated })?;
        if id == b"MTrk" {
            tracks.push(parse_track(body, body_at)?);
        }
    }
    if tracks.len() < ntracks as usize {
        return Err(ParseError {
            offset: bytes.len(),
            kind: ParseErrorKind::MissingTracks { expected: ntracks, found: tracks.len() as u16 },
        });
    }

    // Stable sort keeps track order, then in-track order, at equal ticks.
    let mut events: Vec<RawEvent> = tracks.into_iter().flatten().collect();
    events.sort_by_key(|e| e.tick);
    let tempo_map = TempoMap::new(
        division,
        events.iter().filter_map(|e| match e.kind {
            RawEventKind::TempoChange { micros_per_quarter } => Some(TempoEntry { tick: e.tick, micros_per_quarter }),
            _ => None,
        }),
    );
    Ok(Smf { format, tempo_map, events })
}

fn parse_track(body: &[u8], base: usize) -> Result<Vec<RawEvent>, ParseError> {
    let rebase = |mut e: ParseError| {
        e.offset += base;
        e
    };
    let mut c = Cursor { bytes: body, pos: 0 };
    let mut events = Vec::new();
    let mut tick = 0u64;
    let mut running: Option<u8> = None;
    while c.pos < body.len() {
        tick += c.vlq().map_err(rebase)? as u64;
        let at = c.pos;
        let first = c.peek().map_err(rebase)?;
        let status = if first & 0x80 != 0 {
            c.pos += 1;
            first
        } else {
            running.ok_or_else(|| rebase(c.err(ParseErrorKind::MissingRunningStatus)))?
        };
        let kind = match status {
            0xff => {
                running = None;
                let meta_type = c.u8().map_err(rebase)?;
                let len = c.vlq().map_err(rebase)? as usize;
                let data = c.take(len).map_err(rebase)?;
                match meta_type {
                    0x2f => {
                        events.push(RawEvent { tick, kind: RawEventKind::Other });
                        break;
                    }
                    0x51 => {
                        let us = match data {
                            [a, b, d] => u32::from_be_bytes([0, *a, *b, *d]),
                            _ => 0,
                        };
                        if us == 0 {
                            return Err(ParseError { offset: base + at, kind: ParseErrorKind::InvalidTempo });
                        }
                        RawEventKind::TempoChange { micros_per_quarter: us }
                    }
                    _ => RawEventKind::Other,
                }
            }
            0xf0 | 0xf7 => {
                running = None;
                let len = c.vlq().map_err(rebase)? as usize;
                c.take(len).map_err(rebase)?;
                RawEventKind::Other
            }
            0xf1..=0xfe => {
                return Err(ParseError { offset: base + at, kind: ParseErrorKind::UnexpectedStatus(status) });
            }
            _ => {
                running = Some(status);
                let channel = status & 0x0f;
                match status & 0xf0 {
                    0x80 | 0x90 => {
                        let pitch = c.data_byte().map_err(rebase)?;
                        let velocity = c.data_byte().map_err(rebase)?;
                        if status & 0xf0 == 0x90 {
                            RawEventKind::NoteOn { channel, pitch, velocity }
                        } else {
                            RawEventKind::NoteOff { channel, pitch, velocity }
                        }
                    }
                    0xa0 | 0xb0 | 0xe0 => {
                        c.data_byte().map_err(rebase)?;
                        c.data_byte().map_err(rebase)?;
                        RawEventKind::Other
                    }
                    _ => {
                        c.data_byte().map_err(rebase)?;
                        RawEventKind::Other
                    }
                }
            }
        };
        events.push(RawEvent { tick, kind });
    }
    Ok(events)
}

/// A paired note still in the tick domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TickNote {
    pub channel: u8,
    pub pitch: u8,
    pub velocity: u8,
    pub on_tick: u64,
    pub off_tick: u64,
}

/// Recoverable irregularities found while pairing notes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairingDiagnostics {
    /// Note-offs with no matching open note-on; skipped.
    pub orphan_note_offs: usize,
    /// Note-ons never closed; closed at the final event tick.
    pub unclosed_notes: usize,
    /// Notes whose off tick equals their on tick; dropped.
    pub zero_length_notes: usize,
}

/// Pair note-ons with the earliest following note-off of the same pitch and
/// channel (first in, first out). A note-on with velocity 0 counts as a
/// note-off.
pub fn pair_note_ticks(events: &[RawEvent]) -> (Vec<TickNote>, PairingDiagnostics) {
    let mut diag = PairingDiagnostics::default();
    let mut open: BTreeMap<(u8, u8), VecDeque<(u64, u8)>> = BTreeMap::new();
    let mut notes = Vec::new();
    let close = |notes: &mut Vec<TickNote>, diag: &mut PairingDiagnostics, key: (u8, u8), on: (u64, u8), off: u64| {
        if off > on.0 {
            notes.push(TickNote { channel: key.0, pitch: key.1, velocity: on.1, on_tick: on.0, off_tick: off });
        } else {
            diag.zero_length_notes += 1;
        }
    };
    for e in events {
        match e.kind {
            RawEventKind::NoteOn { channel, pitch, velocity } if velocity > 0 => {
                open.entry((channel, pitch)).or_default().push_back((e.tick, velocity));
            }
            RawEventKind::NoteOn { channel, pitch, .. } | RawEventKind::NoteOff { channel, pitch, .. } => {
                match open.get_mut(&(channel, pitch)).and_then(VecDeque::pop_front) {
                    Some(on) => close(&mut notes, &mut diag, (channel, pitch), on, e.tick),
                    None => diag.orphan_note_offs += 1,
                }
            }
            _ => {}
        }
    }
    let end = events.last().map_or(0, |e| e.tick);
    for (key, queue) in open {
        for on in queue {
            diag.unclosed_notes += 1;
            close(&mut notes, &mut diag, key, on, end);
        }
    }
    notes.sort_by_key(|n| (n.on_tick, n.pitch, n.channel));
    (notes, diag)
}

/// One recorded note in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NoteEvent {
    pub pitch: u8,
    pub onset_seconds: f64,
    pub duration_seconds: f64,
    pub velocity: u8,
    pub channel: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coord: Option<FretboardCoord>,
}

impl NoteEvent {
    pub fn end_seconds(&self) -> f64 {
        self.onset_seconds + self.duration_seconds
    }
}

pub fn sort_notes(notes: &mut [NoteEvent]) {
    notes.sort_by(|a, b| a.onset_seconds.total_cmp(&b.onset_seconds).then(a.pitch.cmp(&b.pitch)));
}

/// Pair notes and convert their ticks to seconds.
pub fn pair_notes(events: &[RawEvent], tempo_map: &TempoMap) -> (Vec<NoteEvent>, PairingDiagnostics) {
    let (ticks, diag) = pair_note_ticks(events);
    let mut notes: Vec<NoteEvent> = ticks
        .iter()
        .map(|n| {
            let onset = tempo_map.ticks_to_seconds(n.on_tick);
            NoteEvent {
                pitch: n.pitch,
                onset_seconds: onset,
                duration_seconds: tempo_map.ticks_to_seconds(n.off_tick) - onset,
                velocity: n.velocity,
                channel: n.channel,
                coord: None,
            }
        })
        .collect();
    sort_notes(&mut notes);
    (notes, diag)
}

/// MIDI channel → 1-based string number.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChannelMap(pub BTreeMap<u8, u8>);

impl ChannelMap {
    /// Per-string pickups: channel 0 carries string 1, channel 1 string 2, …
    pub fn hexaphonic(strings: usize) -> Self {
        Self((0..strings.min(16) as u8).map(|ch| (ch, ch + 1)).collect())
    }

    /// A map covering no channel, which sends every note to the heuristic.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn string_for(&self, channel: u8) -> Option<u8> {
        self.0.get(&channel).copied()
    }
}

/// How a note's fretboard position was determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FretInference {
    /// The channel map named the string.
    Mapped(FretboardCoord),
    /// Lowest fret among all positions, lowest string number on ties.
    Heuristic(FretboardCoord),
    /// The channel map named a string on which the pitch cannot be fretted.
    ChannelMismatch,
    /// No string can play the pitch.
    Unplayable,
}

impl FretInference {
    pub fn coord(self) -> Option<FretboardCoord> {
        match self {
            Self::Mapped(c) | Self::Heuristic(c) => Some(c),
            Self::ChannelMismatch | Self::Unplayable => None,
        }
    }
}

pub fn infer_string_fret(note: &NoteEvent, channel_map: Option<&ChannelMap>, board: &Fretboard) -> FretInference {
    if let Some(string) = channel_map.and_then(|m| m.string_for(note.channel)) {
        let Some(open) = board.tuning.open_pitch(string) else {
            return FretInference::ChannelMismatch;
        };
        return match note.pitch.checked_sub(open) {
            Some(fret) if fret <= board.fret_count => FretInference::Mapped(FretboardCoord::new(string, fret)),
            _ => FretInference::ChannelMismatch,
        };
    }
    board
        .coords_for_pitch(note.pitch)
        .into_iter()
        .min_by_key(|c| (c.fret, c.string))
        .map_or(FretInference::Unplayable, FretInference::Heuristic)
}

/// Everything that went slightly wrong while reading one file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestDiagnostics {
    #[serde(flatten)]
    pub pairing: PairingDiagnostics,
    pub channel_mismatches: usize,
    pub unplayable_notes: usize,
}

impl IngestDiagnostics {
    pub fn is_clean(&self) -> bool {
        *self == Self::default()
    }
}

/// Attach fretboard coordinates to notes in place, tallying failures.
pub fn assign_coords(
    notes: &mut [NoteEvent],
    channel_map: Option<&ChannelMap>,
    board: &Fretboard,
    diag: &mut IngestDiagnostics,
) {
    for note in notes {
        let inference = infer_string_fret(note, channel_map, board);
        match inference {
            FretInference::ChannelMismatch => diag.channel_mismatches += 1,
            FretInference::Unplayable => diag.unplayable_notes += 1,
            _ => {}
        }
        note.coord = inference.coord();
    }
}

/// Parse, pair and place all notes of one file.
pub fn read_notes(
    bytes: &[u8],
    channel_map: Option<&ChannelMap>,
    board: &Fretboard,
) -> Result<(Vec<NoteEvent>, IngestDiagnostics), ParseError> {
    let smf = parse_smf(bytes)?;
    let (mut notes, pairing) = pair_notes(&smf.events, &smf.tempo_map);
    let mut diag = IngestDiagnostics { pairing, ..Default::default() };
    assign_coords(&mut notes, channel_map, board, &mut diag);
    Ok((notes, diag))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ExerciseKind {
    ScalePattern,
    Riff,
    Improvisation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecordingMeta {
    pub player: String,
    pub exercise: String,
    pub recorded_at: DateTime<Utc>,
    pub exercise_kind: ExerciseKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Recording {
    pub id: String,
    pub meta: RecordingMeta,
    pub notes: Vec<NoteEvent>,
}

impl Recording {
    /// Sorts the notes by onset, then pitch.
    pub fn new(id: impl Into<String>, meta: RecordingMeta, mut notes: Vec<NoteEvent>) -> Self {
        sort_notes(&mut notes);
        Self { id: id.into(), meta, notes }
    }
}
