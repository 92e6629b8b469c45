//! A small, dependency-free Standard MIDI File emitter.
//!
//! This crate exists to produce fixture files. It shares no code with the
//! parser in `practice-scope`, so files written here can serve as an
//! independent oracle for parser round-trip tests.
//!
//! ```
//! use smf_writer::{SmfWriter, TrackBuilder, WrittenNote};
//!
//! let mut track = TrackBuilder::new();
//! track.tempo(0, 500_000);
//! track.notes(&[WrittenNote { channel: 0, key: 60, velocity: 90, on_tick: 0, off_tick: 480 }]);
//! let bytes = SmfWriter::new(480).track(track).to_bytes();
//! assert_eq!(&bytes[..4], b"MThd");
//! ```

/// A note expressed directly in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WrittenNote {
    pub channel: u8,
    pub key: u8,
    pub velocity: u8,
    pub on_tick: u32,
    pub off_tick: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Message {
    NoteOn { channel: u8, key: u8, velocity: u8 },
    NoteOff { channel: u8, key: u8, velocity: u8 },
    Controller { channel: u8, controller: u8, value: u8 },
    Program { channel: u8, program: u8 },
    Tempo(u32),
    Text(Vec<u8>),
}

impl Message {
    // Notes off before anything else at equal ticks, so back-to-back notes
    // of the same key never overlap.
    fn rank(&self) -> u8 {
        match self {
            Message::NoteOff { .. } => 1,
            Message::NoteOn { velocity: 0, .. } => 1,
            Message::Tempo(_) | Message::Text(_) => 0,
            _ => 2,
        }
    }
}

/// Accumulates absolute-tick events for one `MTrk` chunk.
#[derive(Debug, Clone, Default)]
pub struct TrackBuilder {
    events: Vec<(u32, Message)>,
    zero_velocity_off: bool,
}

impl TrackBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Write note-offs as note-on messages with velocity 0.
    pub fn zero_velocity_note_off(mut self, yes: bool) -> Self {
        self.zero_velocity_off = yes;
        self
    }

    pub fn tempo(&mut self, tick: u32, micros_per_quarter: u32) -> &mut Self {
        assert!(micros_per_quarter > 0 && micros_per_quarter < (1 << 24));
        self.events.push((tick, Message::Tempo(micros_per_quarter)));
        self
    }

    pub fn text(&mut self, tick: u32, text: &str) -> &mut Self {
        self.events.push((tick, Message::Text(text.as_bytes().to_vec())));
        self
    }

    pub fn note_on(&mut self, tick: u32, channel: u8, key: u8, velocity: u8) -> &mut Self {
        self.events.push((tick, Message::NoteOn { channel, key, velocity }));
        self
    }

    pub fn note_off(&mut self, tick: u32, channel: u8, key: u8) -> &mut Self {
        let msg = if self.zero_velocity_off {
            Message::NoteOn { channel, key, velocity: 0 }
        } else {
            Message::NoteOff { channel, key, velocity: 64 }
        };
        self.events.push((tick, msg));
        self
    }

    pub fn controller(&mut self, tick: u32, channel: u8, controller: u8, value: u8) -> &mut Self {
        self.events.push((tick, Message::Controller { channel, controller, value }));
        self
    }

    pub fn program(&mut self, tick: u32, channel: u8, program: u8) -> &mut Self {
        self.events.push((tick, Message::Program { channel, program }));
        self
    }

    pub fn notes(&mut self, notes: &[WrittenNote]) -> &mut Self {
        for n in notes {
            assert!(n.off_tick >= n.on_tick, "note ends before it starts");
            self.note_on(n.on_tick, n.channel, n.key, n.velocity);
            self.note_off(n.off_tick, n.channel, n.key);
        }
        self
    }

    fn encode(&self, running_status: bool) -> Vec<u8> {
        let mut events: Vec<(usize, &(u32, Message))> = self.events.iter().enumerate().collect();
        events.sort_by_key(|(i, (tick, msg))| (*tick, msg.rank(), *i));

        let mut out = Vec::new();
        let mut last_tick = 0u32;
        let mut status: Option<u8> = None;
        for (_, (tick, msg)) in events {
            push_vlq(&mut out, tick - last_tick);
            last_tick = *tick;
            let mut channel_msg = |out: &mut Vec<u8>, byte: u8, data: &[u8]| {
                if !(running_status && status == Some(byte)) {
                    out.push(byte);
                }
                status = Some(byte);
                out.extend_from_slice(data);
            };
            match msg {
                Message::NoteOn { channel, key, velocity } => {
                    channel_msg(&mut out, 0x90 | (channel & 0x0f), &[*key, *velocity])
                }
                Message::NoteOff { channel, key, velocity } => {
                    channel_msg(&mut out, 0x80 | (channel & 0x0f), &[*key, *velocity])
                }
                Message::Controller { channel, controller, value } => {
                    channel_msg(&mut out, 0xb0 | (channel & 0x0f), &[*controller, *value])
                }
                Message::Program { channel, program } => {
                    channel_msg(&mut out, 0xc0 | (channel & 0x0f), &[*program])
                }
                Message::Tempo(us) => {
                    out.extend_from_slice(&[0xff, 0x51, 0x03]);
                    out.extend_from_slice(&us.to_be_bytes()[1..]);
                    status = None;
                }
                Message::Text(bytes) => {
                    out.extend_from_slice(&[0xff, 0x01]);
                    push_vlq(&mut out, bytes.len() as u32);
                    out.extend_from_slice(bytes);
                    status = None;
                }
            }
        }
        out.extend_from_slice(&[0x00, 0xff, 0x2f, 0x00]);
        out
    }
}

/// Assembles the header and track chunks.
#[derive(Debug, Clone)]
pub struct SmfWriter {
    format: u16,
    ppq: u16,
    running_status: bool,
    tracks: Vec<TrackBuilder>,
}

impl SmfWriter {
    pub fn new(ppq: u16) -> Self {
        assert!(ppq > 0 && ppq < 0x8000, "ppq must fit in 15 bits");
        Self { format: 1, ppq, running_status: true, tracks: Vec::new() }
    }

    /// Force the header format word. Values other than 0 and 1 are useful for
    /// negative tests.
    pub fn format(mut self, format: u16) -> Self {
        self.format = format;
        self
    }

    pub fn running_status(mut self, yes: bool) -> Self {
        self.running_status = yes;
        self
    }

    pub fn track(mut self, track: TrackBuilder) -> Self {
        self.tracks.push(track);
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"MThd");
        out.extend_from_slice(&6u32.to_be_bytes());
        out.extend_from_slice(&self.format.to_be_bytes());
        out.extend_from_slice(&(self.tracks.len() as u16).to_be_bytes());
        out.extend_from_slice(&self.ppq.to_be_bytes());
        for track in &self.tracks {
            let body = track.encode(self.running_status);
            out.extend_from_slice(b"MTrk");
            out.extend_from_slice(&(body.len() as u32).to_be_bytes());
            out.extend_from_slice(&body);
        }
        out
    }
}

/// Big-endian base-128 with continuation bits, at most four bytes.
pub fn push_vlq(out: &mut Vec<u8>, value: u32) {
    assert!(value <= 0x0fff_ffff, "delta time exceeds 28 bits");
    let mut groups = [0u8; 4];
    let mut n = 0;
    let mut v = value;
    loop {
        groups[n] = (v & 0x7f) as u8;
        n += 1;
        v >>= 7;
        if v == 0 {
            break;
        }
    }
    for i in (0..n).rev() {
        let cont = if i > 0 { 0x80 } else { 0 };
        out.push(groups[i] | cont);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vlq(v: u32) -> Vec<u8> {
        let mut out = Vec::new();
        push_vlq(&mut out, v);
        out
    }

    #[test]
    fn vlq_reference_values() {
        assert_eq!(vlq(0), [0x00]);
        assert_eq!(vlq(0x7f), [0x7f]);
        assert_eq!(vlq(200), [0x81, 0x48]);
        assert_eq!(vlq(0x3fff), [0xff, 0x7f]);
        assert_eq!(vlq(0x0fff_ffff), [0xff, 0xff, 0xff, 0x7f]);
    }

    #[test]
    fn running_status_elides_repeated_status_bytes() {
        let mut t = TrackBuilder::new();
        t.note_on(0, 0, 60, 90).note_on(0, 0, 64, 90);
        let with = SmfWriter::new(96).track(t.clone()).to_bytes();
        let without = SmfWriter::new(96).running_status(false).track(t).to_bytes();
        assert_eq!(without.len(), with.len() + 1);
    }

    #[test]
    fn offs_sort_before_ons_at_equal_ticks() {
        let mut t = TrackBuilder::new();
        t.notes(&[
            WrittenNote { channel: 0, key: 60, velocity: 80, on_tick: 0, off_tick: 10 },
            WrittenNote { channel: 0, key: 60, velocity: 80, on_tick: 10, off_tick: 20 },
        ]);
        let body = t.encode(false);
        // on@0, off@10, on@10, off@20, end of track
        assert_eq!(&body[..4], &[0x00, 0x90, 60, 80]);
        assert_eq!(&body[4..8], &[0x0a, 0x80, 60, 64]);
        assert_eq!(&body[8..12], &[0x00, 0x90, 60, 80]);
    }
}
