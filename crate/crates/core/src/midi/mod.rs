//! Standard MIDI File (format 0) output and a sine-synth WAV preview.

mod wav;

pub use wav::{render_wav, WavOptions};

use thiserror::Error;

use crate::sonify::NoteEvent;

pub const DEFAULT_TICKS_PER_QUARTER: u16 = 480;
/// Microseconds per quarter note (120 bpm).
pub const DEFAULT_TEMPO: u32 = 500_000;

const PAN_CONTROLLER: u8 = 10;
const NOTE_OFF_VELOCITY: u8 = 64;

#[derive(Debug, Error, PartialEq)]
pub enum MidiError {
    #[error("note events are not sorted by onset (event {index} starts at {onset_ms} ms, before {previous_ms} ms)")]
    Unsorted {
        index: usize,
        onset_ms: u64,
        previous_ms: u64,
    },
    #[error("invalid MIDI document: {0}")]
    InvalidDocument(String),
}

/// Channel-0 messages used by the sonifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelMessage {
    NoteOn { key: u8, velocity: u8 },
    NoteOff { key: u8, velocity: u8 },
    Controller { controller: u8, value: u8 },
}

impl ChannelMessage {
    fn bytes(self) -> [u8; 3] {
        match self {
            ChannelMessage::NoteOff { key, velocity } => [0x80, key, velocity],
            ChannelMessage::NoteOn { key, velocity } => [0x90, key, velocity],
            ChannelMessage::Controller { controller, value } => [0xB0, controller, value],
        }
    }

    /// Same-tick ordering: releases, then controllers, then new notes.
    fn rank(self) -> u8 {
        match self {
            ChannelMessage::NoteOff { .. } => 0,
            ChannelMessage::Controller { .. } => 1,
            ChannelMessage::NoteOn { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimedMessage {
    /// Absolute time in ticks.
    pub tick: u64,
    pub message: ChannelMessage,
}

/// Single-track document. The tempo meta event and End-of-Track are implied
/// and added by [`write_smf`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MidiDocument {
    pub ticks_per_quarter: u16,
    pub tempo: u32,
    /// Sorted by tick.
    pub events: Vec<TimedMessage>,
}

impl MidiDocument {
    pub fn empty(ticks_per_quarter: u16, tempo: u32) -> Self {
        Self {
            ticks_per_quarter,
            tempo,
            events: Vec::new(),
        }
    }

    pub fn ms_to_ticks(&self, ms: u64) -> u64 {
        ms_to_ticks(ms, self.ticks_per_quarter, self.tempo)
    }
}

/// `round(ms * ticks_per_quarter * 1000 / tempo)`, in integer arithmetic.
pub fn ms_to_ticks(ms: u64, ticks_per_quarter: u16, tempo: u32) -> u64 {
    let num = u128::from(ms) * u128::from(ticks_per_quarter) * 1000;
    let den = u128::from(tempo);
    ((2 * num + den) / (2 * den)) as u64
}

/// Convert note events to timed channel messages.
///
/// A pan controller precedes a note-on whenever the pan differs from the
/// last one sent. Note-offs are placed at the tick of `onset + duration`.
pub fn events_to_midi(
    events: &[NoteEvent],
    ticks_per_quarter: u16,
    tempo: u32,
) -> Result<MidiDocument, MidiError> {
    if ticks_per_quarter == 0 || ticks_per_quarter > 0x7FFF || tempo == 0 || tempo > 0xFF_FFFF {
        return Err(MidiError::InvalidDocument(format!(
            "ticks_per_quarter {ticks_per_quarter} / tempo {tempo} out of range"
        )));
    }
    for (i, w) in events.windows(2).enumerate() {
        if w[1].onset_ms < w[0].onset_ms {
            return Err(MidiError::Unsorted {
                index: i + 1,
                onset_ms: w[1].onset_ms,
                previous_ms: w[0].onset_ms,
            });
        }
    }

    let mut doc = MidiDocument::empty(ticks_per_quarter, tempo);
    // (tick, rank, sequence) keeps each pan change right before its note-on.
    let mut keyed: Vec<(u64, u8, usize, ChannelMessage)> = Vec::with_capacity(events.len() * 3);
    let mut last_pan = None;
    for e in events {
        let on = doc.ms_to_ticks(e.onset_ms);
        let off = doc.ms_to_ticks(e.onset_ms + e.duration_ms);
        if last_pan != Some(e.pan) {
            let msg = ChannelMessage::Controller {
                controller: PAN_CONTROLLER,
                value: e.pan,
            };
            keyed.push((on, msg.rank(), keyed.len(), msg));
            last_pan = Some(e.pan);
        }
        let msg = ChannelMessage::NoteOn {
            key: e.pitch,
            velocity: e.velocity,
        };
        keyed.push((on, msg.rank(), keyed.len(), msg));
        let msg = ChannelMessage::NoteOff {
            key: e.pitch,
            velocity: NOTE_OFF_VELOCITY,
        };
        keyed.push((off, msg.rank(), keyed.len(), msg));
    }
    keyed.sort_unstable_by_key(|&(tick, rank, seq, _)| (tick, rank, seq));
    doc.events = keyed
        .into_iter()
        .map(|(tick, _, _, message)| TimedMessage { tick, message })
        .collect();
    Ok(doc)
}

/// Append `value` as a MIDI variable-length quantity (max 0x0FFF_FFFF).
pub fn write_vlq(out: &mut Vec<u8>, value: u32) {
    assert!(value <= 0x0FFF_FFFF, "VLQ value {value:#x} exceeds 28 bits");
    let mut started = false;
    for shift in [21u32, 14, 7] {
        let group = ((value >> shift) & 0x7F) as u8;
        if started || group != 0 {
            out.push(group | 0x80);
            started = true;
        }
    }
    out.push((value & 0x7F) as u8);
}

/// Serialize as a format-0 SMF: header, then one track holding the tempo
/// meta event, the channel messages (no running status) and End-of-Track.
pub fn write_smf(doc: &MidiDocument) -> Vec<u8> {
    let mut track = Vec::with_capacity(16 + doc.events.len() * 5);
    track.push(0x00);
    track.extend_from_slice(&[0xFF, 0x51, 0x03]);
    track.extend_from_slice(&doc.tempo.to_be_bytes()[1..]);

    let mut now = 0u64;
    for e in &doc.events {
        let delta = e.tick.saturating_sub(now);
        write_vlq(&mut track, u32::try_from(delta).expect("delta time fits in 28 bits"));
        track.extend_from_slice(&e.message.bytes());
        now = now.max(e.tick);
    }
    track.extend_from_slice(&[0x00, 0xFF, 0x2F, 0x00]);

    let mut out = Vec::with_capacity(22 + track.len());
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&0u16.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&doc.ticks_per_quarter.to_be_bytes());
    out.extend_from_slice(b"MTrk");
    out.extend_from_slice(&(track.len() as u32).to_be_bytes());
    out.extend_from_slice(&track);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn note(pitch: u8, pan: u8, onset_ms: u64) -> NoteEvent {
        NoteEvent {
            pitch,
            pan,
            velocity: 127,
            onset_ms,
            duration_ms: 20,
            row: 0,
            col: 0,
        }
    }

    fn vlq(v: u32) -> Vec<u8> {
        let mut out = Vec::new();
        write_vlq(&mut out, v);
        out
    }

    #[test]
    fn vlq_encodings() {
        assert_eq!(vlq(0), [0x00]);
        assert_eq!(vlq(0x40), [0x40]);
        assert_eq!(vlq(127), [0x7F]);
        assert_eq!(vlq(128), [0x81, 0x00]);
        assert_eq!(vlq(0x2000), [0xC0, 0x00]);
        assert_eq!(vlq(16383), [0xFF, 0x7F]);
        assert_eq!(vlq(16384), [0x81, 0x80, 0x00]);
        assert_eq!(vlq(0x0FFF_FFFF), [0xFF, 0xFF, 0xFF, 0x7F]);
    }

    #[test]
    fn tick_conversion() {
        assert_eq!(ms_to_ticks(20, 480, 500_000), 19);
        assert_eq!(ms_to_ticks(25, 480, 500_000), 24);
        assert_eq!(ms_to_ticks(1000, 480, 500_000), 960);
    }

    #[test]
    fn empty_document_bytes() {
        let doc = events_to_midi(&[], 480, 500_000).unwrap();
        assert!(doc.events.is_empty());
        assert_eq!(
            write_smf(&doc),
            [
                0x4D, 0x54, 0x68, 0x64, 0x00, 0x00, 0x00, 0x06, 0x00, 0x00, 0x00, 0x01, 0x01, 0xE0,
                0x4D, 0x54, 0x72, 0x6B, 0x00, 0x00, 0x00, 0x0B, //
                0x00, 0xFF, 0x51, 0x03, 0x07, 0xA1, 0x20, //
                0x00, 0xFF, 0x2F, 0x00,
            ]
        );
    }

    #[test]
    fn single_note_messages() {
        let doc = events_to_midi(&[note(96, 0, 0)], 480, 500_000).unwrap();
        assert_eq!(
            doc.events,
            vec![
                TimedMessage { tick: 0, message: ChannelMessage::Controller { controller: 10, value: 0 } },
                TimedMessage { tick: 0, message: ChannelMessage::NoteOn { key: 96, velocity: 127 } },
                TimedMessage { tick: 19, message: ChannelMessage::NoteOff { key: 96, velocity: 64 } },
            ]
        );
    }

    #[test]
    fn equal_pans_share_one_controller() {
        let doc = events_to_midi(&[note(60, 30, 0), note(62, 30, 25)], 480, 500_000).unwrap();
        let pans = doc
            .events
            .iter()
            .filter(|e| matches!(e.message, ChannelMessage::Controller { .. }))
            .count();
        assert_eq!(pans, 1);
    }

    #[test]
    fn release_precedes_next_attack_at_same_tick() {
        let mut a = note(60, 0, 0);
        a.duration_ms = 25;
        let doc = events_to_midi(&[a, note(60, 5, 25)], 480, 500_000).unwrap();
        let kinds: Vec<u8> = doc.events.iter().map(|e| e.message.bytes()[0]).collect();
        assert_eq!(kinds, vec![0xB0, 0x90, 0x80, 0xB0, 0x90, 0x80]);
    }

    #[test]
    fn unsorted_input_is_rejected() {
        assert_eq!(
            events_to_midi(&[note(60, 0, 50), note(60, 0, 25)], 480, 500_000),
            Err(MidiError::Unsorted { index: 1, onset_ms: 25, previous_ms: 50 })
        );
    }

    #[test]
    fn delta_times_are_relative() {
        let doc = events_to_midi(&[note(96, 0, 0)], 480, 500_000).unwrap();
        let bytes = write_smf(&doc);
        // tempo(7) + [00 B0 0A 00] + [00 90 60 7F] + [13 80 60 40] + EoT(4)
        assert_eq!(
            &bytes[22 + 7..22 + 19],
            &[0x00, 0xB0, 0x0A, 0x00, 0x00, 0x90, 0x60, 0x7F, 0x13, 0x80, 0x60, 0x40][..]
        );
    }
}
