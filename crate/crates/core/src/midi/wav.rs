use std::f64::consts::PI;

use crate::sonify::NoteEvent;

/// Peak amplitude of a full-velocity note, as a fraction of full scale.
const NOTE_GAIN: f64 = 0.3;
const RAMP_MS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavOptions {
    pub sample_rate: u32,
    /// Silence appended after the last note ends.
    pub tail_seconds: f64,
}

impl Default for WavOptions {
    fn default() -> Self {
        Self {
            sample_rate: 44_100,
            tail_seconds: 0.5,
        }
    }
}

fn pitch_hz(pitch: u8) -> f64 {
    440.0 * 2f64.powf((f64::from(pitch) - 69.0) / 12.0)
}

/// Linear pan gains rescaled so that `left^2 + right^2 == 1`.
fn pan_gains(pan: u8) -> (f64, f64) {
    let p = f64::from(pan.min(127)) / 127.0;
    let (l, r) = (1.0 - p, p);
    let norm = (l * l + r * r).sqrt();
    (l / norm, r / norm)
}

/// Render notes as summed sines into a 16-bit stereo PCM WAV file.
pub fn render_wav(events: &[NoteEvent], options: &WavOptions) -> Vec<u8> {
    assert!(options.sample_rate >= 8000, "sample rate must be at least 8 kHz");
    let sr = f64::from(options.sample_rate);
    let to_frames = |ms: f64| (ms * sr / 1000.0).round() as usize;

    let notes_end = events
        .iter()
        .map(|e| to_frames((e.onset_ms + e.duration_ms) as f64))
        .max()
        .unwrap_or(0);
    let frames = notes_end + (options.tail_seconds.max(0.0) * sr).round() as usize;

    let mut left = vec![0.0f64; frames];
    let mut right = vec![0.0f64; frames];
    for e in events {
        let start = to_frames(e.onset_ms as f64);
        let len = to_frames(e.duration_ms as f64);
        let ramp = to_frames(RAMP_MS).min(len / 2).max(1);
        let omega = 2.0 * PI * pitch_hz(e.pitch) / sr;
        let amp = NOTE_GAIN * f64::from(e.velocity) / 127.0;
        let (gl, gr) = pan_gains(e.pan);
        for i in 0..len {
            let envelope = (i as f64 / ramp as f64)
                .min((len - i) as f64 / ramp as f64)
                .min(1.0);
            let s = amp * envelope * (omega * i as f64).sin();
            left[start + i] += s * gl;
            right[start + i] += s * gr;
        }
    }

    let data_len = frames * 4;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&options.sample_rate.to_le_bytes());
    out.extend_from_slice(&(options.sample_rate * 4).to_le_bytes());
    out.extend_from_slice(&4u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for (l, r) in left.iter().zip(&right) {
        out.extend_from_slice(&to_i16(*l).to_le_bytes());
        out.extend_from_slice(&to_i16(*r).to_le_bytes());
    }
    out
}

fn to_i16(v: f64) -> i16 {
    (v * 32767.0).round().clamp(-32768.0, 32767.0) as i16
}
