//! Depth frames to scheduled MIDI notes.
//!
//! Depth maps to pitch (nearer is higher), column maps to stereo pan and
//! row maps to the note's position within its column sweep. Columns are
//! played right to left, each from top to bottom.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::DepthFrame;
use crate::segment::Segmentation;

/// Highest pitch, produced at the near bound.
pub const TOP_PITCH: u8 = 96;
/// Exponent that stretches the near end of the depth range.
const CURVE: f64 = 0.8;
/// Quietest per-object velocity.
pub const MIN_OBJECT_VELOCITY: u8 = 40;

#[derive(Debug, Error, PartialEq)]
pub enum SonifyError {
    #[error("invalid sonify config: {0}")]
    InvalidConfig(String),
    #[error("cell labels are {got_w}x{got_h} but the grid is {want_w}x{want_h}")]
    LabelShape {
        got_w: usize,
        got_h: usize,
        want_w: usize,
        want_h: usize,
    },
    #[error("segmentation has {labels} labels but the frame has {readings} depth readings")]
    LabelCount { labels: usize, readings: usize },
    #[error("object id {id} out of range for {num_objects} objects")]
    ObjectOutOfRange { id: usize, num_objects: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SonifyConfig {
    /// Near depth bound in meters.
    pub start: f64,
    /// Far depth bound in meters.
    pub end: f64,
    /// Number of two-semitone pitch steps between the bounds.
    pub range: u32,
    pub grid_width: usize,
    pub grid_height: usize,
    /// Milliseconds between consecutive traversal slots.
    pub inter_onset: u32,
    pub note_duration: u32,
    /// Depths nearer than `start` play the top pitch instead of resting.
    pub clamp_near: bool,
    pub base_velocity: u8,
}

impl Default for SonifyConfig {
    fn default() -> Self {
        Self {
            start: 0.3,
            end: 6.0,
            range: 30,
            grid_width: 16,
            grid_height: 12,
            inter_onset: 25,
            note_duration: 20,
            clamp_near: true,
            base_velocity: 100,
        }
    }
}

impl SonifyConfig {
    pub fn validate(&self) -> Result<(), SonifyError> {
        let bad = |m: &str| Err(SonifyError::InvalidConfig(m.to_string()));
        if !(self.start.is_finite() && self.end.is_finite()) || self.start < 0.0 || self.end <= self.start {
            return bad("need end > start >= 0");
        }
        if self.range == 0 || 2 * self.range > u32::from(TOP_PITCH) {
            return bad("range must be in 1..=48");
        }
        if self.grid_width == 0 || self.grid_height == 0 {
            return bad("grid must be at least 1x1");
        }
        if !(1..=127).contains(&self.base_velocity) {
            return bad("base_velocity must be in 1..=127");
        }
        Ok(())
    }

    pub fn lowest_pitch(&self) -> u8 {
        TOP_PITCH - 2 * self.range as u8
    }
}

/// Pitch for one depth reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Note {
    Pitch(u8),
    Rest,
}

impl Note {
    pub fn pitch(self) -> Option<u8> {
        match self {
            Note::Pitch(p) => Some(p),
            Note::Rest => None,
        }
    }
}

/// `96 - 2 * floor(range * t^0.8)` with `t = (x - start) / (end - start)`.
///
/// Zero (no reading) and depths past `end` rest. Depths before `start` clamp
/// to the top pitch or rest, per `clamp_near`.
pub fn depth_to_note(x: f64, config: &SonifyConfig) -> Note {
    if x == 0.0 || !x.is_finite() || x > config.end {
        return Note::Rest;
    }
    if x < config.start {
        return if config.clamp_near {
            Note::Pitch(TOP_PITCH)
        } else {
            Note::Rest
        };
    }
    let t = ((x - config.start) / (config.end - config.start)).clamp(0.0, 1.0);
    let step = (f64::from(config.range) * t.powf(CURVE)).floor() as u32;
    Note::Pitch(TOP_PITCH - 2 * step.min(config.range) as u8)
}

/// Round to nearest with exact halves going down.
fn round_half_down(v: f64) -> i64 {
    (v - 0.5).ceil() as i64
}

fn nearest_source(out_index: usize, src_len: usize, out_len: usize) -> usize {
    let center = (out_index as f64 + 0.5) * src_len as f64 / out_len as f64 - 0.5;
    round_half_down(center).clamp(0, src_len as i64 - 1) as usize
}

/// Nearest-neighbour resample to `grid_width x grid_height`: each output
/// cell takes the source pixel closest to its centre.
pub fn downsample(frame: &DepthFrame, config: &SonifyConfig) -> DepthFrame {
    let (w, h) = (config.grid_width, config.grid_height);
    let cols: Vec<usize> = (0..w).map(|c| nearest_source(c, frame.width(), w)).collect();
    let mut depth = Vec::with_capacity(w * h);
    for r in 0..h {
        let sr = nearest_source(r, frame.height(), h);
        depth.extend(cols.iter().map(|&sc| frame.at(sr, sc)));
    }
    DepthFrame::new(w, h, depth).expect("resampled frame keeps source invariants")
}

/// Source-pixel rectangle `[row0, row1) x [col0, col1)` covered by a grid cell.
pub fn cell_block(
    row: usize,
    col: usize,
    frame_width: usize,
    frame_height: usize,
    config: &SonifyConfig,
) -> ([usize; 2], [usize; 2]) {
    let span = |i: usize, src: usize, out: usize| {
        let lo = i * src / out;
        let hi = ((i + 1) * src / out).max(lo + 1).min(src);
        [lo, hi]
    };
    (
        span(row, frame_height, config.grid_height),
        span(col, frame_width, config.grid_width),
    )
}

/// Hard left at column 0, hard right at the last column, centre for a
/// single column.
pub fn pan_for_column(col: usize, config: &SonifyConfig) -> u8 {
    if config.grid_width <= 1 {
        return 64;
    }
    (127.0 * col as f64 / (config.grid_width - 1) as f64).round() as u8
}

/// Evenly spaced velocities from 127 down to [`MIN_OBJECT_VELOCITY`].
pub fn velocity_for_object(object_id: usize, num_objects: usize) -> Result<u8, SonifyError> {
    if object_id >= num_objects {
        return Err(SonifyError::ObjectOutOfRange {
            id: object_id,
            num_objects,
        });
    }
    let span = f64::from(127 - MIN_OBJECT_VELOCITY);
    let step = span / (num_objects.max(2) - 1) as f64;
    Ok((127.0 - object_id as f64 * step).round() as u8)
}

/// One object id (or none) per grid cell, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellLabels {
    pub width: usize,
    pub height: usize,
    pub ids: Vec<Option<usize>>,
    pub num_objects: usize,
}

/// Per-cell object ids by majority vote over each cell's source pixels.
///
/// `seg` must label the frame's back-projected cloud, i.e. one label per
/// pixel with a reading, in row-major order. Discarded points do not vote;
/// ties go to the smaller id; cells without votes stay unlabeled.
pub fn cell_labels_from_segmentation(
    frame: &DepthFrame,
    seg: &Segmentation,
    config: &SonifyConfig,
) -> Result<CellLabels, SonifyError> {
    let readings = frame.depth().iter().filter(|d| **d > 0.0).count();
    if seg.labels.len() != readings {
        return Err(SonifyError::LabelCount {
            labels: seg.labels.len(),
            readings,
        });
    }
    let mut labels = seg.labels.iter();
    let pixel_labels: Vec<Option<u32>> = frame
        .depth()
        .iter()
        .map(|d| if *d > 0.0 { *labels.next().unwrap() } else { None })
        .collect();

    let (w, h) = (config.grid_width, config.grid_height);
    let mut ids = Vec::with_capacity(w * h);
    let mut votes: BTreeMap<u32, usize> = BTreeMap::new();
    for row in 0..h {
        for col in 0..w {
            let ([r0, r1], [c0, c1]) = cell_block(row, col, frame.width(), frame.height(), config);
            votes.clear();
            for r in r0..r1 {
                for l in pixel_labels[r * frame.width() + c0..r * frame.width() + c1].iter().flatten() {
                    *votes.entry(*l).or_default() += 1;
                }
            }
            // max_by_key keeps the last maximum; iterate ids descending so ties go low.
            let winner = votes.iter().rev().max_by_key(|(_, n)| **n).map(|(id, _)| *id as usize);
            ids.push(winner);
        }
    }
    Ok(CellLabels {
        width: w,
        height: h,
        ids,
        num_objects: seg.num_objects,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub pitch: u8,
    pub pan: u8,
    pub velocity: u8,
    pub onset_ms: u64,
    pub duration_ms: u64,
    pub row: usize,
    pub col: usize,
}

/// Traverse columns right to left, rows top to bottom. The k-th cell in that
/// order owns the slot starting at `k * inter_onset`; rests keep their slot
/// silent.
///
/// `frame` must already be the downsampled grid. With `labels`, a labeled
/// cell's velocity comes from [`velocity_for_object`]; unlabeled cells use
/// `base_velocity`.
pub fn schedule_frame(
    frame: &DepthFrame,
    config: &SonifyConfig,
    labels: Option<&CellLabels>,
) -> Result<Vec<NoteEvent>, SonifyError> {
    config.validate()?;
    if let Some(l) = labels {
        if l.width != frame.width() || l.height != frame.height() || l.ids.len() != l.width * l.height {
            return Err(SonifyError::LabelShape {
                got_w: l.width,
                got_h: l.height,
                want_w: frame.width(),
                want_h: frame.height(),
            });
        }
    }
    // Pan follows the grid actually passed in.
    let grid = SonifyConfig {
        grid_width: frame.width(),
        grid_height: frame.height(),
        ..*config
    };

    let mut events = Vec::new();
    let mut slot = 0u64;
    for col in (0..frame.width()).rev() {
        for row in 0..frame.height() {
            let onset_ms = slot * u64::from(config.inter_onset);
            slot += 1;
            let Note::Pitch(pitch) = depth_to_note(frame.at(row, col), config) else {
                continue;
            };
            let velocity = match labels.and_then(|l| l.ids[row * l.width + col].map(|id| (id, l.num_objects))) {
                Some((id, n)) => velocity_for_object(id, n)?,
                None => config.base_velocity,
            };
            events.push(NoteEvent {
                pitch,
                pan: pan_for_column(col, &grid),
                velocity,
                onset_ms,
                duration_ms: u64::from(config.note_duration),
                row,
                col,
            });
        }
    }
    Ok(events)
}

/// One JSON object per line.
pub fn events_to_json_lines(events: &[NoteEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("note events always serialize"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SonifyConfig {
        SonifyConfig::default()
    }

    #[test]
    fn bounds_map_to_extreme_pitches() {
        let c = cfg();
        assert_eq!(depth_to_note(c.start, &c), Note::Pitch(96));
        assert_eq!(depth_to_note(c.end, &c), Note::Pitch(36));
    }

    #[test]
    fn midpoint_regression() {
        assert_eq!(depth_to_note(3.15, &cfg()), Note::Pitch(62));
    }

    #[test]
    fn invalid_and_out_of_range_depths() {
        let c = cfg();
        assert_eq!(depth_to_note(0.0, &c), Note::Rest);
        assert_eq!(depth_to_note(6.01, &c), Note::Rest);
        assert_eq!(depth_to_note(0.1, &c), Note::Pitch(96));
        let no_clamp = SonifyConfig { clamp_near: false, ..c };
        assert_eq!(depth_to_note(0.1, &no_clamp), Note::Rest);
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        assert!(SonifyConfig { range: 48, ..cfg() }.validate().is_ok());
        assert!(SonifyConfig { range: 49, ..cfg() }.validate().is_err());
        assert!(SonifyConfig { end: 0.3, ..cfg() }.validate().is_err());
        assert!(SonifyConfig { grid_width: 0, ..cfg() }.validate().is_err());
    }

    #[test]
    fn pan_edges_and_middle() {
        let c = cfg();
        assert_eq!(pan_for_column(0, &c), 0);
        assert_eq!(pan_for_column(15, &c), 127);
        assert_eq!(pan_for_column(8, &c), 68);
        assert_eq!(pan_for_column(0, &SonifyConfig { grid_width: 1, ..c }), 64);
    }

    #[test]
    fn velocities() {
        assert_eq!(velocity_for_object(0, 1), Ok(127));
        assert_eq!(velocity_for_object(0, 2), Ok(127));
        assert_eq!(velocity_for_object(1, 2), Ok(40));
        let three: Vec<u8> = (0..3).map(|i| velocity_for_object(i, 3).unwrap()).collect();
        assert_eq!(three, vec![127, 84, 40]);
        assert!(velocity_for_object(3, 3).is_err());
    }

    #[test]
    fn downsample_identity_and_constant() {
        let c = cfg();
        let depth: Vec<f64> = (0..16 * 12).map(|i| i as f64 * 0.01).collect();
        let frame = DepthFrame::new(16, 12, depth).unwrap();
        assert_eq!(downsample(&frame, &c), frame);

        let big = DepthFrame::filled(640, 480, 1.25).unwrap();
        assert_eq!(downsample(&big, &c), DepthFrame::filled(16, 12, 1.25).unwrap());
    }

    #[test]
    fn downsample_index_map() {
        // 32 -> 16: centre (c + 0.5) * 2 - 0.5 = 2c + 0.5, rounded half down to 2c.
        let idx: Vec<usize> = (0..16).map(|c| nearest_source(c, 32, 16)).collect();
        assert_eq!(idx, (0..16).map(|c| 2 * c).collect::<Vec<_>>());
        // 640 -> 16: 40c + 19.5 -> 40c + 19.
        assert_eq!(nearest_source(0, 640, 16), 19);
        assert_eq!(nearest_source(15, 640, 16), 619);
        // Upsampling 2 -> 4: centres -0.25, 0.25, 0.75, 1.25.
        let up: Vec<usize> = (0..4).map(|c| nearest_source(c, 2, 4)).collect();
        assert_eq!(up, vec![0, 0, 1, 1]);
    }

    #[test]
    fn downsample_checkerboard_blocks() {
        let (w, h) = (32, 24);
        let depth: Vec<f64> = (0..w * h)
            .map(|i| {
                let (r, c) = (i / w, i % w);
                if (r / 2 + c / 2) % 2 == 0 { 1.0 } else { 2.0 }
            })
            .collect();
        let out = downsample(&DepthFrame::new(w, h, depth).unwrap(), &cfg());
        for r in 0..12 {
            for c in 0..16 {
                let want = if (r + c) % 2 == 0 { 1.0 } else { 2.0 };
                assert_eq!(out.at(r, c), want);
            }
        }
    }

    #[test]
    fn traversal_order_two_by_two() {
        let c = SonifyConfig { grid_width: 2, grid_height: 2, ..cfg() };
        let frame = DepthFrame::filled(2, 2, c.start).unwrap();
        let events = schedule_frame(&frame, &c, None).unwrap();
        let cells: Vec<(usize, usize)> = events.iter().map(|e| (e.row, e.col)).collect();
        assert_eq!(cells, vec![(0, 1), (1, 1), (0, 0), (1, 0)]);
        let onsets: Vec<u64> = events.iter().map(|e| e.onset_ms).collect();
        assert_eq!(onsets, vec![0, 25, 50, 75]);
        assert!(events.iter().all(|e| e.pitch == 96 && e.duration_ms == 20));
        assert_eq!(events[0].pan, 127);
        assert_eq!(events[2].pan, 0);
    }

    #[test]
    fn rests_keep_their_slot() {
        let c = SonifyConfig { grid_width: 1, grid_height: 3, ..cfg() };
        let frame = DepthFrame::new(1, 3, vec![1.0, 0.0, 1.0]).unwrap();
        let events = schedule_frame(&frame, &c, None).unwrap();
        let onsets: Vec<u64> = events.iter().map(|e| e.onset_ms).collect();
        assert_eq!(onsets, vec![0, 50]);
    }

    #[test]
    fn all_zero_grid_is_silent() {
        let frame = DepthFrame::filled(16, 12, 0.0).unwrap();
        assert!(schedule_frame(&frame, &cfg(), None).unwrap().is_empty());
    }

    #[test]
    fn single_cell_at_far_bound() {
        let c = SonifyConfig { grid_width: 1, grid_height: 1, ..cfg() };
        let events = schedule_frame(&DepthFrame::filled(1, 1, c.end).unwrap(), &c, None).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!((events[0].pitch, events[0].pan, events[0].onset_ms), (36, 64, 0));
    }

    #[test]
    fn labels_set_velocity_and_shape_is_checked() {
        let c = SonifyConfig { grid_width: 2, grid_height: 1, ..cfg() };
        let frame = DepthFrame::filled(2, 1, 1.0).unwrap();
        let labels = CellLabels { width: 2, height: 1, ids: vec![Some(1), None], num_objects: 2 };
        let events = schedule_frame(&frame, &c, Some(&labels)).unwrap();
        // Right column first: unlabeled, then the left column's object 1.
        assert_eq!(events[0].velocity, c.base_velocity);
        assert_eq!(events[1].velocity, 40);

        let wrong = CellLabels { width: 1, height: 1, ids: vec![None], num_objects: 0 };
        assert!(matches!(
            schedule_frame(&frame, &c, Some(&wrong)),
            Err(SonifyError::LabelShape { .. })
        ));
    }

    #[test]
    fn cell_blocks_tile_the_frame() {
        let c = cfg();
        let mut covered = vec![0u8; 640 * 480];
        for r in 0..12 {
            for col in 0..16 {
                let ([r0, r1], [c0, c1]) = cell_block(r, col, 640, 480, &c);
                for rr in r0..r1 {
                    for cc in c0..c1 {
                        covered[rr * 640 + cc] += 1;
                    }
                }
            }
        }
        assert!(covered.iter().all(|&n| n == 1));
    }

    #[test]
    fn json_line_fields() {
        let e = NoteEvent { pitch: 60, pan: 0, velocity: 100, onset_ms: 25, duration_ms: 20, row: 1, col: 2 };
        assert_eq!(
            events_to_json_lines(&[e]),
            "{\"pitch\":60,\"pan\":0,\"velocity\":100,\"onset_ms\":25,\"duration_ms\":20,\"row\":1,\"col\":2}\n"
        );
    }
}
