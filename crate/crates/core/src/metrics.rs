//! Detection metrics over a set of frames.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("no frames to score")]
    Empty,
}

/// Per-frame outcome of one segmentation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FrameResult {
    pub frame_id: u64,
    pub expected_objects: usize,
    pub detected_objects: usize,
    #[serde(default)]
    pub distance_evals: u64,
    #[serde(default)]
    pub chunk_probes: u64,
    /// Microseconds.
    #[serde(default)]
    pub wall_time: u64,
}

impl FrameResult {
    pub fn is_exact(&self) -> bool {
        self.expected_objects == self.detected_objects
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `None` when either count series is constant (or has one frame).
    pub pearson_r: Option<f64>,
    pub accuracy: f64,
    pub per_frame: Vec<FrameResult>,
}

impl MetricsReport {
    pub fn from_frames(per_frame: Vec<FrameResult>) -> Result<Self, MetricsError> {
        let accuracy = accuracy(&per_frame)?;
        let pearson_r = if per_frame.len() < 2 {
            None
        } else {
            let xs: Vec<f64> = per_frame.iter().map(|f| f.expected_objects as f64).collect();
            let ys: Vec<f64> = per_frame.iter().map(|f| f.detected_objects as f64).collect();
            pearson_r(&xs, &ys)?
        };
        Ok(Self {
            pearson_r,
            accuracy,
            per_frame,
        })
    }
}

/// Sample Pearson correlation. `Ok(None)` when either series has zero
/// variance, where the coefficient is undefined.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<Option<f64>, MetricsError> {
    if xs.len() != ys.len() {
        return Err(MetricsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(MetricsError::TooShort(xs.len()));
    }
    let constant = |s: &[f64]| s.iter().all(|v| *v == s[0]);
    if constant(xs) || constant(ys) {
        return Ok(None);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)))
}

/// Fraction of frames whose detected count equals the expected count.
pub fn accuracy(results: &[FrameResult]) -> Result<f64, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::Empty);
    }
    let exact = results.iter().filter(|f| f.is_exact()).count();
    Ok(exact as f64 / results.len() as f64)
}
