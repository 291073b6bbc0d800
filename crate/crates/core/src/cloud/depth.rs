use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DepthFrame, Point3, PointCloud};

#[derive(Debug, Error, PartialEq)]
pub enum DepthError {
    #[error("raw depth length mismatch: expected {expected} bytes for the frame, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("depth grid has {actual} entries, expected {expected}")]
    GridSize { expected: usize, actual: usize },
    #[error("depth frame must be at least 1x1, got {width}x{height}")]
    EmptyFrame { width: usize, height: usize },
    #[error("depth entry {index} is {value}; depths must be finite and non-negative")]
    InvalidDepth { index: usize, value: f64 },
    #[error("depth scale must be finite and positive, got {0}")]
    InvalidScale(f64),
}

/// Decode a flat little-endian `u16` depth grid. Each unit is `scale` meters.
pub fn parse_depth_raw(
    bytes: &[u8],
    width: usize,
    height: usize,
    scale: f64,
) -> Result<DepthFrame, DepthError> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(DepthError::InvalidScale(scale));
    }
    let expected = width * height * 2;
    if bytes.len() != expected {
        return Err(DepthError::LengthMismatch {
            expected,
            actual: bytes.len(),
        });
    }
    let depth = bytes
        .chunks_exact(2)
        .map(|b| f64::from(u16::from_le_bytes([b[0], b[1]])) * scale)
        .collect();
    DepthFrame::new(width, height, depth)
}

/// Pinhole camera parameters in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Self {
        assert!(fx > 0.0 && fy > 0.0, "focal lengths must be positive");
        Self { fx, fy, cx, cy }
    }

    #[inline]
    pub fn back_project(&self, col: usize, row: usize, depth: f64) -> Point3 {
        Point3 {
            x: (col as f64 - self.cx) * depth / self.fx,
            y: (row as f64 - self.cy) * depth / self.fy,
            z: depth,
        }
    }
}

/// Back-project every pixel with a reading. Output is row-major; pixels at
/// depth zero are skipped.
pub fn depth_frame_to_cloud(frame: &DepthFrame, intrinsics: &Intrinsics) -> PointCloud {
    let mut points = Vec::new();
    for row in 0..frame.height() {
        for col in 0..frame.width() {
            let d = frame.at(row, col);
            if d > 0.0 {
                points.push(intrinsics.back_project(col, row, d));
            }
        }
    }
    PointCloud::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_units_are_scaled() {
        let frame = parse_depth_raw(&[0xE8, 0x03, 0x00, 0x00], 2, 1, 0.001).unwrap();
        assert_eq!(frame.depth(), &[1.0, 0.0]);
    }

    #[test]
    fn empty_input_reports_expected_length() {
        let err = parse_depth_raw(&[], 1, 1, 0.001).unwrap_err();
        assert_eq!(err, DepthError::LengthMismatch { expected: 2, actual: 0 });
        assert!(err.to_string().contains("expected 2"));
    }

    #[test]
    fn zero_bytes_give_zero_depth() {
        let frame = parse_depth_raw(&[0u8; 4 * 3 * 2], 4, 3, 0.001).unwrap();
        assert!(frame.depth().iter().all(|&d| d == 0.0));
        assert!(depth_frame_to_cloud(&frame, &Intrinsics::new(1.0, 1.0, 0.0, 0.0)).is_empty());
    }

    #[test]
    fn principal_point_projects_onto_axis() {
        let mut depth = vec![0.0; 9];
        depth[4] = 2.0;
        let frame = DepthFrame::new(3, 3, depth).unwrap();
        let cloud = depth_frame_to_cloud(&frame, &Intrinsics::new(500.0, 500.0, 1.0, 1.0));
        assert_eq!(cloud.points(), &[Point3::new(0.0, 0.0, 2.0)]);
    }

    #[test]
    fn single_pixel_origin() {
        let frame = DepthFrame::new(1, 1, vec![1.0]).unwrap();
        let cloud = depth_frame_to_cloud(&frame, &Intrinsics::new(500.0, 500.0, 0.0, 0.0));
        assert_eq!(cloud.points(), &[Point3::new(0.0, 0.0, 1.0)]);
    }

    #[test]
    fn off_axis_pixel() {
        // (c - cx) * d / fx = (2 - 0.5) * 4 / 2 = 3; (r - cy) * d / fy = (0 - 0.5) * 4 / 4 = -0.5
        let frame = DepthFrame::new(3, 1, vec![0.0, 0.0, 4.0]).unwrap();
        let cloud = depth_frame_to_cloud(&frame, &Intrinsics::new(2.0, 4.0, 0.5, 0.5));
        assert_eq!(cloud.points(), &[Point3::new(3.0, -0.5, 4.0)]);
    }

    #[test]
    fn rejects_negative_depth() {
        assert!(matches!(
            DepthFrame::new(1, 2, vec![1.0, -1.0]),
            Err(DepthError::InvalidDepth { index: 1, .. })
        ));
    }
}
