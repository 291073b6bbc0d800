//! Point-cloud and depth-frame types, file readers and synthetic scenes.

mod depth;
mod ply;
mod scene;

pub use depth::{depth_frame_to_cloud, parse_depth_raw, DepthError, Intrinsics};
pub use ply::{parse_ply, write_ply_ascii, PlyError, PlyReport};
pub use scene::{generate_scene, generate_scene_labeled, Aabb, ClusterSpec, LabeledScene, SceneSpec};

use serde::{Deserialize, Serialize};

/// A point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Squared Euclidean distance; no square root is taken.
    #[inline]
    pub fn distance_squared(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }
}

impl From<[f64; 3]> for Point3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

/// Ordered set of points. Index `i` refers to the same point for the
/// lifetime of the cloud.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point3>,
    pub frame_id: u64,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        Self { points, frame_id: 0 }
    }

    pub fn with_frame_id(mut self, frame_id: u64) -> Self {
        self.frame_id = frame_id;
        self
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }
}

impl FromIterator<Point3> for PointCloud {
    fn from_iter<I: IntoIterator<Item = Point3>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Dense row-major depth grid in meters. `0.0` means "no reading".
#[derive(Debug, Clone, PartialEq)]
pub struct DepthFrame {
    width: usize,
    height: usize,
    depth: Vec<f64>,
}

impl DepthFrame {
    pub fn new(width: usize, height: usize, depth: Vec<f64>) -> Result<Self, DepthError> {
        if width == 0 || height == 0 {
            return Err(DepthError::EmptyFrame { width, height });
        }
        if depth.len() != width * height {
            return Err(DepthError::GridSize {
                expected: width * height,
                actual: depth.len(),
            });
        }
        if let Some(index) = depth.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(DepthError::InvalidDepth {
                index,
                value: depth[index],
            });
        }
        Ok(Self { width, height, depth })
    }

    /// Frame with every pixel at `value`.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self, DepthError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.depth[row * self.width + col]
    }
}
