//! Object segmentation by floodfill.
//!
//! Two segmenters produce the same [`Segmentation`] shape:
//!
//! - [`segment_chunked`] buckets points into a [`ChunkGrid`] and floods
//!   occupied chunks. Work is linear in the point count and no distance is
//!   ever computed.
//! - [`segment_naive`] floods points directly, testing every other point
//!   against a distance threshold. Quadratic; kept as the reference.
//!
//! Both take an optional minimum object size. Objects below it are moved to
//! a discard set and do not count toward `num_objects`.

mod chunked;
mod grid;
mod naive;

pub use chunked::{segment_chunked, segment_chunked_with_stats};
pub use grid::{ChunkGrid, ChunkKey};
pub use naive::{segment_naive, segment_naive_with_stats};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::PointCloud;

#[derive(Debug, Error, PartialEq)]
pub enum SegmentError {
    #[error("object id {id} out of range (segmentation has {num_objects} objects)")]
    ObjectOutOfRange { id: usize, num_objects: usize },
    #[error("segmentation has {labels} labels but the cloud has {points} points")]
    SizeMismatch { labels: usize, points: usize },
}

/// Chunk adjacency used when flooding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Connectivity {
    /// Shared faces only.
    #[serde(rename = "6")]
    Six,
    /// Faces, edges and corners.
    #[default]
    #[serde(rename = "26")]
    TwentySix,
}

impl Connectivity {
    pub fn offsets(self) -> &'static [[i64; 3]] {
        match self {
            Connectivity::Six => &FACE_OFFSETS,
            Connectivity::TwentySix => &ALL_OFFSETS,
        }
    }
}

impl TryFrom<u32> for Connectivity {
    type Error = u32;

    fn try_from(v: u32) -> Result<Self, u32> {
        match v {
            6 => Ok(Connectivity::Six),
            26 => Ok(Connectivity::TwentySix),
            other => Err(other),
        }
    }
}

const FACE_OFFSETS: [[i64; 3]; 6] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
];

const ALL_OFFSETS: [[i64; 3]; 26] = {
    let mut out = [[0i64; 3]; 26];
    let mut n = 0;
    let mut di = -1;
    while di <= 1 {
        let mut dj = -1;
        while dj <= 1 {
            let mut dk = -1;
            while dk <= 1 {
                if !(di == 0 && dj == 0 && dk == 0) {
                    out[n] = [di, dj, dk];
                    n += 1;
                }
                dk += 1;
            }
            dj += 1;
        }
        di += 1;
    }
    out
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentConfig {
    /// Chunk side in meters (chunked segmenter).
    pub chunk_size: f64,
    /// Linking distance in meters (naive segmenter), strict `<`.
    pub threshold: f64,
    pub connectivity: Connectivity,
    /// Objects with fewer points are discarded; 0 disables the filter.
    pub min_points_per_object: usize,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            chunk_size: 0.1,
            threshold: 0.05,
            connectivity: Connectivity::TwentySix,
            min_points_per_object: 0,
        }
    }
}

/// Exact work counters recorded by the segmenters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SegmentStats {
    /// Point-pair distance tests (naive only).
    pub distance_evals: u64,
    /// Neighbour-chunk lookups while flooding (chunked only).
    pub chunk_probes: u64,
    /// Points snapped to a chunk key (chunked only).
    pub quantizations: u64,
    /// Occupied chunks (chunked only).
    pub occupied_chunks: u64,
}

/// A labeling of point indices into objects.
///
/// `labels[i]` is `Some(id)` with `id < num_objects`, or `None` when point
/// `i` belongs to an object dropped by the minimum-size filter. Ids are
/// dense and assigned in discovery order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    pub num_objects: usize,
    pub labels: Vec<Option<u32>>,
    /// Indices of discarded points, ascending.
    pub discarded: Vec<u32>,
}

impl Segmentation {
    /// Build from raw component ids (dense, discovery order) and apply the
    /// minimum-size filter.
    pub(crate) fn from_components(raw: Vec<u32>, num_raw: usize, min_points: usize) -> Self {
        if min_points <= 1 {
            return Self {
                num_objects: num_raw,
                labels: raw.into_iter().map(Some).collect(),
                discarded: Vec::new(),
            };
        }
        let mut sizes = vec![0usize; num_raw];
        for &l in &raw {
            sizes[l as usize] += 1;
        }
        let mut remap = vec![None; num_raw];
        let mut next = 0u32;
        for (old, &size) in sizes.iter().enumerate() {
            if size >= min_points {
                remap[old] = Some(next);
                next += 1;
            }
        }
        let labels: Vec<Option<u32>> = raw.iter().map(|&l| remap[l as usize]).collect();
        let discarded = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_none())
            .map(|(i, _)| i as u32)
            .collect();
        Self {
            num_objects: next as usize,
            labels,
            discarded,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Point indices of each object, indexed by object id.
    pub fn objects(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.num_objects];
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(id) = l {
                groups[*id as usize].push(i);
            }
        }
        groups
    }

    /// The partition as a canonical set of sets (independent of id order).
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut groups = self.objects();
        groups.sort_unstable_by_key(|g| g[0]);
        groups
    }

    pub fn object_sizes(&self) -> Vec<usize> {
        self.objects().iter().map(Vec::len).collect()
    }
}

/// Sub-cloud of the points labeled `object_id`, in original order.
pub fn extract_object(
    cloud: &PointCloud,
    seg: &Segmentation,
    object_id: usize,
) -> Result<PointCloud, SegmentError> {
    if object_id >= seg.num_objects {
        return Err(SegmentError::ObjectOutOfRange {
            id: object_id,
            num_objects: seg.num_objects,
        });
    }
    if seg.labels.len() != cloud.len() {
        return Err(SegmentError::SizeMismatch {
            labels: seg.labels.len(),
            points: cloud.len(),
        });
    }
    let id = object_id as u32;
    Ok(cloud
        .points()
        .iter()
        .zip(&seg.labels)
        .filter(|(_, l)| **l == Some(id))
        .map(|(p, _)| *p)
        .collect::<PointCloud>()
        .with_frame_id(cloud.frame_id))
}
