use std::collections::HashMap;

use crate::cloud::{Point3, PointCloud};

/// Quantized chunk coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChunkKey {
    pub i: i64,
    pub j: i64,
    pub k: i64,
}

impl ChunkKey {
    pub const fn new(i: i64, j: i64, k: i64) -> Self {
        Self { i, j, k }
    }

    /// Snap each coordinate to the nearest multiple of `chunk_size`.
    #[inline]
    pub fn from_point(p: &Point3, chunk_size: f64) -> Self {
        Self {
            i: round_nearest(p.x / chunk_size),
            j: round_nearest(p.y / chunk_size),
            k: round_nearest(p.z / chunk_size),
        }
    }

    #[inline]
    pub fn offset(self, [di, dj, dk]: [i64; 3]) -> Self {
        Self {
            i: self.i + di,
            j: self.j + dj,
            k: self.k + dk,
        }
    }
}

/// Round to nearest, exact halves toward +inf.
#[inline]
pub(crate) fn round_nearest(v: f64) -> i64 {
    let down = v.floor();
    // `v - floor(v)` is exact, so the tie test is too.
    if v - down >= 0.5 {
        down as i64 + 1
    } else {
        down as i64
    }
}

/// Chunk cache: every point index lives in exactly one bucket.
#[derive(Debug, Clone)]
pub struct ChunkGrid {
    chunk_size: f64,
    index: HashMap<ChunkKey, u32>,
    chunks: Vec<(ChunkKey, Vec<u32>)>,
}

impl ChunkGrid {
    /// Bucket every point of `cloud`. One quantization and one hash insert
    /// per point.
    pub fn build(cloud: &PointCloud, chunk_size: f64) -> Self {
        assert!(chunk_size > 0.0, "chunk_size must be positive");
        let mut index: HashMap<ChunkKey, u32> = HashMap::new();
        let mut chunks: Vec<(ChunkKey, Vec<u32>)> = Vec::new();
        for (pi, p) in cloud.points().iter().enumerate() {
            let key = ChunkKey::from_point(p, chunk_size);
            let ci = *index.entry(key).or_insert_with(|| {
                chunks.push((key, Vec::new()));
                (chunks.len() - 1) as u32
            });
            chunks[ci as usize].1.push(pi as u32);
        }
        Self {
            chunk_size,
            index,
            chunks,
        }
    }

    pub fn chunk_size(&self) -> f64 {
        self.chunk_size
    }

    /// Number of occupied chunks.
    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn get(&self, key: &ChunkKey) -> Option<&[u32]> {
        self.index
            .get(key)
            .map(|&ci| self.chunks[ci as usize].1.as_slice())
    }

    /// Occupied chunks in first-insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&ChunkKey, &[u32])> {
        self.chunks.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub(crate) fn chunk_index(&self, key: &ChunkKey) -> Option<usize> {
        self.index.get(key).map(|&ci| ci as usize)
    }

    pub(crate) fn chunk(&self, ci: usize) -> (&ChunkKey, &[u32]) {
        let (k, v) = &self.chunks[ci];
        (k, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_ties_go_up() {
        assert_eq!(round_nearest(0.5), 1);
        assert_eq!(round_nearest(-0.5), 0);
        assert_eq!(round_nearest(1.5), 2);
        assert_eq!(round_nearest(-1.5), -1);
        assert_eq!(round_nearest(0.49999999999999994), 0);
        assert_eq!(round_nearest(-0.6), -1);
        assert_eq!(round_nearest(0.6), 1);
    }

    #[test]
    fn nearby_points_share_a_chunk() {
        let cloud = PointCloud::new(vec![Point3::new(0.0, 0.0, 0.0), Point3::new(0.1, 0.0, 0.0)]);
        let grid = ChunkGrid::build(&cloud, 1.0);
        assert_eq!(grid.len(), 1);
        assert_eq!(grid.get(&ChunkKey::new(0, 0, 0)), Some(&[0u32, 1][..]));
    }

    #[test]
    fn point_rounds_to_nearest_multiple() {
        assert_eq!(
            ChunkKey::from_point(&Point3::new(0.6, 0.0, 0.0), 1.0),
            ChunkKey::new(1, 0, 0)
        );
        assert_eq!(
            ChunkKey::from_point(&Point3::new(-0.26, 0.24, 0.25), 0.5),
            ChunkKey::new(-1, 0, 1)
        );
    }

    #[test]
    fn empty_cloud_empty_grid() {
        assert!(ChunkGrid::build(&PointCloud::default(), 0.1).is_empty());
    }

    #[test]
    fn buckets_partition_indices() {
        let cloud: PointCloud = (0..100)
            .map(|i| Point3::new(i as f64 * 0.37, (i % 7) as f64 * -0.2, (i % 3) as f64))
            .collect();
        let grid = ChunkGrid::build(&cloud, 0.5);
        let mut all: Vec<u32> = grid.iter().flat_map(|(_, b)| b.iter().copied()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<u32>>());
    }
}
