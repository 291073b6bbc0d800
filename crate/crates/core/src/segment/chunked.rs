use std::collections::VecDeque;

use super::{ChunkGrid, SegmentConfig, SegmentStats, Segmentation};
use crate::cloud::PointCloud;

pub fn segment_chunked(cloud: &PointCloud, config: &SegmentConfig) -> Segmentation {
    segment_chunked_with_stats(cloud, config).0
}

/// Flood occupied chunks; every connected group of chunks is one object and
/// its points inherit the group's id.
///
/// Seeds are taken in ascending `(i, j, k)` chunk order so labels are
/// reproducible. Each chunk is dequeued once and probes each of its
/// neighbour offsets once, so `chunk_probes == offsets * occupied_chunks`.
pub fn segment_chunked_with_stats(
    cloud: &PointCloud,
    config: &SegmentConfig,
) -> (Segmentation, SegmentStats) {
    assert!(config.chunk_size > 0.0, "chunk_size must be positive");
    let grid = ChunkGrid::build(cloud, config.chunk_size);
    let offsets = config.connectivity.offsets();

    let mut seeds: Vec<usize> = (0..grid.len()).collect();
    seeds.sort_unstable_by_key(|&ci| *grid.chunk(ci).0);

    let mut chunk_label: Vec<Option<u32>> = vec![None; grid.len()];
    let mut queue = VecDeque::new();
    let mut probes = 0u64;
    let mut next = 0u32;

    for seed in seeds {
        if chunk_label[seed].is_some() {
            continue;
        }
        chunk_label[seed] = Some(next);
        queue.push_back(seed);
        while let Some(ci) = queue.pop_front() {
            let key = *grid.chunk(ci).0;
            for &off in offsets {
                probes += 1;
                if let Some(ni) = grid.chunk_index(&key.offset(off)) {
                    if chunk_label[ni].is_none() {
                        chunk_label[ni] = Some(next);
                        queue.push_back(ni);
                    }
                }
            }
        }
        next += 1;
    }

    let mut raw = vec![0u32; cloud.len()];
    for (ci, label) in chunk_label.iter().enumerate() {
        let label = label.expect("every chunk is flooded");
        for &pi in grid.chunk(ci).1 {
            raw[pi as usize] = label;
        }
    }

    let stats = SegmentStats {
        distance_evals: 0,
        chunk_probes: probes,
        quantizations: cloud.len() as u64,
        occupied_chunks: grid.len() as u64,
    };
    (
        Segmentation::from_components(raw, next as usize, config.min_points_per_object),
        stats,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Point3;
    use crate::segment::Connectivity;

    fn config(chunk_size: f64) -> SegmentConfig {
        SegmentConfig {
            chunk_size,
            ..Default::default()
        }
    }

    #[test]
    fn far_points_are_separate() {
        let cloud = PointCloud::new(vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)]);
        let seg = segment_chunked(&cloud, &config(0.1));
        assert_eq!(seg.num_objects, 2);
        assert_eq!(seg.labels, vec![Some(0), Some(1)]);
    }

    #[test]
    fn diagonal_chain_needs_26_connectivity() {
        // Gaps of c/2 along the space diagonal land in corner-adjacent chunks.
        let c = 1.0;
        let cloud: PointCloud = (0..100)
            .map(|i| {
                let t = i as f64 * c / 2.0;
                Point3::new(t, t, t)
            })
            .collect();
        let seg = segment_chunked(&cloud, &config(c));
        assert_eq!(seg.num_objects, 1);

        let six = SegmentConfig {
            connectivity: Connectivity::Six,
            ..config(c)
        };
        assert!(segment_chunked(&cloud, &six).num_objects > 1);
    }

    #[test]
    fn probes_equal_offsets_times_chunks() {
        let cloud: PointCloud = (0..50).map(|i| Point3::new(i as f64 * 0.3, 0.0, 0.0)).collect();
        let (_, stats) = segment_chunked_with_stats(&cloud, &config(1.0));
        assert_eq!(stats.chunk_probes, 26 * stats.occupied_chunks);
        assert_eq!(stats.quantizations, 50);
        assert_eq!(stats.distance_evals, 0);
    }

    #[test]
    fn seeds_follow_key_order() {
        // Point 0 sits in the larger chunk key, so it gets the second id.
        let cloud = PointCloud::new(vec![Point3::new(5.0, 0.0, 0.0), Point3::new(-5.0, 0.0, 0.0)]);
        let seg = segment_chunked(&cloud, &config(1.0));
        assert_eq!(seg.labels, vec![Some(1), Some(0)]);
    }

    #[test]
    fn empty_cloud() {
        let (seg, stats) = segment_chunked_with_stats(&PointCloud::default(), &config(1.0));
        assert_eq!(seg.num_objects, 0);
        assert_eq!(stats.chunk_probes, 0);
    }
}
