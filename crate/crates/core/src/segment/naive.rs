use std::collections::VecDeque;

use super::{SegmentConfig, SegmentStats, Segmentation};
use crate::cloud::PointCloud;

pub fn segment_naive(cloud: &PointCloud, config: &SegmentConfig) -> Segmentation {
    segment_naive_with_stats(cloud, config).0
}

/// Fixed-radius single-linkage clustering by brute-force floodfill.
///
/// Every dequeued point is tested against every other point, so a cloud of
/// `n` points costs exactly `n * (n - 1)` distance evaluations regardless of
/// its shape. The test is `|p - q|^2 < threshold^2`.
pub fn segment_naive_with_stats(
    cloud: &PointCloud,
    config: &SegmentConfig,
) -> (Segmentation, SegmentStats) {
    assert!(config.threshold > 0.0, "threshold must be positive");
    let points = cloud.points();
    let n = points.len();
    let limit = config.threshold * config.threshold;

    const UNSET: u32 = u32::MAX;
    let mut raw = vec![UNSET; n];
    let mut queue = VecDeque::new();
    let mut evals = 0u64;
    let mut next = 0u32;

    for seed in 0..n {
        if raw[seed] != UNSET {
            continue;
        }
        raw[seed] = next;
        queue.push_back(seed);
        while let Some(pi) = queue.pop_front() {
            let p = points[pi];
            for (qi, q) in points.iter().enumerate() {
                if qi == pi {
                    continue;
                }
                evals += 1;
                if p.distance_squared(q) < limit && raw[qi] == UNSET {
                    raw[qi] = next;
                    queue.push_back(qi);
                }
            }
        }
        next += 1;
    }

    let stats = SegmentStats {
        distance_evals: evals,
        ..Default::default()
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

    fn config(threshold: f64) -> SegmentConfig {
        SegmentConfig {
            threshold,
            ..Default::default()
        }
    }

    #[test]
    fn exactly_threshold_apart_is_two_objects() {
        let cloud = PointCloud::new(vec![Point3::new(0.0, 0.0, 0.0), Point3::new(0.5, 0.0, 0.0)]);
        assert_eq!(segment_naive(&cloud, &config(0.5)).num_objects, 2);
    }

    #[test]
    fn single_point() {
        let cloud = PointCloud::new(vec![Point3::new(1.0, 2.0, 3.0)]);
        let (seg, stats) = segment_naive_with_stats(&cloud, &config(0.1));
        assert_eq!(seg.num_objects, 1);
        assert_eq!(stats.distance_evals, 0);
    }

    #[test]
    fn chain_links_transitively() {
        let t = 1.0;
        let cloud: PointCloud = (0..5).map(|i| Point3::new(i as f64 * 0.9 * t, 0.0, 0.0)).collect();
        let (seg, stats) = segment_naive_with_stats(&cloud, &config(t));
        assert_eq!(seg.num_objects, 1);
        assert_eq!(stats.distance_evals, 5 * 4);
    }

    #[test]
    fn min_points_filter() {
        let mut pts: Vec<Point3> = (0..10).map(|i| Point3::new(i as f64 * 0.01, 0.0, 0.0)).collect();
        pts.push(Point3::new(5.0, 0.0, 0.0));
        let cfg = SegmentConfig {
            min_points_per_object: 8,
            ..config(0.05)
        };
        let seg = segment_naive(&PointCloud::new(pts), &cfg);
        assert_eq!(seg.num_objects, 1);
        assert_eq!(seg.discarded, vec![10]);
    }
}
