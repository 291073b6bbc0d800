//! Random scenes that satisfy the chunked/naive equivalence conditions:
//! chain gaps below `t / 1.01` and clusters at least `8 t` apart.

use echomap_core::cloud::{generate_scene_labeled, ClusterSpec, LabeledScene, Point3, SceneSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SeparatedScene {
    pub spec: SceneSpec,
    pub scene: LabeledScene,
    /// Naive threshold; the chunked run uses `2 * threshold`.
    pub threshold: f64,
}

/// Bounding box of a point set.
pub fn bounds(points: impl IntoIterator<Item = Point3>) -> (Point3, Point3) {
    let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    (lo, hi)
}

/// Lower bound on the distance between any two points of two boxes.
pub fn box_gap(a: (Point3, Point3), b: (Point3, Point3)) -> f64 {
    let axis = |alo: f64, ahi: f64, blo: f64, bhi: f64| (blo - ahi).max(alo - bhi).max(0.0);
    let dx = axis(a.0.x, a.1.x, b.0.x, b.1.x);
    let dy = axis(a.0.y, a.1.y, b.0.y, b.1.y);
    let dz = axis(a.0.z, a.1.z, b.0.z, b.1.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Largest distance between consecutive points of each cluster's chain.
pub fn max_chain_gap(scene: &LabeledScene) -> f64 {
    let pts = scene.cloud.points();
    scene
        .cluster_indices()
        .iter()
        .flat_map(|idx| idx.windows(2).map(|w| pts[w[0]].distance_squared(&pts[w[1]]).sqrt()))
        .fold(0.0, f64::max)
}

/// Smallest box gap between any two clusters of the scene.
pub fn min_cluster_separation(scene: &LabeledScene) -> f64 {
    let pts = scene.cloud.points();
    let boxes: Vec<_> = scene
        .cluster_indices()
        .iter()
        .map(|idx| bounds(idx.iter().map(|&i| pts[i])))
        .collect();
    let mut best = f64::INFINITY;
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            best = best.min(box_gap(boxes[i], boxes[j]));
        }
    }
    best
}

/// Draw a scene of 1..=6 clusters with at most `max_points` points, retrying
/// placements until the generated clusters are verifiably `8 t` apart.
pub fn separated_scene(seed: u64, max_points: usize) -> SeparatedScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let threshold = rng.gen_range(0.01..0.08);
    let gap = threshold / 1.01;
    let clusters = rng.gen_range(1..=6usize);
    let per_cluster = (max_points / clusters).max(1);

    loop {
        let mut specs = Vec::with_capacity(clusters);
        let span = 40.0 * threshold * clusters as f64;
        for _ in 0..clusters {
            specs.push(ClusterSpec {
                center: Point3::new(
                    rng.gen_range(-span..span),
                    rng.gen_range(-span..span),
                    rng.gen_range(0.5..0.5 + span),
                ),
                point_count: rng.gen_range(1..=per_cluster),
                max_gap: gap,
                extent: rng.gen_range(threshold..12.0 * threshold),
            });
        }
        let spec = SceneSpec {
            clusters: specs,
            seed: rng.gen(),
            ..Default::default()
        };
        let scene = generate_scene_labeled(&spec);
        if min_cluster_separation(&scene) >= 8.0 * threshold {
            assert!(max_chain_gap(&scene) <= gap);
            return SeparatedScene {
                spec,
                scene,
                threshold,
            };
        }
    }
}
