//! Seeded synthetic scenes: connected clusters plus uniform noise.
//!
//! Each cluster is a jittered chain that snakes through a cubic lattice
//! centred on the cluster centre. Lattice spacing is `0.8 * max_gap` and each
//! axis is jittered by at most `0.05 * max_gap`, so consecutive chain points
//! are at most `sqrt(0.9^2 + 2 * 0.1^2) * max_gap < 0.92 * max_gap` apart and
//! the whole cluster is connected at radius `max_gap` by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Point3, PointCloud};

/// Lattice spacing as a fraction of `max_gap`.
const SPACING: f64 = 0.8;
/// Per-axis jitter bound as a fraction of `max_gap`.
const JITTER: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub center: Point3,
    pub point_count: usize,
    /// Every point has a chain neighbour closer than this.
    pub max_gap: f64,
    /// Side of the cube the chain is laid out in.
    pub extent: f64,
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SceneSpec {
    #[serde(default)]
    pub clusters: Vec<ClusterSpec>,
    #[serde(default)]
    pub noise_points: usize,
    #[serde(default)]
    pub noise_region: Aabb,
    #[serde(default)]
    pub seed: u64,
}

/// A generated cloud together with the cluster each point was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScene {
    pub cloud: PointCloud,
    /// Number of clusters; noise is not an expected object.
    pub expected_objects: usize,
    /// `Some(cluster index)` for cluster points, `None` for noise.
    pub membership: Vec<Option<usize>>,
}

impl LabeledScene {
    /// Point indices grouped by cluster, in cluster order.
    pub fn cluster_indices(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.expected_objects];
        for (i, m) in self.membership.iter().enumerate() {
            if let Some(c) = m {
                groups[*c].push(i);
            }
        }
        groups
    }
}

pub fn generate_scene(spec: &SceneSpec) -> (PointCloud, usize) {
    let scene = generate_scene_labeled(spec);
    (scene.cloud, scene.expected_objects)
}

/// Generate the scene. Cluster points come first, in cluster order and
/// chain order, followed by the noise points.
pub fn generate_scene_labeled(spec: &SceneSpec) -> LabeledScene {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total = spec.clusters.iter().map(|c| c.point_count).sum::<usize>() + spec.noise_points;
    let mut points = Vec::with_capacity(total);
    let mut membership = Vec::with_capacity(total);

    for (ci, cluster) in spec.clusters.iter().enumerate() {
        push_chain(cluster, &mut rng, &mut points);
        membership.resize(points.len(), Some(ci));
    }

    let region = spec.noise_region;
    for _ in 0..spec.noise_points {
        points.push(Point3::new(
            uniform(&mut rng, region.min.x, region.max.x),
            uniform(&mut rng, region.min.y, region.max.y),
            uniform(&mut rng, region.min.z, region.max.z),
        ));
    }
    membership.resize(points.len(), None);

    LabeledScene {
        cloud: PointCloud::new(points),
        expected_objects: spec.clusters.len(),
        membership,
    }
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

fn push_chain(cluster: &ClusterSpec, rng: &mut impl Rng, out: &mut Vec<Point3>) {
    assert!(cluster.max_gap > 0.0, "cluster max_gap must be positive");
    assert!(cluster.extent > 0.0, "cluster extent must be positive");

    let step = SPACING * cluster.max_gap;
    let jitter = JITTER * cluster.max_gap;
    let side = (cluster.extent / step).floor() as u64 + 1;
    let cells = side.saturating_mul(side).saturating_mul(side);
    let half = (side - 1) as f64 * step / 2.0;
    let origin = Point3::new(
        cluster.center.x - half,
        cluster.center.y - half,
        cluster.center.z - half,
    );

    for k in 0..cluster.point_count as u64 {
        let [ix, iy, iz] = snake_cell(bounce(k, cells), side);
        out.push(Point3::new(
            origin.x + ix as f64 * step + rng.gen_range(-jitter..=jitter),
            origin.y + iy as f64 * step + rng.gen_range(-jitter..=jitter),
            origin.z + iz as f64 * step + rng.gen_range(-jitter..=jitter),
        ));
    }
}

/// Walk forward through the lattice, then back, so a chain longer than the
/// lattice stays connected.
fn bounce(k: u64, cells: u64) -> u64 {
    let period = cells.saturating_mul(2);
    let k = k % period;
    if k < cells {
        k
    } else {
        period - 1 - k
    }
}

/// Boustrophedon order over a `side^3` lattice: consecutive indices map to
/// face-adjacent cells.
fn snake_cell(k: u64, side: u64) -> [u64; 3] {
    let layer = side * side;
    let iz = k / layer;
    let in_layer = k % layer;
    let row_step = in_layer / side;
    let iy = if iz.is_multiple_of(2) { row_step } else { side - 1 - row_step };
    let global_row = iz * side + row_step;
    let col = in_layer % side;
    let ix = if global_row.is_multiple_of(2) { col } else { side - 1 - col };
    [ix, iy, iz]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cluster(center: [f64; 3], point_count: usize, max_gap: f64, extent: f64) -> ClusterSpec {
        ClusterSpec {
            center: center.into(),
            point_count,
            max_gap,
            extent,
        }
    }

    #[test]
    fn snake_steps_are_face_adjacent() {
        for side in 1..6u64 {
            let n = side * side * side;
            let mut seen = std::collections::HashSet::new();
            for k in 0..n {
                let a = snake_cell(k, side);
                assert!(a.iter().all(|&v| v < side));
                assert!(seen.insert(a));
                if k + 1 < n {
                    let b = snake_cell(k + 1, side);
                    let manhattan: u64 = a.iter().zip(&b).map(|(x, y)| x.abs_diff(*y)).sum();
                    assert_eq!(manhattan, 1, "side {side} step {k}");
                }
            }
        }
    }

    #[test]
    fn empty_spec() {
        let (cloud, count) = generate_scene(&SceneSpec::default());
        assert!(cloud.is_empty());
        assert_eq!(count, 0);
    }

    #[test]
    fn single_cluster_point_count() {
        let spec = SceneSpec {
            clusters: vec![cluster([0.0, 0.0, 2.0], 100, 0.02, 0.2)],
            ..Default::default()
        };
        let (cloud, count) = generate_scene(&spec);
        assert_eq!(cloud.len(), 100);
        assert_eq!(count, 1);
    }

    #[test]
    fn consecutive_chain_points_within_gap() {
        // Long enough to wrap around the lattice and bounce back.
        let spec = SceneSpec {
            clusters: vec![cluster([1.0, -1.0, 3.0], 500, 0.05, 0.1)],
            seed: 9,
            ..Default::default()
        };
        let (cloud, _) = generate_scene(&spec);
        let gap2 = 0.05f64 * 0.05;
        for w in cloud.points().windows(2) {
            assert!(w[0].distance_squared(&w[1]) < gap2);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SceneSpec {
            clusters: vec![cluster([0.0, 0.0, 0.0], 50, 0.1, 1.0)],
            noise_points: 20,
            noise_region: Aabb {
                min: [-1.0, -1.0, -1.0].into(),
                max: [1.0, 1.0, 1.0].into(),
            },
            seed: 42,
        };
        assert_eq!(generate_scene_labeled(&spec), generate_scene_labeled(&spec));
        let other = SceneSpec { seed: 43, ..spec.clone() };
        assert_ne!(generate_scene(&spec).0, generate_scene(&other).0);
    }

    #[test]
    fn membership_tracks_clusters_and_noise() {
        let spec = SceneSpec {
            clusters: vec![
                cluster([0.0, 0.0, 0.0], 3, 0.1, 1.0),
                cluster([5.0, 0.0, 0.0], 2, 0.1, 1.0),
            ],
            noise_points: 2,
            noise_region: Aabb {
                min: [10.0, 10.0, 10.0].into(),
                max: [11.0, 11.0, 11.0].into(),
            },
            seed: 1,
        };
        let scene = generate_scene_labeled(&spec);
        assert_eq!(
            scene.membership,
            vec![Some(0), Some(0), Some(0), Some(1), Some(1), None, None]
        );
        assert_eq!(scene.cluster_indices(), vec![vec![0, 1, 2], vec![3, 4]]);
        for p in &scene.cloud.points()[5..] {
            assert!((10.0..11.0).contains(&p.x));
        }
    }

    #[test]
    fn spec_json_uses_coordinate_arrays() {
        let json = r#"{"clusters":[{"center":[0,0,2],"point_count":10,"max_gap":0.02,"extent":0.2}],"seed":7}"#;
        let spec: SceneSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.clusters[0].center, Point3::new(0.0, 0.0, 2.0));
        assert_eq!(spec.noise_points, 0);
        assert_eq!(spec.seed, 7);
    }
}
