//! Operation-count benchmark of the two segmenters across cloud sizes.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cloud::{generate_scene_labeled, ClusterSpec, SceneSpec};
use crate::segment::{segment_chunked_with_stats, segment_naive_with_stats, SegmentConfig};

/// Above this many points the quadratic segmenter is skipped.
pub const DEFAULT_NAIVE_CUTOFF: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// Ascending point counts.
    pub sizes: Vec<usize>,
    pub template: SceneSpec,
    pub segment: SegmentConfig,
    pub repetitions: usize,
    pub naive_cutoff: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub expected_objects: usize,
    /// `None` when the naive run was skipped.
    pub naive_evals: Option<u64>,
    pub naive_objects: Option<usize>,
    pub naive_ms: Option<f64>,
    pub chunked_probes: u64,
    pub chunked_quantizations: u64,
    pub chunked_objects: usize,
    pub chunked_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `ln(naive_evals)` against `ln(n)`.
    pub naive_slope: Option<f64>,
    /// Least-squares slope of `ln(chunked_probes)` against `ln(n)`.
    pub chunked_slope: Option<f64>,
}

impl BenchTable {
    pub const CSV_HEADER: &'static str = "n,naive_evals,chunked_probes,naive_ms,chunked_ms";

    /// CSV with the fixed header; skipped naive cells are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.3}",
                r.n,
                opt(r.naive_evals.map(|v| v.to_string())),
                r.chunked_probes,
                opt(r.naive_ms.map(|v| format!("{v:.3}"))),
                r.chunked_ms
            );
        }
        out
    }
}

/// Rescale a template scene to exactly `n` points.
///
/// Point counts scale proportionally. Cluster extents scale linearly with
/// the same factor so that a chain fills the same number of lattice rows at
/// every size, which keeps chunk occupancy proportional to `n`.
pub fn scale_scene(template: &SceneSpec, n: usize) -> SceneSpec {
    let total: usize = template.clusters.iter().map(|c| c.point_count).sum::<usize>() + template.noise_points;
    assert!(total > 0, "template scene has no points");
    let factor = n as f64 / total as f64;

    let mut assigned = 0usize;
    let mut clusters: Vec<ClusterSpec> = template
        .clusters
        .iter()
        .map(|c| {
            let count = (c.point_count as f64 * factor).round() as usize;
            assigned += count;
            ClusterSpec {
                point_count: count,
                extent: c.extent * factor,
                ..c.clone()
            }
        })
        .collect();
    let mut noise = (template.noise_points as f64 * factor).round() as usize;
    assigned += noise;

    // Absorb rounding drift in the largest group.
    let drift = n as i64 - assigned as i64;
    let largest = clusters.iter_mut().max_by_key(|c| c.point_count);
    let slot = match largest {
        Some(c) if c.point_count >= noise => &mut c.point_count,
        _ => &mut noise,
    };
    *slot = (*slot as i64 + drift).max(0) as usize;

    SceneSpec {
        clusters,
        noise_points: noise,
        ..template.clone()
    }
}

/// Single-cluster template used by the CLI and the complexity tests: the
/// chain is built with gaps below `threshold` and laid out as a strip.
pub fn default_template(config: &SegmentConfig, seed: u64) -> SceneSpec {
    SceneSpec {
        clusters: vec![ClusterSpec {
            center: [0.0, 0.0, 2.0].into(),
            point_count: 1000,
            max_gap: config.threshold / 1.01,
            extent: 25.0 * config.threshold,
        }],
        seed,
        ..Default::default()
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

/// Least-squares slope of `ln(y)` against `ln(x)`; `None` with fewer than two
/// usable points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Run both segmenters on a scene scaled to each size. Counters come from
/// the first repetition (they are deterministic); wall times are medians.
pub fn run_benchmark(config: &BenchConfig) -> BenchTable {
    assert!(config.repetitions >= 1, "need at least one repetition");
    assert!(
        config.sizes.windows(2).all(|w| w[0] <= w[1]),
        "sizes must be ascending"
    );

    let mut rows = Vec::with_capacity(config.sizes.len());
    for &n in &config.sizes {
        let scene = generate_scene_labeled(&scale_scene(&config.template, n));
        let cloud = &scene.cloud;

        let mut chunked_times = Vec::with_capacity(config.repetitions);
        let mut chunked = None;
        for _ in 0..config.repetitions {
            let t = Instant::now();
            let (seg, stats) = segment_chunked_with_stats(cloud, &config.segment);
            chunked_times.push(t.elapsed().as_secs_f64() * 1e3);
            chunked.get_or_insert((seg.num_objects, stats));
        }
        let (chunked_objects, chunked_stats) = chunked.expect("at least one repetition");

        let (naive_evals, naive_objects, naive_ms) = if n <= config.naive_cutoff {
            let mut times = Vec::with_capacity(config.repetitions);
            let mut first = None;
            for _ in 0..config.repetitions {
                let t = Instant::now();
                let (seg, stats) = segment_naive_with_stats(cloud, &config.segment);
                times.push(t.elapsed().as_secs_f64() * 1e3);
                first.get_or_insert((seg.num_objects, stats.distance_evals));
            }
            let (objects, evals) = first.expect("at least one repetition");
            (Some(evals), Some(objects), Some(median(times)))
        } else {
            (None, None, None)
        };

        rows.push(BenchRow {
            n: cloud.len(),
            expected_objects: scene.expected_objects,
            naive_evals,
            naive_objects,
            naive_ms,
            chunked_probes: chunked_stats.chunk_probes,
            chunked_quantizations: chunked_stats.quantizations,
            chunked_objects,
            chunked_ms: median(chunked_times),
        });
    }

    let naive_slope = log_log_slope(
        &rows
            .iter()
            .filter_map(|r| r.naive_evals.map(|e| (r.n as f64, e as f64)))
            .collect::<Vec<_>>(),
    );
    let chunked_slope = log_log_slope(
        &rows
            .iter()
            .map(|r| (r.n as f64, r.chunked_probes as f64))
            .collect::<Vec<_>>(),
    );
    BenchTable {
        rows,
        naive_slope,
        chunked_slope,
    }
}
