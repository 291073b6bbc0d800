//! Input decoding for the evaluation files and PLY depth frames.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use echomap_core::cloud::{DepthFrame, Intrinsics, PointCloud};

/// A truth entry: a bare count or an object carrying `expected_objects`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TruthEntry {
    Count(usize),
    Frame {
        #[serde(default)]
        frame_id: Option<u64>,
        expected_objects: usize,
    },
}

/// A result entry: a frame result (`detected_objects`) or a segmentation
/// output (`num_objects`).
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ResultEntry {
    Count(usize),
    Frame {
        #[serde(default)]
        frame_id: Option<u64>,
        detected_objects: usize,
        #[serde(default)]
        distance_evals: u64,
        #[serde(default)]
        chunk_probes: u64,
        #[serde(default)]
        wall_time: u64,
    },
    Segmentation {
        num_objects: usize,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    Many(Vec<T>),
    One(T),
}

impl<T> From<OneOrMany<T>> for Vec<T> {
    fn from(v: OneOrMany<T>) -> Self {
        match v {
            OneOrMany::Many(v) => v,
            OneOrMany::One(x) => vec![x],
        }
    }
}

pub struct Truth {
    pub frame_id: Option<u64>,
    pub expected: usize,
}

pub fn parse_truth(bytes: &[u8]) -> Result<Vec<Truth>> {
    let entries: OneOrMany<TruthEntry> =
        serde_json::from_slice(bytes).context("truth must be a count, an object with `expected_objects`, or a list of those")?;
    Ok(Vec::from(entries)
        .into_iter()
        .map(|e| match e {
            TruthEntry::Count(expected) => Truth { frame_id: None, expected },
            TruthEntry::Frame { frame_id, expected_objects } => Truth {
                frame_id,
                expected: expected_objects,
            },
        })
        .collect())
}

pub struct Detected {
    pub frame_id: Option<u64>,
    pub detected: usize,
    pub distance_evals: u64,
    pub chunk_probes: u64,
    pub wall_time: u64,
}

pub fn parse_results(bytes: &[u8]) -> Result<Vec<Detected>> {
    let entries: OneOrMany<ResultEntry> = serde_json::from_slice(bytes)
        .context("results must be segmentation outputs, frame results, counts, or a list of those")?;
    Ok(Vec::from(entries)
        .into_iter()
        .map(|e| match e {
            ResultEntry::Count(detected) => Detected {
                frame_id: None,
                detected,
                distance_evals: 0,
                chunk_probes: 0,
                wall_time: 0,
            },
            ResultEntry::Frame {
                frame_id,
                detected_objects,
                distance_evals,
                chunk_probes,
                wall_time,
            } => Detected {
                frame_id,
                detected: detected_objects,
                distance_evals,
                chunk_probes,
                wall_time,
            },
            ResultEntry::Segmentation { num_objects } => Detected {
                frame_id: None,
                detected: num_objects,
                distance_evals: 0,
                chunk_probes: 0,
                wall_time: 0,
            },
        })
        .collect())
}

/// Render a cloud into a depth image, keeping the nearest point per pixel.
pub fn project_cloud(cloud: &PointCloud, width: usize, height: usize, k: &Intrinsics) -> Result<DepthFrame> {
    if width == 0 || height == 0 {
        bail!("--width and --height must be positive");
    }
    let mut depth = vec![0.0f64; width * height];
    for p in cloud.points() {
        if p.z <= 0.0 {
            continue;
        }
        let col = (p.x * k.fx / p.z + k.cx).round();
        let row = (p.y * k.fy / p.z + k.cy).round();
        if col < 0.0 || row < 0.0 || col >= width as f64 || row >= height as f64 {
            continue;
        }
        let cell = &mut depth[row as usize * width + col as usize];
        if *cell == 0.0 || p.z < *cell {
            *cell = p.z;
        }
    }
    Ok(DepthFrame::new(width, height, depth)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use echomap_core::cloud::{depth_frame_to_cloud, Point3};

    #[test]
    fn truth_shapes() {
        assert_eq!(parse_truth(b"3").unwrap()[0].expected, 3);
        let t = parse_truth(br#"[{"frame_id":4,"expected_objects":2},5]"#).unwrap();
        assert_eq!((t[0].frame_id, t[0].expected, t[1].expected), (Some(4), 2, 5));
        assert!(parse_truth(br#"{"x":1}"#).is_err());
    }

    #[test]
    fn result_shapes() {
        let r = parse_results(
            br#"[{"num_objects":3,"labels":[0,1,2],"discarded":[]},{"frame_id":1,"detected_objects":4},7]"#,
        )
        .unwrap();
        let counts: Vec<usize> = r.iter().map(|d| d.detected).collect();
        assert_eq!(counts, vec![3, 4, 7]);
    }

    #[test]
    fn projection_inverts_back_projection() {
        let k = Intrinsics::new(50.0, 50.0, 3.5, 2.5);
        let depth: Vec<f64> = (0..8 * 6).map(|i| if i % 3 == 0 { 0.0 } else { 1.0 + i as f64 * 0.01 }).collect();
        let frame = DepthFrame::new(8, 6, depth).unwrap();
        let cloud = depth_frame_to_cloud(&frame, &k);
        assert_eq!(project_cloud(&cloud, 8, 6, &k).unwrap(), frame);
    }

    #[test]
    fn projection_keeps_nearest() {
        let k = Intrinsics::new(1.0, 1.0, 0.0, 0.0);
        let cloud = PointCloud::new(vec![Point3::new(0.0, 0.0, 3.0), Point3::new(0.0, 0.0, 2.0), Point3::new(9.0, 0.0, 1.0)]);
        let frame = project_cloud(&cloud, 2, 1, &k).unwrap();
        assert_eq!(frame.depth(), &[2.0, 0.0]);
    }
}
