use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use echomap_core::bench::{default_template, run_benchmark, BenchConfig};
use echomap_core::cloud::{
    depth_frame_to_cloud, generate_scene, parse_depth_raw, parse_ply, write_ply_ascii, Intrinsics, SceneSpec,
};
use echomap_core::metrics::{FrameResult, MetricsReport};
use echomap_core::midi::{events_to_midi, render_wav, write_smf, WavOptions, DEFAULT_TEMPO, DEFAULT_TICKS_PER_QUARTER};
use echomap_core::segment::{segment_chunked_with_stats, segment_naive_with_stats, Connectivity, SegmentConfig};
use echomap_core::sonify::{cell_labels_from_segmentation, downsample, events_to_json_lines, schedule_frame, SonifyConfig};

use crate::inputs::{parse_results, parse_truth, project_cloud};
use crate::{emit, env_seed, read, Algo, BenchArgs, Emit, EvalArgs, GenArgs, InputFormat, SegmentArgs, SegmentOpts, SonifyArgs};

impl SegmentOpts {
    fn config(&self) -> Result<SegmentConfig> {
        if !(self.chunk_size > 0.0) || !(self.threshold > 0.0) {
            bail!("--chunk-size and --threshold must be positive");
        }
        Ok(SegmentConfig {
            chunk_size: self.chunk_size,
            threshold: self.threshold,
            connectivity: connectivity(self.connectivity),
            min_points_per_object: self.min_points,
        })
    }
}

fn connectivity(n: u32) -> Connectivity {
    Connectivity::try_from(n).expect("validated by the argument parser")
}

pub fn gen(args: GenArgs) -> Result<()> {
    let raw = read(&args.spec)?;
    let mut value: Value = serde_json::from_slice(&raw).context("scene spec is not valid JSON")?;
    if let (Some(obj), Some(seed)) = (value.as_object_mut(), env_seed()?) {
        obj.entry("seed").or_insert(json!(seed));
    }
    let spec: SceneSpec = serde_json::from_value(value).context("invalid scene spec")?;
    for (i, c) in spec.clusters.iter().enumerate() {
        if !(c.max_gap > 0.0 && c.extent > 0.0) {
            bail!("cluster {i}: max_gap and extent must be positive");
        }
    }
    let (cloud, expected) = generate_scene(&spec);
    emit(args.out.as_deref(), &write_ply_ascii(&cloud))?;
    if let Some(path) = args.truth {
        let truth = json!({ "frame_id": 0, "expected_objects": expected });
        emit(Some(&path), format!("{truth}\n").as_bytes())?;
    }
    Ok(())
}

pub fn segment(args: SegmentArgs) -> Result<()> {
    let config = args.opts.config()?;
    let report = parse_ply(&read(&args.input)?).with_context(|| format!("parsing {}", args.input.display()))?;
    if report.dropped_non_finite > 0 {
        eprintln!("dropped {} vertices with non-finite coordinates", report.dropped_non_finite);
    }
    let started = Instant::now();
    let (seg, stats) = match args.algo {
        Algo::Chunked => segment_chunked_with_stats(&report.cloud, &config),
        Algo::Naive => segment_naive_with_stats(&report.cloud, &config),
    };
    eprintln!(
        "{} points, {} objects, {} discarded, distance_evals={} chunk_probes={} wall_time_us={}",
        report.cloud.len(),
        seg.num_objects,
        seg.discarded.len(),
        stats.distance_evals,
        stats.chunk_probes,
        started.elapsed().as_micros()
    );
    let mut out = serde_json::to_vec(&seg)?;
    out.push(b'\n');
    emit(args.out.as_deref(), &out)
}

fn intrinsics(args: &SonifyArgs) -> Result<Intrinsics> {
    match (args.fx, args.fy, args.cx, args.cy) {
        (Some(fx), Some(fy), Some(cx), Some(cy)) => {
            if !(fx > 0.0 && fy > 0.0) {
                bail!("--fx and --fy must be positive");
            }
            Ok(Intrinsics::new(fx, fy, cx, cy))
        }
        _ => bail!("--fx, --fy, --cx and --cy are required for PLY input and for --segment"),
    }
}

pub fn sonify(args: SonifyArgs) -> Result<()> {
    let config = SonifyConfig {
        start: args.start,
        end: args.end,
        range: args.range,
        grid_width: args.grid_width,
        grid_height: args.grid_height,
        inter_onset: args.inter_onset,
        note_duration: args.note_duration,
        clamp_near: !args.no_clamp_near,
        base_velocity: args.velocity,
    };
    config.validate()?;

    let format = match args.format {
        Some(f) => f,
        None => match args.input.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("ply") => InputFormat::Ply,
            _ => InputFormat::Raw,
        },
    };
    let bytes = read(&args.input)?;
    let frame = match format {
        InputFormat::Raw => parse_depth_raw(&bytes, args.width, args.height, args.scale)?,
        InputFormat::Ply => {
            let cloud = parse_ply(&bytes)?.cloud;
            project_cloud(&cloud, args.width, args.height, &intrinsics(&args)?)?
        }
    };

    let labels = if args.segment {
        let cloud = depth_frame_to_cloud(&frame, &intrinsics(&args)?);
        let (seg, _) = segment_chunked_with_stats(&cloud, &args.seg_opts.config()?);
        eprintln!("segmented {} points into {} objects", cloud.len(), seg.num_objects);
        Some(cell_labels_from_segmentation(&frame, &seg, &config)?)
    } else {
        None
    };

    let grid = downsample(&frame, &config);
    let events = schedule_frame(&grid, &config, labels.as_ref())?;
    let out = match args.emit {
        Emit::Json => events_to_json_lines(&events).into_bytes(),
        Emit::Midi => write_smf(&events_to_midi(&events, DEFAULT_TICKS_PER_QUARTER, DEFAULT_TEMPO)?),
        Emit::Wav => {
            if args.sample_rate < 8000 {
                bail!("--sample-rate must be at least 8000");
            }
            render_wav(
                &events,
                &WavOptions {
                    sample_rate: args.sample_rate,
                    ..Default::default()
                },
            )
        }
    };
    emit(args.out.as_deref(), &out)
}

pub fn bench(args: BenchArgs) -> Result<()> {
    if args.reps == 0 {
        bail!("--reps must be at least 1");
    }
    if args.sizes.is_empty() || args.sizes.windows(2).any(|w| w[0] > w[1]) {
        bail!("--sizes must be a non-empty ascending list");
    }
    let segment = SegmentConfig {
        chunk_size: args.chunk_size,
        threshold: args.threshold,
        connectivity: connectivity(args.connectivity),
        min_points_per_object: 0,
    };
    let seed = env_seed()?.unwrap_or(0);
    let template = match &args.spec {
        Some(path) => serde_json::from_slice(&read(path)?).context("invalid template scene")?,
        None => default_template(&segment, seed),
    };
    let table = run_benchmark(&BenchConfig {
        sizes: args.sizes,
        template,
        segment,
        repetitions: args.reps,
        naive_cutoff: args.cutoff,
    });
    let slope = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.3}"));
    eprintln!(
        "log-log slope: naive_evals {} chunked_probes {}",
        slope(table.naive_slope),
        slope(table.chunked_slope)
    );
    emit(args.out.as_deref(), table.to_csv().as_bytes())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let truth = parse_truth(&read(&args.truth)?)?;
    let results = parse_results(&read(&args.results)?)?;
    if truth.len() != results.len() {
        bail!("truth has {} frames but results have {}", truth.len(), results.len());
    }
    let frames = truth
        .iter()
        .zip(&results)
        .enumerate()
        .map(|(i, (t, r))| FrameResult {
            frame_id: r.frame_id.or(t.frame_id).unwrap_or(i as u64),
            expected_objects: t.expected,
            detected_objects: r.detected,
            distance_evals: r.distance_evals,
            chunk_probes: r.chunk_probes,
            wall_time: r.wall_time,
        })
        .collect();
    let report = MetricsReport::from_frames(frames)?;
    let mut out = serde_json::to_vec_pretty(&report)?;
    out.push(b'\n');
    emit(args.out.as_deref(), &out)
}
