use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod inputs;

#[derive(Debug, Parser)]
#[command(name = "echomap", version, about = "Depth sonification and point-cloud segmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic scene and write it as PLY.
    Gen(GenArgs),
    /// Segment a PLY point cloud into objects.
    Segment(SegmentArgs),
    /// Turn a depth frame into notes (JSON lines, MIDI or WAV).
    Sonify(SonifyArgs),
    /// Benchmark the chunked and naive segmenters over cloud sizes.
    Bench(BenchArgs),
    /// Score detected object counts against ground truth.
    Eval(EvalArgs),
}

#[derive(Debug, clap::Args)]
struct GenArgs {
    /// Scene description (JSON).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write `{"frame_id", "expected_objects"}` here.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Chunked,
    Naive,
}

#[derive(Debug, clap::Args)]
struct SegmentOpts {
    /// Chunk side in meters (chunked).
    #[arg(long, default_value_t = 0.1)]
    chunk_size: f64,
    /// Linking distance in meters (naive).
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    #[arg(long, default_value_t = 26, value_parser = parse_connectivity)]
    connectivity: u32,
    /// Drop objects with fewer points (0 keeps everything).
    #[arg(long, default_value_t = 0)]
    min_points: usize,
}

fn parse_connectivity(s: &str) -> std::result::Result<u32, String> {
    match s {
        "6" => Ok(6),
        "26" => Ok(26),
        _ => Err(format!("connectivity must be 6 or 26, got `{s}`")),
    }
}

#[derive(Debug, clap::Args)]
struct SegmentArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Chunked)]
    algo: Algo,
    #[command(flatten)]
    opts: SegmentOpts,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Json,
    Midi,
    Wav,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Raw,
    Ply,
}

#[derive(Debug, clap::Args)]
struct SonifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Input format; inferred from the extension when absent.
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    /// Meters per raw depth unit.
    #[arg(long, default_value_t = 0.001)]
    scale: f64,
    #[arg(long, default_value_t = 0.3)]
    start: f64,
    #[arg(long, default_value_t = 6.0)]
    end: f64,
    #[arg(long, default_value_t = 30)]
    range: u32,
    #[arg(long, default_value_t = 16)]
    grid_width: usize,
    #[arg(long, default_value_t = 12)]
    grid_height: usize,
    /// Milliseconds between traversal slots.
    #[arg(long, default_value_t = 25)]
    inter_onset: u32,
    #[arg(long, default_value_t = 20)]
    note_duration: u32,
    /// Rest instead of playing the top pitch for depths nearer than --start.
    #[arg(long)]
    no_clamp_near: bool,
    #[arg(long, default_value_t = 100)]
    velocity: u8,
    #[arg(long, value_enum, default_value_t = Emit::Json)]
    emit: Emit,
    #[arg(long, default_value_t = 44_100)]
    sample_rate: u32,
    /// Segment the frame and give each object its own velocity.
    #[arg(long)]
    segment: bool,
    #[command(flatten)]
    seg_opts: SegmentOpts,
    #[arg(long)]
    fx: Option<f64>,
    #[arg(long)]
    fy: Option<f64>,
    #[arg(long)]
    cx: Option<f64>,
    #[arg(long)]
    cy: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct BenchArgs {
    /// Comma-separated ascending point counts.
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000,8000,16000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Largest cloud the naive segmenter is run on.
    #[arg(long, default_value_t = echomap_core::bench::DEFAULT_NAIVE_CUTOFF)]
    cutoff: usize,
    /// Template scene (JSON); defaults to a single chained cluster.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0.04)]
    chunk_size: f64,
    #[arg(long, default_value_t = 0.02)]
    threshold: f64,
    #[arg(long, default_value_t = 26, value_parser = parse_connectivity)]
    connectivity: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct EvalArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Write to `out`, or to standard output when absent.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("ECHOMAP_SEED") {
        Ok(v) => match v.trim().parse() {
            Ok(seed) => Ok(Some(seed)),
            Err(_) => bail!("ECHOMAP_SEED must be an unsigned integer, got `{v}`"),
        },
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Segment(args) => commands::segment(args),
        Command::Sonify(args) => commands::sonify(args),
        Command::Bench(args) => commands::bench(args),
        Command::Eval(args) => commands::eval(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
