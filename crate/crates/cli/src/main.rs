use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use stipple::analysis::{self, bench};
use stipple::format::estimate::{deflated_size, estimate_file_size};
use stipple::pipeline::{self, FrameSequence, FrameSource, RunOptions};
use stipple::raster::save_image;
use stipple::render::{self, ColorMode, InterpolateOptions, RasterOptions};
use stipple::{conformance, synth, Backend, Error, StippleConfig, StippleDocument};

#[derive(Parser)]
#[command(name = "stipple", version, about = "Temporally coherent stippled video")]
struct Cli {
    /// Worker threads (default: all cores). Never changes the output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Grid,
    Brute,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Grid => Backend::Grid,
            BackendArg::Brute => Backend::BruteForce,
        }
    }
}

#[derive(Args)]
struct StippleArgs {
    /// Tone sites at the first frame.
    #[arg(long, default_value_t = 1000)]
    sites: usize,
    /// Support points per site.
    #[arg(long, default_value_t = 10)]
    alpha: usize,
    #[arg(long, value_enum, default_value = "on")]
    fading: Switch,
    /// Frequency (edge) sites at the first frame; 0 disables the edge layer.
    #[arg(long, default_value_t = 0)]
    freq_sites: usize,
    /// Sobel magnitude cutoff.
    #[arg(long, default_value_t = 128.0)]
    freq_threshold: f64,
    #[arg(long)]
    primary_colors: bool,
    /// Store gradient orientations on frequency sites.
    #[arg(long)]
    patterns: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Correction passes per frame.
    #[arg(long, default_value_t = 2)]
    passes: usize,
    #[arg(long, value_enum, default_value = "grid")]
    backend: BackendArg,
}

impl StippleArgs {
    fn config(&self) -> StippleConfig {
        StippleConfig {
            n_sites: self.sites,
            alpha: self.alpha,
            fading: matches!(self.fading, Switch::On),
            freq_sites: self.freq_sites,
            freq_threshold: self.freq_threshold,
            primary_colors: self.primary_colors,
            patterns: self.patterns,
            seed: self.seed,
            correction_passes: self.passes,
            backend: self.backend.into(),
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Stipple a directory of frame_<index>.ppm|pgm files into an STPL document.
    Stipple {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Checkpoint directory (default: <output>.ckpt).
        #[arg(long)]
        checkpoints: Option<PathBuf>,
        /// Continue from the latest checkpoint.
        #[arg(long)]
        resume: bool,
        /// Stop after this frame index; finish later with --resume.
        #[arg(long)]
        stop_after: Option<u64>,
        #[arg(long, default_value_t = 25.0)]
        fps: f64,
        #[command(flatten)]
        stipple: StippleArgs,
    },
    /// Rasterize a document at a (possibly fractional) frame position.
    Render {
        document: PathBuf,
        #[arg(long)]
        at: f64,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 1.0)]
        contrast: f64,
        /// Write a PGM with luminance-only dots.
        #[arg(long)]
        grayscale: bool,
        /// Draw oriented sites as segments.
        #[arg(long)]
        patterns: bool,
        /// Fade births and deaths in over the neighbouring frame interval.
        #[arg(long)]
        soft_birth: bool,
    },
    /// Spectral and summary statistics of a document.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Predict distinct sites and file size for a frame directory.
    Estimate {
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        sites: usize,
        #[arg(long, value_enum, default_value = "on")]
        fading: Switch,
        /// Compare against an already stippled document.
        #[arg(long)]
        document: Option<PathBuf>,
    },
    /// Time the pipeline on the shrinking-disk toy video (CSV). Single-threaded unless --threads is given.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1000,2000")]
        sites: Vec<usize>,
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, default_value_t = 10)]
        frames: usize,
        #[arg(long, value_enum, default_value = "brute")]
        backend: BackendArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic frame sequence.
    Synth {
        #[arg(value_enum)]
        kind: SynthKind,
        output: PathBuf,
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 10)]
        frames: usize,
    },
    /// Write the shared interpolation vectors and STPL reader samples.
    Vectors { output: PathBuf },
}

#[derive(Subcommand)]
enum Analyze {
    /// Radially averaged power spectrum of one frame's sites (CSV).
    Spectrum {
        document: PathBuf,
        #[arg(long, default_value_t = 0)]
        frame: u64,
        #[arg(long, default_value_t = analysis::DEFAULT_BINS)]
        bins: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Per-frame live and cumulative site counts.
    Stats { document: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    /// Shrinking black disk (the benchmark toy video).
    Disk,
    /// Square fading to white next to a static bar.
    Fade,
}

fn read_document(path: &Path) -> anyhow::Result<StippleDocument> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    StippleDocument::read_from(std::io::BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn cmd_stipple(
    input: &Path,
    output: &Path,
    checkpoints: Option<PathBuf>,
    resume: bool,
    stop_after: Option<u64>,
    fps: f64,
    args: &StippleArgs,
) -> anyhow::Result<()> {
    if !fps.is_finite() || fps <= 0.0 {
        bail!(UsageError("--fps must be positive".into()));
    }
    if args.sites == 0 || args.alpha == 0 {
        bail!(UsageError("--sites and --alpha must be at least 1".into()));
    }
    let source = FrameSequence::open(input).with_context(|| format!("reading frames from {}", input.display()))?;
    let (w, h) = source.dimensions();
    println!("{} frames of {w}x{h} from {}", source.len(), input.display());
    let dir = checkpoints.unwrap_or_else(|| {
        let mut d = output.as_os_str().to_owned();
        d.push(".ckpt");
        PathBuf::from(d)
    });
    let opts = RunOptions {
        checkpoint_dir: Some(dir.clone()),
        resume,
        stop_after,
        fps,
    };
    let outcome = pipeline::run(&source, &args.config(), &opts, |r| {
        let freq = r.frequency.as_ref();
        println!(
            "frame {}: {} sites (tone {}, freq {}) density {:.4} born {} died {}",
            r.frame_index,
            r.live_sites(),
            r.tone.target_sites,
            freq.map_or(0, |f| f.target_sites),
            r.d_now,
            r.tone.births + freq.map_or(0, |f| f.births),
            r.tone.deaths + freq.map_or(0, |f| f.deaths),
        );
    })?;
    if outcome.resumed_from > 0 {
        println!("resumed at frame {}", outcome.resumed_from);
    }
    match outcome.document {
        Some(doc) => {
            let file = fs::File::create(output).with_context(|| format!("creating {}", output.display()))?;
            let mut sink = std::io::BufWriter::new(file);
            doc.write_to(&mut sink)?;
            sink.flush()?;
            println!(
                "wrote {}: {} frames, {} distinct sites",
                output.display(),
                doc.frame_count,
                doc.total_sites()
            );
        }
        None => println!("stopped; checkpoints in {} (continue with --resume)", dir.display()),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_render(
    document: &Path,
    at: f64,
    output: &Path,
    scale: f64,
    contrast: f64,
    grayscale: bool,
    patterns: bool,
    soft_birth: bool,
) -> anyhow::Result<()> {
    if !scale.is_finite() || scale <= 0.0 {
        bail!(UsageError("--scale must be positive".into()));
    }
    let doc = read_document(document)?;
    let points = render::interpolate(&doc, at, contrast, InterpolateOptions { soft_birth })?;
    let opts = RasterOptions {
        mode: if grayscale { ColorMode::Grayscale } else { ColorMode::Color },
        patterns,
    };
    let img = render::rasterize(&points, doc.width, doc.height, scale, opts);
    save_image(&img, output).with_context(|| format!("writing {}", output.display()))?;
    println!("{} points at t={at} -> {}x{} {}", points.len(), img.width(), img.height(), output.display());
    Ok(())
}

fn cmd_analyze(cmd: Analyze) -> anyhow::Result<()> {
    match cmd {
        Analyze::Spectrum {
            document,
            frame,
            bins,
            output,
        } => {
            let doc = read_document(&document)?;
            if frame >= doc.frame_count {
                bail!(UsageError(format!("frame {frame} outside the {}-frame document", doc.frame_count)));
            }
            let points: Vec<_> = doc
                .tracks
                .iter()
                .filter_map(|t| t.sample_at(frame))
                .map(|s| stipple::Point::new(s.x, s.y))
                .collect();
            let spectrum = analysis::radial_spectrum(&points, (doc.width as f64, doc.height as f64), bins)?;
            let peak = spectrum.peak();
            eprintln!(
                "{} points; peak annulus {peak} (radius {:.2}), low-band/mean {:.3}",
                points.len(),
                spectrum.radii[peak],
                spectrum.low_band_mean(0.1) / spectrum.mean()
            );
            emit(output.as_deref(), &spectrum.to_csv())
        }
        Analyze::Stats { document } => {
            let doc = read_document(&document)?;
            println!("size {}x{} frames {} fps {}", doc.width, doc.height, doc.frame_count, doc.fps);
            println!("distinct sites {}, mean live {:.1}", doc.total_sites(), doc.mean_live_sites());
            println!("frame,live,born,died");
            for k in 0..doc.frame_count {
                let born = doc.tracks.iter().filter(|t| t.birth == k).count();
                let died = doc.tracks.iter().filter(|t| t.death() == k).count();
                println!("{k},{},{born},{died}", doc.live_count(k));
            }
            Ok(())
        }
    }
}

fn cmd_estimate(input: &Path, sites: usize, fading: Switch, document: Option<PathBuf>) -> anyhow::Result<()> {
    let source = FrameSequence::open(input).with_context(|| format!("reading frames from {}", input.display()))?;
    let fps = 25.0;
    let e = pipeline::estimate_shot(&source, sites, matches!(fading, Switch::On))?;
    println!("frames {}", e.frames);
    println!("initial density {:.6}", e.d_initial);
    println!("estimated total sites {}", e.total_sites);
    println!("estimated mean live sites {:.1}", e.mean_live_sites);
    println!("estimated compressed size {:.0} bytes", e.file_bytes);
    let hour = estimate_file_size((3600.0 * fps) as u64, e.mean_live_sites);
    println!("one hour at {fps} fps: {:.1} MB", hour / 1e6);
    if let Some(path) = document {
        let doc = read_document(&path)?;
        let deflated = deflated_size(doc.to_text()?.as_bytes());
        println!("actual total sites {}", doc.total_sites());
        println!("actual mean live sites {:.1}", doc.mean_live_sites());
        println!("actual deflated size {deflated} bytes");
    }
    Ok(())
}

fn cmd_bench(sites: Vec<usize>, size: usize, frames: usize, backend: BackendArg, output: Option<PathBuf>) -> anyhow::Result<()> {
    if frames < 2 || size < 8 || sites.is_empty() {
        bail!(UsageError("bench needs --frames >= 2, --size >= 8 and at least one site count".into()));
    }
    let cfg = bench::BenchConfig {
        site_counts: sites.clone(),
        size,
        frames,
        backend: backend.into(),
        ..Default::default()
    };
    let rows = bench::bench_pipeline(&cfg)?;
    for &n in &sites {
        eprintln!(
            "{n} sites: forward {:.3}s, reversed {:.3}s",
            bench::total_seconds(&rows, n, bench::Direction::Forward),
            bench::total_seconds(&rows, n, bench::Direction::Reversed)
        );
    }
    emit(output.as_deref(), &bench::to_csv(&rows))
}

fn cmd_synth(kind: SynthKind, output: &Path, size: usize, frames: usize) -> anyhow::Result<()> {
    if size < 4 || frames < 2 {
        bail!(UsageError("synth needs --size >= 4 and --frames >= 2".into()));
    }
    let seq = match kind {
        SynthKind::Disk => synth::toy_video(size, frames),
        SynthKind::Fade => synth::fading_square(size, size, frames),
    };
    synth::write_sequence(output, &seq)?;
    println!("wrote {frames} frames to {}", output.display());
    Ok(())
}

/// Bad arguments detected after parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(e) if !e.is_input_error() => 4,
        _ => 3,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Stipple {
            input,
            output,
            checkpoints,
            resume,
            stop_after,
            fps,
            stipple,
        } => cmd_stipple(&input, &output, checkpoints, resume, stop_after, fps, &stipple),
        Command::Render {
            document,
            at,
            output,
            scale,
            contrast,
            grayscale,
            patterns,
            soft_birth,
        } => cmd_render(&document, at, &output, scale, contrast, grayscale, patterns, soft_birth),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Estimate {
            input,
            sites,
            fading,
            document,
        } => cmd_estimate(&input, sites, fading, document),
        Command::Bench {
            sites,
            size,
            frames,
            backend,
            output,
        } => cmd_bench(sites, size, frames, backend, output),
        Command::Synth {
            kind,
            output,
            size,
            frames,
        } => cmd_synth(kind, &output, size, frames),
        Command::Vectors { output } => {
            let n = conformance::write_suite(&output)?;
            println!("wrote {n} files to {}", output.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // the complexity benchmark is defined single-threaded
    let threads = cli.threads.or(matches!(cli.command, Command::Bench { .. }).then_some(1));
    if let Some(k) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors embed their cause in the message; skip repeats
            let mut msg = String::new();
            for cause in e.chain().map(|c| c.to_string()) {
                if !msg.contains(&cause) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&cause);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}
