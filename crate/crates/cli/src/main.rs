//! `abandon`: command-line front end for the abandoned-luggage detector.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use abandon_core::background::temporal_median;
use abandon_core::cascade::{ClassifierModel, LinearModel, TrainParams};
use abandon_core::config::{PipelineConfig, KEYS};
use abandon_core::eval::{self, Grace};
use abandon_core::pipeline::{draw_overlay, Pipeline};
use abandon_core::samplegen::{self, SampleStage, TemplateImage, TemplateKind};
use abandon_core::synth::assets::{self, LuggageOracle, UnattendedOracle};
use abandon_core::synth::{self, SceneRenderer, SceneScript};
use abandon_core::training::{train_cascade, train_stage, CascadeRecipe};
use abandon_core::video::{self, FrameSource};
use abandon_core::{pnm, Frame};
use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

/// Exit status for unreadable input.
const EXIT_INPUT: u8 = 2;
/// Exit status for an invalid configuration.
const EXIT_CONFIG: u8 = 3;
/// Exit status for a missing or incompatible model.
const EXIT_MODEL: u8 = 4;

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 1, error: e.into() }
    }
}

trait ExitWith<T> {
    fn exit_with(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit_with(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

type CliResult = Result<(), Failure>;

#[derive(Parser)]
#[command(name = "abandon", version, about = "Abandoned-luggage detection for fixed cameras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect abandoned luggage in a frame sequence.
    Run(RunArgs),
    /// Generate a training sample set by compositing templates over a background.
    GenSamples(GenArgs),
    /// Train one linear cascade stage on a sample set.
    Train(TrainArgs),
    /// Score a detections file against ground truth.
    Eval(EvalArgs),
    /// Render a scripted scene to frames and ground truth.
    Synth(SynthArgs),
    /// Measure single-threaded pipeline throughput on a rendered scene.
    Bench(BenchArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set sod.min_area=100`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Frame directory, or `-` for a P6 stream on stdin (io.input).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Detections file, or `-` for stdout (io.output).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write annotated frames here (io.overlay_dir).
    #[arg(long)]
    overlay_dir: Option<PathBuf>,
    /// Stage-one model file.
    #[arg(long, required_unless_present_any = ["reference_classifiers", "print_config"])]
    stage1: Option<PathBuf>,
    /// Stage-two model file.
    #[arg(long, required_unless_present_any = ["reference_classifiers", "print_config"])]
    stage2: Option<PathBuf>,
    /// Use the colour-keyed reference classifiers for the built-in synthetic
    /// sprites instead of model files.
    #[arg(long, conflicts_with_all = ["stage1", "stage2"])]
    reference_classifiers: bool,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct BackgroundSource {
    /// Background plate (P6).
    #[arg(long, conflicts_with = "video")]
    background: Option<PathBuf>,
    /// Frame directory to estimate the background plate from.
    #[arg(long)]
    video: Option<PathBuf>,
    /// Number of leading frames of `--video` to take the median of.
    #[arg(long, default_value_t = 25)]
    bg_frames: usize,
}

impl BackgroundSource {
    fn load(&self) -> anyhow::Result<Frame> {
        if let Some(p) = &self.background {
            return pnm::read_ppm(p).with_context(|| format!("reading background {}", p.display()));
        }
        let Some(dir) = &self.video else {
            bail!("give --background or --video");
        };
        let frames = FrameSource::open_dir(dir)?
            .take(self.bg_frames.max(1))
            .collect::<Result<Vec<_>, _>>()?;
        temporal_median(&frames).with_context(|| format!("no frames in {}", dir.display()))
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    source: BackgroundSource,
    /// 1 for luggage vs background, 2 for unattended vs attended.
    #[arg(long, value_parser = ["1", "2"])]
    stage: String,
    /// Luggage templates (PAM). Defaults to the built-in set.
    #[arg(long)]
    luggage: Vec<PathBuf>,
    /// Attended-luggage templates (PAM) for stage 2. Defaults to the built-in set.
    #[arg(long)]
    attended: Vec<PathBuf>,
    #[arg(long, default_value_t = 250)]
    n_pos: usize,
    #[arg(long, default_value_t = 250)]
    n_neg: usize,
    /// Sample size WxH. Defaults to 24x18 for stage 1 and 60x28 for stage 2.
    #[arg(long, value_parser = parse_size)]
    size: Option<(usize, usize)>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Sample set directory written by `gen-samples`.
    #[arg(long)]
    samples: PathBuf,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    #[arg(long, default_value_t = TrainParams::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = TrainParams::default().learning_rate)]
    learning_rate: f64,
    #[arg(long, default_value_t = TrainParams::default().l2)]
    l2: f64,
    /// Seeds both the split and the SGD shuffle.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    detections: PathBuf,
    /// Annotation file: `frame_start frame_end x y w h` per line.
    #[arg(long)]
    truth: PathBuf,
    /// Number of frames in the sequence.
    #[arg(long)]
    frames: u64,
    #[arg(long, default_value_t = eval::DEFAULT_EVAL_IOU)]
    iou: f64,
    /// Ignore the first N frames of every annotation (detection latency).
    #[arg(long, default_value_t = 0)]
    grace: u64,
}

#[derive(Args)]
struct SynthArgs {
    /// Scene script. Defaults to the bundled drop scene.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Frame directory to write, or `-` for a P6 stream on stdout.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth annotation file to write.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Render only the first N frames.
    #[arg(long)]
    frames: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Scene script. Defaults to the bundled 360x288 drop scene.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Use the reference classifiers rather than training linear stages.
    #[arg(long)]
    reference_classifiers: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or("expected WxH")?;
    let w: usize = w.parse().map_err(|_| "bad width")?;
    let h: usize = h.parse().map_err(|_| "bad height")?;
    if w == 0 || h == 0 {
        return Err("size must be non-zero".into());
    }
    Ok((w, h))
}

fn build_config(args: &RunArgs) -> anyhow::Result<PipelineConfig> {
    let mut config = match &args.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    for o in &args.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {o:?} (known keys: {})", key_list()))?;
        config.set(k.trim(), v)?;
    }
    if let Some(p) = &args.input {
        config.input = Some(p.clone());
    }
    if let Some(p) = &args.output {
        config.output = Some(p.clone());
    }
    if let Some(p) = &args.overlay_dir {
        config.overlay_dir = Some(p.clone());
    }
    Ok(config)
}

fn key_list() -> String {
    KEYS.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(", ")
}

fn load_model(path: &Path) -> anyhow::Result<LinearModel> {
    LinearModel::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn cmd_run(args: RunArgs) -> CliResult {
    let config = build_config(&args).exit_with(EXIT_CONFIG)?;
    if args.print_config {
        print!("{}", config.to_text());
        return Ok(());
    }
    let input = config
        .input
        .clone()
        .ok_or_else(|| anyhow!("no input: pass --input or set io.input"))
        .exit_with(EXIT_CONFIG)?;
    let (stage1, stage2): (Box<dyn ClassifierModel>, Box<dyn ClassifierModel>) = if args.reference_classifiers {
        (Box::new(LuggageOracle), Box::new(UnattendedOracle))
    } else {
        let s1 = args.stage1.as_deref().ok_or_else(|| anyhow!("--stage1 is required")).exit_with(EXIT_MODEL)?;
        let s2 = args.stage2.as_deref().ok_or_else(|| anyhow!("--stage2 is required")).exit_with(EXIT_MODEL)?;
        (
            Box::new(load_model(s1).exit_with(EXIT_MODEL)?),
            Box::new(load_model(s2).exit_with(EXIT_MODEL)?),
        )
    };
    let frames = FrameSource::open(&input)
        .with_context(|| format!("opening input {}", input.display()))
        .exit_with(EXIT_INPUT)?;
    let mut pipeline = Pipeline::new(&config, stage1, stage2).exit_with(EXIT_CONFIG)?;
    if let Some(dir) = &config.overlay_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let mut out: Box<dyn Write> = match config.output.as_deref() {
        None => Box::new(io::stdout().lock()),
        Some(p) if p == Path::new("-") => Box::new(io::stdout().lock()),
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
    };
    let mut count = 0u64;
    for frame in frames {
        let frame = frame.context("reading input frame").exit_with(EXIT_INPUT)?;
        let index = pipeline.frame_index();
        let dets = pipeline.process_frame(&frame).exit_with(EXIT_INPUT)?;
        for d in &dets {
            writeln!(out, "{}", eval::format_detection(d))?;
        }
        if let Some(dir) = &config.overlay_dir {
            video::write_frame(dir, index, &draw_overlay(&frame, &dets))?;
        }
        count += 1;
    }
    out.flush()?;
    if count == 0 {
        return Err(anyhow!("no frames in {}", input.display())).exit_with(EXIT_INPUT);
    }
    Ok(())
}

fn load_templates(paths: &[PathBuf], kind: TemplateKind, builtin: fn() -> Vec<TemplateImage>) -> anyhow::Result<Vec<TemplateImage>> {
    if paths.is_empty() {
        return Ok(builtin());
    }
    paths
        .iter()
        .map(|p| TemplateImage::load(p, kind).with_context(|| format!("loading template {}", p.display())))
        .collect()
}

fn cmd_gen_samples(args: GenArgs) -> CliResult {
    let bg = args.source.load().exit_with(EXIT_INPUT)?;
    let luggage = load_templates(&args.luggage, TemplateKind::Luggage, assets::luggage_templates).exit_with(EXIT_INPUT)?;
    let set = if args.stage == "1" {
        let size = args.size.unwrap_or(assets::STAGE1_SAMPLE_SIZE);
        samplegen::gen_stage1(&bg, &luggage, args.n_pos, args.n_neg, size, args.seed)?
    } else {
        let attended = load_templates(&args.attended, TemplateKind::Attended, assets::attended_templates).exit_with(EXIT_INPUT)?;
        let size = args.size.unwrap_or(assets::STAGE2_SAMPLE_SIZE);
        samplegen::gen_stage2(&bg, &luggage, &attended, args.n_pos, args.n_neg, size, args.seed)?
    };
    samplegen::save_sample_set(&set, &args.out)?;
    eprintln!("wrote {} samples ({}) to {}", set.len(), set.stage, args.out.display());
    Ok(())
}

fn cmd_train(args: TrainArgs) -> CliResult {
    let set = samplegen::load_sample_set(&args.samples)
        .with_context(|| format!("loading samples from {}", args.samples.display()))
        .exit_with(EXIT_INPUT)?;
    let params = TrainParams {
        epochs: args.epochs,
        learning_rate: args.learning_rate,
        l2: args.l2,
        seed: args.seed,
    };
    let (model, report) = train_stage(&set, args.train_fraction, &params)?;
    model.save(&args.out)?;
    let stage = match set.stage {
        SampleStage::Stage1 => "stage 1",
        SampleStage::Stage2 => "stage 2",
    };
    println!(
        "{stage}: trained on {} samples (augmented), train accuracy {:.2}%, held-out accuracy {:.2}% on {} samples",
        report.train_samples,
        report.train_accuracy * 100.0,
        report.test_accuracy * 100.0,
        report.test_samples
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> CliResult {
    let dets = eval::load_detections(&args.detections).exit_with(EXIT_INPUT)?;
    let truth = eval::load_annotations(&args.truth).exit_with(EXIT_INPUT)?;
    let report = eval::evaluate(&dets, &truth, args.frames, args.iou, Grace(args.grace));
    print!("{report}");
    Ok(())
}

fn load_script(path: Option<&Path>) -> anyhow::Result<SceneScript> {
    Ok(match path {
        Some(p) => synth::load_scene(p).with_context(|| format!("loading scene {}", p.display()))?,
        None => assets::drop_scene()?,
    })
}

fn cmd_synth(args: SynthArgs) -> CliResult {
    let mut script = load_script(args.scene.as_deref()).exit_with(EXIT_INPUT)?;
    if let Some(n) = args.frames {
        script.duration = script.duration.min(n.max(1));
    }
    let renderer = SceneRenderer::new(&script)?;
    if args.out == Path::new("-") {
        let mut out = io::BufWriter::new(io::stdout().lock());
        for f in renderer.frames() {
            out.write_all(&pnm::encode_ppm(&f?))?;
        }
        out.flush()?;
    } else {
        fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
        for i in 0..renderer.len() {
            video::write_frame(&args.out, i, &renderer.frame(i)?)?;
        }
    }
    if let Some(t) = &args.truth {
        eval::save_annotations(t, &synth::ground_truth(&script))?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    let script = load_script(args.scene.as_deref()).exit_with(EXIT_INPUT)?;
    let renderer = SceneRenderer::new(&script)?;
    eprintln!("rendering {} frames at {}x{}", script.duration, script.width, script.height);
    let frames = renderer.frames().collect::<Result<Vec<_>, _>>()?;

    let (stage1, stage2): (Box<dyn ClassifierModel>, Box<dyn ClassifierModel>) = if args.reference_classifiers {
        (Box::new(LuggageOracle), Box::new(UnattendedOracle))
    } else {
        let plate = temporal_median(&frames[..frames.len().min(25)])?;
        let recipe = CascadeRecipe {
            samples_per_class: 250,
            stage1_size: assets::STAGE1_SAMPLE_SIZE,
            stage2_size: assets::STAGE2_SAMPLE_SIZE,
            seed: args.seed,
            train: TrainParams {
                seed: args.seed,
                ..TrainParams::default()
            },
        };
        let trained = train_cascade(&plate, &assets::luggage_templates(), &assets::attended_templates(), &recipe)?;
        (Box::new(trained.stage1), Box::new(trained.stage2))
    };

    let mut pipeline = Pipeline::new(&PipelineConfig::default(), stage1, stage2)?;
    let mut detections = 0usize;
    let start = Instant::now();
    for f in &frames {
        detections += pipeline.process_frame(f)?.len();
    }
    let secs = start.elapsed().as_secs_f64();
    let fps = frames.len() as f64 / secs;
    println!(
        "{} frames at {}x{} in {:.3} s: {:.1} frames/s single-threaded ({} detections)",
        frames.len(),
        script.width,
        script.height,
        secs,
        fps,
        detections
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::GenSamples(a) => cmd_gen_samples(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
