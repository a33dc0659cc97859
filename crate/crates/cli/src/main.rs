use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use privshade::corpus::{generate, item_seed, ChartSpec, TruthSummary};
use privshade::perception::{
    predict_visibility_with, simulate_view, CsfModel, VisibilityOptions, ViewingGeometry,
    DEFAULT_DISTANCES_CM, DEFAULT_PPI,
};
use privshade::pipeline::{
    load_preset, preset_from_json, transform, ChartPreset, ChartType, Granularity,
    TransformOptions, TransformReport,
};
use privshade::raster::{decode_png, encode_gray_png, encode_png, RasterImage};
use privshade::segment::{segment, Component, MarkLabel, MarkMap, SegmentConfig, TextAnnotation, TextBox};
use privshade::spectral::{magnitude_spectrum, magnitude_spectrum_with_reference, FrequencySummary};
use privshade::{Error, Result};

#[derive(Parser)]
#[command(name = "privshade", version, about = "Distance-dependent privacy masking for chart images")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mask and recolor chart images.
    Transform(TransformArgs),
    /// Spectral statistics of an image's lightness channel.
    AnalyzeFrequency(AnalyzeArgs),
    /// Predicted visibility of a preset at viewing distances.
    PredictVisibility(PredictArgs),
    /// Approximate how an image looks from a distance.
    SimulateView(SimulateArgs),
    /// Write the mark label map of an image.
    Segment(SegmentArgs),
    /// Generate synthetic charts with ground truth.
    GenCorpus(CorpusArgs),
}

#[derive(Args)]
struct PresetArgs {
    /// Built-in preset: bar, scatter, line, pie or pie-study1.
    #[arg(long)]
    chart: Option<String>,
    /// Preset JSON file, applied on top of --chart when both are given.
    #[arg(long)]
    preset: Option<PathBuf>,
}

impl PresetArgs {
    fn resolve(&self) -> Result<ChartPreset> {
        let base = self.chart.as_deref().map(load_preset).transpose()?;
        match (&self.preset, base) {
            (Some(path), base) => preset_from_json(&fs::read_to_string(path)?, base.as_ref()),
            (None, Some(p)) => Ok(p),
            (None, None) => Err(Error::InvalidConfig("give --chart or --preset".into())),
        }
    }
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    preset: PresetArgs,
    /// Input PNG; repeat for batch mode, where --out names a directory.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// `fine` masks each mark class separately, `coarse` uses the area mask everywhere.
    #[arg(long)]
    granularity: Option<String>,
    /// Text box JSON (`{"boxes": [{"x", "y", "w", "h"}]}`); single input only.
    #[arg(long)]
    text_annotations: Option<PathBuf>,
    /// Write the transform report (an array in batch mode).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Transform options JSON.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Reference lightness (default: the background's).
    #[arg(long)]
    reference: Option<f64>,
    /// Also write the log-magnitude spectrum as a grayscale PNG.
    #[arg(long)]
    spectrum: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    preset: PresetArgs,
    /// Viewing distance in cm; repeatable (default 30, 60, 90).
    #[arg(long = "distance", allow_negative_numbers = true)]
    distances: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_PPI)]
    ppi: f64,
    #[arg(long, default_value_t = 100.0)]
    background_lightness: f64,
    /// Scale contrast by the share of pixels each mask keeps.
    #[arg(long)]
    duty_cycle: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    distance: f64,
    #[arg(long, default_value_t = DEFAULT_PPI)]
    ppi: f64,
}

#[derive(Args)]
struct SegmentArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Label map PNG.
    #[arg(long)]
    out: PathBuf,
    /// Components, counts and text boxes as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    text_annotations: Option<PathBuf>,
    /// Segmentation options JSON.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated chart types.
    #[arg(long, value_delimiter = ',', default_value = "bar,pie,scatter,line")]
    types: Vec<String>,
    /// Charts per type.
    #[arg(long, default_value_t = 6)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1080)]
    width: u32,
    #[arg(long, default_value_t = 1080)]
    height: u32,
    /// Also write a box-blurred copy of every chart.
    #[arg(long)]
    blur: bool,
}

/// Writes through a temporary file in the target directory, so readers
/// never see a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn print_json<T: Serialize + ?Sized>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn read_png(path: &Path) -> Result<RasterImage> {
    decode_png(&fs::read(path)?)
}

fn read_annotation(path: &Path) -> Result<TextAnnotation> {
    TextAnnotation::from_json(&fs::read_to_string(path)?)
}

fn run_transform(a: &TransformArgs) -> Result<()> {
    let preset = a.preset.resolve()?;
    let mut opts: TransformOptions = match &a.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?,
        None => TransformOptions::default(),
    };
    if let Some(g) = &a.granularity {
        opts.granularity = g.parse::<Granularity>()?;
    }
    let batch = a.inputs.len() > 1;
    let text = match &a.text_annotations {
        Some(_) if batch => {
            return Err(Error::InvalidConfig(
                "--text-annotations applies to a single --in".into(),
            ))
        }
        Some(path) => Some(read_annotation(path)?),
        None => None,
    };
    if batch {
        fs::create_dir_all(&a.out)?;
    }

    let mut reports: Vec<TransformReport> = Vec::with_capacity(a.inputs.len());
    for input in &a.inputs {
        let out_path = if batch {
            let name = input.file_name().ok_or_else(|| {
                Error::InvalidConfig(format!("input path `{}` has no file name", input.display()))
            })?;
            a.out.join(name)
        } else {
            a.out.clone()
        };
        let img = read_png(input)?;
        let (out, mut report) = transform(&img, &preset, text.as_ref(), &opts)?;
        write_atomic(&out_path, &encode_png(&out)?)?;
        log::info!("{} -> {}", input.display(), out_path.display());
        report.input = Some(input.display().to_string());
        report.output = Some(out_path.display().to_string());
        reports.push(report);
    }
    if let Some(path) = &a.report {
        if batch {
            write_json(path, &reports)?;
        } else {
            write_json(path, &reports[0])?;
        }
    }
    Ok(())
}

fn run_analyze(a: &AnalyzeArgs) -> Result<()> {
    let img = read_png(&a.input)?;
    let spec = match a.reference {
        Some(r) => magnitude_spectrum_with_reference(&img, r),
        None => magnitude_spectrum(&img),
    };
    if let Some(path) = &a.spectrum {
        write_atomic(path, &spec.to_png()?)?;
    }
    #[derive(Serialize)]
    struct Analysis {
        width: u32,
        height: u32,
        reference_lightness: f64,
        #[serde(flatten)]
        summary: FrequencySummary,
        parseval_relative_error: f64,
    }
    print_json(&Analysis {
        width: img.width(),
        height: img.height(),
        reference_lightness: spec.reference_lightness(),
        summary: FrequencySummary::of(&spec),
        parseval_relative_error: spec.parseval_relative_error(),
    })
}

fn run_predict(a: &PredictArgs) -> Result<()> {
    let preset = a.preset.resolve()?;
    let distances = if a.distances.is_empty() {
        DEFAULT_DISTANCES_CM.to_vec()
    } else {
        a.distances.clone()
    };
    let opts = VisibilityOptions {
        background_lightness: a.background_lightness,
        duty_cycle_correction: a.duty_cycle,
        ..VisibilityOptions::default()
    };
    if !(0.0..=100.0).contains(&a.background_lightness) {
        return Err(Error::Range(format!(
            "background lightness must lie in [0, 100], got {}",
            a.background_lightness
        )));
    }
    let csf = CsfModel::default();
    let reports = distances
        .iter()
        .map(|&d| predict_visibility_with(&preset, &ViewingGeometry::new(d, a.ppi)?, &csf, &opts))
        .collect::<Result<Vec<_>>>()?;
    print_json(&reports)
}

fn run_simulate(a: &SimulateArgs) -> Result<()> {
    let geom = ViewingGeometry::new(a.distance, a.ppi)?;
    let img = read_png(&a.input)?;
    let out = simulate_view(&img, &geom, &CsfModel::default());
    write_atomic(&a.out, &encode_png(&out)?)
}

#[derive(Serialize)]
struct SegmentSummary<'a> {
    width: u32,
    height: u32,
    background: privshade::raster::Rgb,
    threshold_foreground_pixels: usize,
    pixel_counts: std::collections::BTreeMap<MarkLabel, usize>,
    components: &'a [Component],
    text_boxes: &'a [TextBox],
}

fn label_counts(marks: &MarkMap) -> std::collections::BTreeMap<MarkLabel, usize> {
    let counts = marks.counts();
    MarkLabel::ALL.iter().map(|&l| (l, counts[l.index()])).collect()
}

fn run_segment(a: &SegmentArgs) -> Result<()> {
    let config: SegmentConfig = match &a.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?,
        None => SegmentConfig::default(),
    };
    let img = read_png(&a.input)?;
    let text = a.text_annotations.as_deref().map(read_annotation).transpose()?;
    let seg = segment(&img, text.as_ref(), &config)?;
    write_atomic(&a.out, &seg.marks.to_png()?)?;
    if let Some(path) = &a.json {
        write_json(
            path,
            &SegmentSummary {
                width: img.width(),
                height: img.height(),
                background: seg.background,
                threshold_foreground_pixels: seg.foreground.count(),
                pixel_counts: label_counts(&seg.marks),
                components: seg.marks.components(),
                text_boxes: &seg.text.boxes,
            },
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ManifestEntry {
    name: String,
    chart_type: ChartType,
    seed: u64,
    image: String,
    labels: String,
    truth: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    blurred: Option<String>,
}

fn run_corpus(a: &CorpusArgs) -> Result<()> {
    let types = a
        .types
        .iter()
        .map(|t| t.trim().parse::<ChartType>())
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(&a.out)?;
    let mut manifest = Vec::new();
    for &t in &types {
        for i in 0..a.count {
            let seed = item_seed(a.seed, t, i);
            let name = format!("{}_{:02}", t.as_str(), i);
            let spec = ChartSpec::new(t).with_size(a.width, a.height);
            let (img, truth) = generate(&spec, seed)?;
            let image = format!("{name}.png");
            let labels = format!("{name}.labels.png");
            let truth_name = format!("{name}.truth.json");
            write_atomic(&a.out.join(&image), &encode_png(&img)?)?;
            let label_bytes: Vec<u8> = truth.labels.iter().map(|l| l.index() as u8).collect();
            write_atomic(&a.out.join(&labels), &encode_gray_png(truth.width, truth.height, &label_bytes)?)?;
            let summary: TruthSummary = truth.summary(t, seed);
            write_json(&a.out.join(&truth_name), &summary)?;
            let blurred = if a.blur {
                let (soft, _) = generate(&spec.clone().blurred(), seed)?;
                let file = format!("{name}.blur.png");
                write_atomic(&a.out.join(&file), &encode_png(&soft)?)?;
                Some(file)
            } else {
                None
            };
            manifest.push(ManifestEntry {
                name,
                chart_type: t,
                seed,
                image,
                labels,
                truth: truth_name,
                blurred,
            });
        }
    }
    write_json(&a.out.join("manifest.json"), &manifest)
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidConfig("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    match &cli.command {
        Command::Transform(a) => run_transform(a),
        Command::AnalyzeFrequency(a) => run_analyze(a),
        Command::PredictVisibility(a) => run_predict(a),
        Command::SimulateView(a) => run_simulate(a),
        Command::Segment(a) => run_segment(a),
        Command::GenCorpus(a) => run_corpus(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed stdout (`| head`) is not a processing error.
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::from(1)
        }
    }
}
