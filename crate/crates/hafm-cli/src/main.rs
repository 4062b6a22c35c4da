//! `hafm` — pitch-adaptive Gabor analysis and frame-mask conversion toolkit.
//!
//! Subcommands: `analyze` (WAV -> NSGC coefficients), `synth` (NSGC -> WAV),
//! `mask` (two WAVs -> HAFM mask), `convert` (WAV + HAFM -> WAV),
//! `features` (two WAVs -> feature CSV), `f0` (WAV -> f0 CSV), and
//! `eval-demo` (self-contained synthetic speaker-comparison run).
//!
//! Every subcommand exits 0 on success and 1 with a single-line
//! `error: ...` diagnostic on failure; outputs are written to a temporary
//! file and renamed into place, so a failed run never leaves a partial file.
//! `HAFM_THREADS` caps internal parallelism (0 or unset = automatic).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use hafm_core::eval::{demo_speakers, run_speaker_comparison, EvalConfig};
use hafm_core::f0::{
    estimate_f0_autocorrelation, read_f0_csv, sample_f0_track, write_f0_csv, F0Track,
};
use hafm_core::features::{
    extract_features, write_features_csv, FeatureMapping, PairingMode, PairingPolicy,
};
use hafm_core::mask::{
    align_extend, apply_mask, choose_p, common_channel_count, estimate_mask_tikhonov,
    mask_objective, read_hafm_file, write_hafm_file, AlignedCoefficients, AlignmentMode,
    AlignmentParams, MaskEstimationConfig, MaskFile, MaskReference,
};
use hafm_core::nsgt::{
    is_painless, nsgt_forward, nsgt_inverse, padded_dims, read_nsgc_file, write_nsgc_file,
    NsgtPlan,
};
use hafm_core::signal::Signal;
use hafm_core::wav::{read_wav, write_wav};
use hafm_core::window::Window;

#[derive(Parser)]
#[command(
    name = "hafm",
    version,
    about = "Pitch-adaptive Gabor analysis and harmonic frame-mask conversion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a WAV file into an NSGC coefficient file.
    Analyze(AnalyzeArgs),
    /// Synthesize a WAV file from an NSGC coefficient file.
    Synth(SynthArgs),
    /// Estimate a frame mask between a source and a target recording.
    Mask(MaskArgs),
    /// Apply a stored frame mask to a source recording.
    Convert(ConvertArgs),
    /// Extract mask feature vectors between two recordings.
    Features(FeaturesArgs),
    /// Estimate an f0 track from a WAV file.
    F0(F0Args),
    /// Run the built-in synthetic speaker-comparison demo.
    EvalDemo(EvalDemoArgs),
}

/// Analysis-lattice flags shared by every transform-using subcommand.
/// Physical units (ms, Hz) are converted to samples at the input's rate.
#[derive(Args, Clone)]
struct PlanArgs {
    /// Analysis window support in milliseconds.
    #[arg(long, default_value_t = 20.0)]
    win_ms: f64,
    /// Analysis time hop in milliseconds.
    #[arg(long, default_value_t = 4.0)]
    hop_ms: f64,
    /// Pitch divisor q: the ideal frequency hop is p*f0/q.
    #[arg(long, default_value_t = 75)]
    q: usize,
    /// Explicit pitch multiplier p.
    #[arg(long, conflicts_with = "anchor_hz")]
    p: Option<usize>,
    /// Pick p so that p*f0 lands near this frequency in Hz
    /// (280-310 Hz suits vowel material); default is p=1.
    #[arg(long)]
    anchor_hz: Option<f64>,
}

impl PlanArgs {
    fn win_samples(&self, rate: f64) -> Result<usize> {
        let w = (self.win_ms * rate / 1000.0).round();
        if !(w.is_finite() && w >= 2.0) {
            bail!("--win-ms {} is too short at {rate} Hz", self.win_ms);
        }
        if (w as i64) % 2 != 0 {
            bail!(
                "--win-ms {} rounds to {} samples at {rate} Hz; the Hann support must be even",
                self.win_ms,
                w
            );
        }
        Ok(w as usize)
    }

    fn hop_samples(&self, rate: f64) -> Result<usize> {
        let a = (self.hop_ms * rate / 1000.0).round();
        if !(a.is_finite() && a >= 1.0) {
            bail!("--hop-ms {} is too short at {rate} Hz", self.hop_ms);
        }
        Ok(a as usize)
    }

    fn resolve_p(&self, mean_f0_hz: f64) -> Result<usize> {
        if let Some(p) = self.p {
            if p == 0 {
                bail!("--p must be at least 1");
            }
            return Ok(p);
        }
        let params = match self.anchor_hz {
            Some(anchor_hz) => AlignmentParams {
                mode: AlignmentMode::Anchor,
                anchor_hz,
                q: self.q,
            },
            None => AlignmentParams {
                mode: AlignmentMode::UnitP,
                anchor_hz: 0.0,
                q: self.q,
            },
        };
        Ok(choose_p(&params, mean_f0_hz))
    }
}

/// f0-source flags for a single input.
#[derive(Args, Clone)]
struct F0SourceArgs {
    /// f0 track CSV for the input (header `time_s,f0_hz`).
    #[arg(long)]
    f0: Option<PathBuf>,
    /// Estimate f0 from the input instead of reading a CSV.
    #[arg(long)]
    estimate_f0: bool,
    /// Estimator search floor in Hz.
    #[arg(long, default_value_t = 60.0)]
    fmin: f64,
    /// Estimator search ceiling in Hz.
    #[arg(long, default_value_t = 400.0)]
    fmax: f64,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input WAV file.
    input: PathBuf,
    /// Output NSGC coefficient file.
    output: PathBuf,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    f0_source: F0SourceArgs,
    /// Write coefficients even when the plan is not painless
    /// (synthesis from such a file is refused).
    #[arg(long)]
    allow_nonpainless: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Input NSGC coefficient file.
    input: PathBuf,
    /// Output WAV file.
    output: PathBuf,
    /// Synthesis window support in milliseconds (must match the analysis).
    #[arg(long, default_value_t = 20.0)]
    win_ms: f64,
}

#[derive(Args)]
struct MaskArgs {
    /// Source (input-speaker) WAV file.
    source: PathBuf,
    /// Target (reference-speaker) WAV file.
    target: PathBuf,
    /// Output HAFM mask file.
    output: PathBuf,
    #[command(flatten)]
    plan: PlanArgs,
    /// f0 track CSV for the source.
    #[arg(long)]
    source_f0: Option<PathBuf>,
    /// f0 track CSV for the target.
    #[arg(long)]
    target_f0: Option<PathBuf>,
    /// Estimate f0 for any input lacking a CSV.
    #[arg(long)]
    estimate_f0: bool,
    /// Estimator search floor in Hz.
    #[arg(long, default_value_t = 60.0)]
    fmin: f64,
    /// Estimator search ceiling in Hz.
    #[arg(long, default_value_t = 400.0)]
    fmax: f64,
    /// Regularization weight toward the all-ones reference mask.
    #[arg(long, default_value_t = 1e-7)]
    mu: f64,
}

#[derive(Args)]
struct ConvertArgs {
    /// Source WAV file to convert.
    source: PathBuf,
    /// HAFM mask file (defines the target system).
    mask: PathBuf,
    /// Output WAV file.
    output: PathBuf,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    f0_source: F0SourceArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MappingArg {
    /// Per-entry mask magnitude.
    Magnitude,
    /// Concatenated real and imaginary parts (doubles the natural length).
    RealImag,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PairingArg {
    /// Pair column n of the source with column n of the target.
    Aligned,
    /// Cross every source column with every target column (capped).
    AllPairs,
}

#[derive(Args)]
struct FeaturesArgs {
    /// Source WAV file.
    source: PathBuf,
    /// Target WAV file.
    target: PathBuf,
    /// Output feature CSV.
    output: PathBuf,
    #[command(flatten)]
    plan: PlanArgs,
    /// f0 track CSV for the source.
    #[arg(long)]
    source_f0: Option<PathBuf>,
    /// f0 track CSV for the target.
    #[arg(long)]
    target_f0: Option<PathBuf>,
    /// Estimate f0 for any input lacking a CSV.
    #[arg(long)]
    estimate_f0: bool,
    /// Estimator search floor in Hz.
    #[arg(long, default_value_t = 60.0)]
    fmin: f64,
    /// Estimator search ceiling in Hz.
    #[arg(long, default_value_t = 400.0)]
    fmax: f64,
    /// Regularization weight toward the all-ones reference mask.
    #[arg(long, default_value_t = 1e-7)]
    mu: f64,
    /// Feature vector length (shorter profiles are zero-padded).
    #[arg(long, default_value_t = 1200)]
    dim: usize,
    /// How mask entries map to real feature values.
    #[arg(long, value_enum, default_value_t = MappingArg::Magnitude)]
    mapping: MappingArg,
    /// Which frame pairs produce feature vectors.
    #[arg(long, value_enum, default_value_t = PairingArg::Aligned)]
    pairing: PairingArg,
    /// Cap on emitted pairs in all-pairs mode.
    #[arg(long, default_value_t = 10_000)]
    max_pairs: usize,
    /// Label written into every row (default: source file stem).
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args)]
struct F0Args {
    /// Input WAV file.
    input: PathBuf,
    /// Output f0 CSV.
    output: PathBuf,
    /// Estimation hop in milliseconds.
    #[arg(long, default_value_t = 4.0)]
    hop_ms: f64,
    /// Estimation window in milliseconds (default: two periods of --fmin).
    #[arg(long)]
    window_ms: Option<f64>,
    /// Search floor in Hz.
    #[arg(long, default_value_t = 60.0)]
    fmin: f64,
    /// Search ceiling in Hz.
    #[arg(long, default_value_t = 400.0)]
    fmax: f64,
}

#[derive(Args)]
struct EvalDemoArgs {
    /// Utterances generated per speaker (half train, half test).
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Utterance duration in seconds.
    #[arg(long, default_value_t = 0.5)]
    duration_s: f64,
    /// Experiment seed; fixed seeds give identical reports.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Shuffle training labels (permutation control).
    #[arg(long)]
    shuffle_labels: bool,
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    configure_threads()?;
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if err.kind() == ErrorKind::DisplayHelp
                || err.kind() == ErrorKind::DisplayVersion =>
        {
            print!("{err}");
            return Ok(());
        }
        Err(err) => {
            let text = err.to_string();
            let line = text
                .lines()
                .find(|l: &&str| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim()
                .trim_start_matches("error: ")
                .to_string();
            return Err(anyhow!(line));
        }
    };
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Mask(args) => cmd_mask(args),
        Command::Convert(args) => cmd_convert(args),
        Command::Features(args) => cmd_features(args),
        Command::F0(args) => cmd_f0(args),
        Command::EvalDemo(args) => cmd_eval_demo(args),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("HAFM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| anyhow!("HAFM_THREADS must be a non-negative integer, got '{raw}'"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("initializing the thread pool")?;
    }
    Ok(())
}

/// Write through a temp file in the destination directory and rename into
/// place, so failures never leave a partial output.
fn write_atomic(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    let tmp = tempfile::Builder::new()
        .prefix(".hafm-tmp-")
        .tempfile_in(dir)
        .with_context(|| format!("creating a temporary file beside {}", path.display()))?;
    write(tmp.path())?;
    tmp.persist(path)
        .map_err(|e| anyhow!("renaming into {}: {}", path.display(), e.error))?;
    Ok(())
}

/// Resolve an f0 track on the plan's frame grid, from a CSV when given and
/// from the built-in estimator under `--estimate-f0`.
#[allow(clippy::too_many_arguments)]
fn resolve_track(
    signal: &Signal,
    csv: Option<&Path>,
    estimate: bool,
    fmin: f64,
    fmax: f64,
    hop: usize,
    frame_count: usize,
    flag: &str,
) -> Result<F0Track> {
    let rate = signal.sample_rate_hz();
    if let Some(path) = csv {
        let file =
            File::open(path).with_context(|| format!("opening f0 file {}", path.display()))?;
        let points = read_f0_csv(BufReader::new(file))
            .with_context(|| format!("reading f0 file {}", path.display()))?;
        return Ok(sample_f0_track(&points, hop, frame_count, rate)?);
    }
    if estimate {
        if !(fmin.is_finite() && fmin > 0.0) {
            bail!("--fmin must be positive, got {fmin}");
        }
        let window = (2.0 * rate / fmin).ceil() as usize;
        let track = estimate_f0_autocorrelation(signal, hop, window, fmin, fmax)?;
        let points = track.to_points(hop, rate);
        return Ok(sample_f0_track(&points, hop, frame_count, rate)?);
    }
    bail!("no f0 source: pass {flag} <csv> or --estimate-f0")
}

fn padded_signal(signal: &Signal, plan: &NsgtPlan) -> Result<Signal> {
    Ok(Signal::new(
        signal.padded_samples(plan.signal_len()),
        signal.sample_rate_hz(),
    )?)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let signal = read_wav(&args.input)?;
    let rate = signal.sample_rate_hz();
    let win = args.plan.win_samples(rate)?;
    let hop = args.plan.hop_samples(rate)?;
    let (_, frame_count) = padded_dims(signal.len(), hop);
    let track = resolve_track(
        &signal,
        args.f0_source.f0.as_deref(),
        args.f0_source.estimate_f0,
        args.f0_source.fmin,
        args.f0_source.fmax,
        hop,
        frame_count,
        "--f0",
    )?;
    let p = args.plan.resolve_p(track.mean_hz())?;
    let plan = NsgtPlan::build(&track, hop, p, args.plan.q, rate, signal.len())?;
    let window = Window::hann(win)?;
    let painless = is_painless(&plan, &window);
    if !painless && !args.allow_nonpainless {
        bail!(
            "plan is not painless (minimum channel count {} < window support {}); \
             pass --allow-nonpainless to write coefficients anyway (synthesis will refuse them)",
            plan.min_channel_count(),
            window.support_length()
        );
    }
    let padded = padded_signal(&signal, &plan)?;
    let coeffs = nsgt_forward(&padded, &plan, &window)?;
    write_atomic(&args.output, |path| Ok(write_nsgc_file(&coeffs, path)?))?;
    println!(
        "analyzed {}: L={} a={} W={} N={} p={} q={} painless={} max-hop-deviation={:.3e}",
        args.input.display(),
        plan.signal_len(),
        plan.time_hop(),
        window.support_length(),
        plan.frame_count(),
        plan.p(),
        plan.q(),
        if painless { "yes" } else { "no" },
        plan.max_hop_rel_deviation()
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let coeffs = read_nsgc_file(&args.input)?;
    let rate = coeffs.plan().sample_rate_hz();
    let win = (args.win_ms * rate / 1000.0).round();
    if !(win.is_finite() && win >= 2.0) {
        bail!("--win-ms {} is too short at {rate} Hz", args.win_ms);
    }
    if (win as i64) % 2 != 0 {
        bail!(
            "--win-ms {} rounds to {win} samples at {rate} Hz; the Hann support must be even",
            args.win_ms
        );
    }
    let window = Window::hann(win as usize)?;
    let signal = nsgt_inverse(&coeffs, coeffs.plan(), &window)?;
    write_atomic(&args.output, |path| Ok(write_wav(&signal, path)?))?;
    println!(
        "synthesized {} samples @ {} Hz into {}",
        signal.len(),
        rate,
        args.output.display()
    );
    Ok(())
}

/// Shared front half of `mask` and `features`: read and trim the pair,
/// plan and transform both sides, and extend onto the common grid.
#[allow(clippy::too_many_arguments)]
fn aligned_pair(
    source: &Path,
    target: &Path,
    plan_args: &PlanArgs,
    source_f0: Option<&Path>,
    target_f0: Option<&Path>,
    estimate_f0: bool,
    fmin: f64,
    fmax: f64,
) -> Result<(AlignedCoefficients, AlignedCoefficients, NsgtPlan)> {
    let mut a = read_wav(source)?;
    let mut b = read_wav(target)?;
    if a.sample_rate_hz() != b.sample_rate_hz() {
        bail!(
            "sample rates differ: {} Hz vs {} Hz",
            a.sample_rate_hz(),
            b.sample_rate_hz()
        );
    }
    if a.len() != b.len() {
        let common = a.len().min(b.len());
        eprintln!(
            "warning: inputs differ in length ({} vs {} samples); trimming both to {}",
            a.len(),
            b.len(),
            common
        );
        a.truncate(common)?;
        b.truncate(common)?;
    }
    let rate = a.sample_rate_hz();
    let win = plan_args.win_samples(rate)?;
    let hop = plan_args.hop_samples(rate)?;
    let (_, frame_count) = padded_dims(a.len(), hop);
    let track_a = resolve_track(
        &a,
        source_f0,
        estimate_f0,
        fmin,
        fmax,
        hop,
        frame_count,
        "--source-f0",
    )?;
    let track_b = resolve_track(
        &b,
        target_f0,
        estimate_f0,
        fmin,
        fmax,
        hop,
        frame_count,
        "--target-f0",
    )?;
    let plan_a = NsgtPlan::build(
        &track_a,
        hop,
        plan_args.resolve_p(track_a.mean_hz())?,
        plan_args.q,
        rate,
        a.len(),
    )?;
    let plan_b = NsgtPlan::build(
        &track_b,
        hop,
        plan_args.resolve_p(track_b.mean_hz())?,
        plan_args.q,
        rate,
        b.len(),
    )?;
    let window = Window::hann(win)?;
    let ca = nsgt_forward(&padded_signal(&a, &plan_a)?, &plan_a, &window)?;
    let cb = nsgt_forward(&padded_signal(&b, &plan_b)?, &plan_b, &window)?;
    let rows = common_channel_count(&plan_a, &plan_b);
    let ca = align_extend(&ca, rows)?;
    let cb = align_extend(&cb, rows)?;
    Ok((ca, cb, plan_b))
}

fn cmd_mask(args: MaskArgs) -> Result<()> {
    let (ca, cb, plan_b) = aligned_pair(
        &args.source,
        &args.target,
        &args.plan,
        args.source_f0.as_deref(),
        args.target_f0.as_deref(),
        args.estimate_f0,
        args.fmin,
        args.fmax,
    )?;
    let config = MaskEstimationConfig::new(args.mu, MaskReference::Ones)?;
    let mask = estimate_mask_tikhonov(&ca, &cb, &config)?;
    let objective = mask_objective(&mask, &ca, &cb, &config)?;
    let rows = mask.rows();
    let cols = mask.cols();
    let file = MaskFile::new(mask, args.mu, plan_b.channel_counts().to_vec())?;
    write_atomic(&args.output, |path| Ok(write_hafm_file(&file, path)?))?;
    println!(
        "mask {} -> {}: rows={} frames={} mu={:e} objective={:.12e}",
        args.source.display(),
        args.target.display(),
        rows,
        cols,
        args.mu,
        objective
    );
    Ok(())
}

fn cmd_convert(args: ConvertArgs) -> Result<()> {
    let source = read_wav(&args.source)?;
    let rate = source.sample_rate_hz();
    let win = args.plan.win_samples(rate)?;
    let hop = args.plan.hop_samples(rate)?;
    let (_, frame_count) = padded_dims(source.len(), hop);
    let track = resolve_track(
        &source,
        args.f0_source.f0.as_deref(),
        args.f0_source.estimate_f0,
        args.f0_source.fmin,
        args.f0_source.fmax,
        hop,
        frame_count,
        "--f0",
    )?;
    let p = args.plan.resolve_p(track.mean_hz())?;
    let plan_a = NsgtPlan::build(&track, hop, p, args.plan.q, rate, source.len())?;
    let window = Window::hann(win)?;
    let coeffs = nsgt_forward(&padded_signal(&source, &plan_a)?, &plan_a, &window)?;
    let mask_file = read_hafm_file(&args.mask)?;
    let plan_b = NsgtPlan::from_channel_counts(
        plan_a.signal_len(),
        hop,
        mask_file.target_channel_counts.clone(),
        plan_a.p(),
        plan_a.q(),
        rate,
    )?;
    let ca = align_extend(&coeffs, mask_file.mask.rows())?;
    let mut converted = apply_mask(&mask_file.mask, &ca, &plan_b, &window)?;
    converted.truncate(source.len())?;
    write_atomic(&args.output, |path| Ok(write_wav(&converted, path)?))?;
    println!(
        "converted {} through {} into {} ({} samples @ {} Hz)",
        args.source.display(),
        args.mask.display(),
        args.output.display(),
        converted.len(),
        rate
    );
    Ok(())
}

fn cmd_features(args: FeaturesArgs) -> Result<()> {
    let (ca, cb, _) = aligned_pair(
        &args.source,
        &args.target,
        &args.plan,
        args.source_f0.as_deref(),
        args.target_f0.as_deref(),
        args.estimate_f0,
        args.fmin,
        args.fmax,
    )?;
    let config = MaskEstimationConfig::new(args.mu, MaskReference::Ones)?;
    let policy = PairingPolicy {
        mode: match args.pairing {
            PairingArg::Aligned => PairingMode::Aligned,
            PairingArg::AllPairs => PairingMode::AllPairs,
        },
        max_pairs: args.max_pairs,
    };
    let mapping = match args.mapping {
        MappingArg::Magnitude => FeatureMapping::Magnitude,
        MappingArg::RealImag => FeatureMapping::RealImag,
    };
    let label = match &args.label {
        Some(label) => label.clone(),
        None => args
            .source
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "source".to_string()),
    };
    let features = extract_features(&ca, &cb, &config, &policy, args.dim, &label, mapping)?;
    write_atomic(&args.output, |path| {
        let file = File::create(path)
            .with_context(|| format!("creating {}", path.display()))?;
        let mut writer = BufWriter::new(file);
        write_features_csv(&features, &mut writer)?;
        writer.flush().context("flushing features CSV")?;
        Ok(())
    })?;
    println!(
        "wrote {} feature vectors of length {} to {}",
        features.len(),
        args.dim,
        args.output.display()
    );
    Ok(())
}

fn cmd_f0(args: F0Args) -> Result<()> {
    let signal = read_wav(&args.input)?;
    let rate = signal.sample_rate_hz();
    let hop = (args.hop_ms * rate / 1000.0).round();
    if !(hop.is_finite() && hop >= 1.0) {
        bail!("--hop-ms {} is too short at {rate} Hz", args.hop_ms);
    }
    if !(args.fmin.is_finite() && args.fmin > 0.0) {
        bail!("--fmin must be positive, got {}", args.fmin);
    }
    let window = match args.window_ms {
        Some(ms) => (ms * rate / 1000.0).round() as usize,
        None => (2.0 * rate / args.fmin).ceil() as usize,
    };
    let track = estimate_f0_autocorrelation(&signal, hop as usize, window, args.fmin, args.fmax)?;
    let points = track.to_points(hop as usize, rate);
    write_atomic(&args.output, |path| {
        let file = File::create(path)
            .with_context(|| format!("creating {}", path.display()))?;
        let mut writer = BufWriter::new(file);
        write_f0_csv(&points, &mut writer)?;
        writer.flush().context("flushing f0 CSV")?;
        Ok(())
    })?;
    println!(
        "estimated {} f0 frames from {} into {}",
        track.len(),
        args.input.display(),
        args.output.display()
    );
    Ok(())
}

fn cmd_eval_demo(args: EvalDemoArgs) -> Result<()> {
    let (speakers, reference) = demo_speakers();
    let config = EvalConfig {
        duration_s: args.duration_s,
        seed: args.seed,
        shuffle_labels: args.shuffle_labels,
        ..EvalConfig::default()
    };
    let report = run_speaker_comparison(&speakers, &reference, args.trials, &config)?;
    print!("{report}");
    Ok(())
}
