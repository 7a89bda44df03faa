//! Command-line front end. [`run`] parses arguments, runs the command on a
//! sized thread pool and returns the process exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{default_ks, progressive_fill_curve, zero_swap_experiment};
use crate::curation::{list_images, run_pipeline, CurationConfig, CurationManifest};
use crate::degrade::{build_benchmark_from, BenchmarkSpec};
use crate::error::{Error, Result};
use crate::imgio::{load_image, save_image};
use crate::kernels::{kan_check, FwKanStack};
use crate::metrics::{evaluate_pair, MetricsRecord};
use crate::serde_inf;
use crate::spectral::{dct2, dct2_tiled, idct2, idct2_tiled, read_spectrum, write_spectrum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DATA: i32 = 4;
pub const EXIT_TOLERANCE: i32 = 5;

pub const THREADS_ENV: &str = "SPECTRADEC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "spectradec", version, about = "Spectral decoupling analysis, metrics and dataset tools")]
pub struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML file with `[run]`, `[analysis]`, `[curation]` and `[kan]` sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Zero-frequency swap and progressive band-fill curve for one pair.
    Analyze(AnalyzeArgs),
    /// Per-image metrics between two directories.
    Evaluate(EvaluateArgs),
    /// Screen and select a corpus, writing a manifest.
    Curate(CurateArgs),
    /// Synthesize a paired degradation benchmark from a manifest.
    Degrade(DegradeArgs),
    /// Gradient, identity and locality checks for a KAN stack.
    KanCheck(KanCheckArgs),
    /// Raw DCT dump of an image, or the inverse of a dump.
    Dct(DctArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Comma-separated, strictly increasing cutoffs.
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    /// Fill bands without the DC coefficient.
    #[arg(long)]
    pub no_dc: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub restored: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub k: Option<usize>,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct CurateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value = "manifest.json")]
    pub out: PathBuf,
    /// Also export the per-image table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DegradeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Benchmark spec, TOML or JSON.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Read sources from here instead of the manifest's corpus root.
    #[arg(long)]
    pub corpus_root: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KanCheckArgs {
    /// Stack JSON; an identity stack when absent.
    #[arg(long)]
    pub stack: Option<PathBuf>,
    /// Gradient samples per activation.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DctArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Treat `input` as a spectrum dump and write the reconstructed image.
    #[arg(long)]
    pub inverse: bool,
    /// Block-wise transform with this tile size.
    #[arg(long)]
    pub tile: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub tile_size: Option<usize>,
    pub cutoff_k: Option<usize>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub ks: Option<Vec<usize>>,
    pub include_dc: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KanSection {
    pub trials: Option<usize>,
}

/// Config file contents. Command-line flags win over these values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub analysis: AnalysisSection,
    pub curation: CurationConfig,
    pub kan: KanSection,
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_text(path)?)
    }
}

pub const DEFAULT_CUTOFF: usize = 8;
pub const DEFAULT_KAN_TRIALS: usize = 1000;

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::FileNotFound(_)
        | Error::Io { .. }
        | Error::UnsupportedFormat(_)
        | Error::CorruptData(_)
        | Error::MalformedSpectrum(_)
        | Error::Codec(_) => EXIT_IO,
        Error::Config(_)
        | Error::Json(_)
        | Error::InvalidCutoffs(_)
        | Error::CutoffOutOfRange { .. }
        | Error::InvalidSpec(_)
        | Error::InvalidDegradation(_)
        | Error::InsufficientSpecs
        | Error::IncompatibleStack(_)
        | Error::WeightShapeMismatch(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn read_text(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Parse `args` (including the program name) and run. Never panics on bad
/// input; diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Run a parsed command; `Ok` carries a non-error exit code (0, 4 or 5).
pub fn execute(cli: &Cli) -> Result<i32> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let threads = cli.threads.or(config.run.threads).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let seed = cli.seed.or(config.run.seed).unwrap_or(0);
    pool.install(|| match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, &config),
        Command::Evaluate(a) => cmd_evaluate(a, &config),
        Command::Curate(a) => cmd_curate(a, &config),
        Command::Degrade(a) => cmd_degrade(a, seed, cli.seed.is_some()),
        Command::KanCheck(a) => cmd_kan_check(a, &config, seed),
        Command::Dct(a) => cmd_dct(a, &config),
    })
}

#[derive(Serialize)]
struct ZeroSwapSummary {
    #[serde(with = "serde_inf")]
    psnr_in: f64,
    #[serde(with = "serde_inf")]
    psnr_xin: f64,
    #[serde(with = "serde_inf")]
    psnr_xgt: f64,
}

pub fn cmd_analyze(args: &AnalyzeArgs, config: &RunConfig) -> Result<i32> {
    let input = load_image(&args.input)?;
    let gt = load_image(&args.gt)?;
    let ks = args
        .ks
        .clone()
        .or_else(|| config.analysis.ks.clone())
        .unwrap_or_else(|| default_ks(gt.height(), gt.width()));
    let include_dc = !args.no_dc && config.analysis.include_dc.unwrap_or(true);
    let format = args.format.or(config.run.format).unwrap_or(Format::Csv);

    let curve = progressive_fill_curve(&input, &gt, &ks, include_dc)?;
    let swap = zero_swap_experiment(&input, &gt)?;
    create_dir(&args.out)?;
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            curve.write_csv(&mut buf)?;
            write_file(&args.out.join("curve.csv"), &buf)?;
        }
        Format::Json => write_file(&args.out.join("curve.json"), (curve.to_json()? + "\n").as_bytes())?,
    }
    let summary = ZeroSwapSummary {
        psnr_in: swap.psnr_in,
        psnr_xin: swap.psnr_xin,
        psnr_xgt: swap.psnr_xgt,
    };
    write_file(
        &args.out.join("zero_swap.json"),
        (serde_json::to_string_pretty(&summary)? + "\n").as_bytes(),
    )?;
    save_image(&swap.exchanged_input.clamped(), args.out.join("exchanged_input.png"))?;
    save_image(&swap.exchanged_gt.clamped(), args.out.join("exchanged_gt.png"))?;
    Ok(EXIT_OK)
}

/// Column means over `records`, with NaN SSIMs ignored; `path` is `mean`.
pub fn summary_record(records: &[MetricsRecord], k: usize) -> MetricsRecord {
    let mean = |f: &dyn Fn(&MetricsRecord) -> f64| {
        let vals: Vec<f64> = records.iter().map(f).filter(|v| !v.is_nan()).collect();
        if vals.is_empty() {
            f64::NAN
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    };
    MetricsRecord {
        path: "mean".into(),
        psnr: mean(&|r| r.psnr),
        ssim: mean(&|r| r.ssim),
        zf_psnr: mean(&|r| r.zf_psnr),
        l_zf: mean(&|r| r.l_zf),
        l_lf: mean(&|r| r.l_lf),
        l_hf: mean(&|r| r.l_hf),
        k,
    }
}

pub fn write_metrics_csv<W: Write>(records: &[MetricsRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::io("<csv>", std::io::Error::other(e));
    w.write_record(["path", "psnr", "ssim", "zf_psnr", "l_zf", "l_lf", "l_hf", "k"])
        .map_err(err)?;
    for r in records {
        w.write_record([
            r.path.clone(),
            serde_inf::format(r.psnr),
            serde_inf::format(r.ssim),
            serde_inf::format(r.zf_psnr),
            serde_inf::format(r.l_zf),
            serde_inf::format(r.l_lf),
            serde_inf::format(r.l_hf),
            r.k.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

#[derive(Serialize)]
struct EvaluateReport<'a> {
    records: &'a [MetricsRecord],
    summary: &'a MetricsRecord,
    missing: &'a [String],
    failed: &'a [(String, String)],
}

pub fn cmd_evaluate(args: &EvaluateArgs, config: &RunConfig) -> Result<i32> {
    let k = args.k.or(config.run.cutoff_k).unwrap_or(DEFAULT_CUTOFF);
    let format = args.format.or(config.run.format).unwrap_or(Format::Csv);
    let gt_paths = list_images(&args.gt)?;
    let restored: std::collections::BTreeSet<String> = list_images(&args.restored)?.into_iter().collect();
    let (present, missing): (Vec<String>, Vec<String>) =
        gt_paths.into_iter().partition(|p| restored.contains(p));

    let results: Vec<std::result::Result<MetricsRecord, (String, Error)>> = present
        .par_iter()
        .map(|p| {
            let eval = || -> Result<MetricsRecord> {
                let r = load_image(args.restored.join(p))?;
                let g = load_image(args.gt.join(p))?;
                evaluate_pair(p.clone(), &r, &g, k)
            };
            eval().map_err(|e| (p.clone(), e))
        })
        .collect();
    let mut records = Vec::new();
    let mut failed = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err((p, e)) if exit_code(&e) == EXIT_IO => return Err(e).map_err(|e| annotate(e, &p)),
            Err((p, e)) => failed.push((p, e.to_string())),
        }
    }
    for m in &missing {
        eprintln!("missing pair: {m}");
    }
    for (p, e) in &failed {
        eprintln!("inconsistent pair {p}: {e}");
    }
    let summary = summary_record(&records, k);

    let mut buf = Vec::new();
    match format {
        Format::Csv => {
            let mut all = records.clone();
            all.push(summary);
            write_metrics_csv(&all, &mut buf)?;
        }
        Format::Json => {
            let report = EvaluateReport {
                records: &records,
                summary: &summary,
                missing: &missing,
                failed: &failed,
            };
            buf = (serde_json::to_string_pretty(&report)? + "\n").into_bytes();
        }
    }
    match &args.out {
        Some(p) => write_file(p, &buf)?,
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(if missing.is_empty() && failed.is_empty() {
        EXIT_OK
    } else {
        EXIT_DATA
    })
}

fn annotate(e: Error, path: &str) -> Error {
    match e {
        Error::CorruptData(m) => Error::CorruptData(format!("{path}: {m}")),
        Error::UnsupportedFormat(m) => Error::UnsupportedFormat(format!("{path}: {m}")),
        other => other,
    }
}

pub fn cmd_curate(args: &CurateArgs, config: &RunConfig) -> Result<i32> {
    let manifest = run_pipeline(&args.corpus, &config.curation)?;
    write_file(&args.out, manifest.to_json()?.as_bytes())?;
    if let Some(csv_path) = &args.csv {
        let mut buf = Vec::new();
        manifest.write_csv(&mut buf)?;
        write_file(csv_path, &buf)?;
    }
    eprintln!(
        "{} images, {} failed, {} screened, {} selected",
        manifest.counts.total, manifest.counts.failed, manifest.counts.screened, manifest.counts.selected
    );
    Ok(EXIT_OK)
}

fn load_benchmark_spec(path: &Path) -> Result<BenchmarkSpec> {
    let text = read_text(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        Ok(serde_json::from_str(&text)?)
    } else {
        BenchmarkSpec::from_toml(&text)
    }
}

pub fn cmd_degrade(args: &DegradeArgs, seed: u64, seed_given: bool) -> Result<i32> {
    let manifest = CurationManifest::load(&args.manifest)?;
    let mut spec = load_benchmark_spec(&args.spec)?;
    if seed_given {
        spec.seed = seed;
    }
    let root = args
        .corpus_root
        .clone()
        .unwrap_or_else(|| PathBuf::from(&manifest.corpus_root));
    let index = build_benchmark_from(&root, &manifest.selected_paths(), &spec, &args.out)?;
    eprintln!("{} pairs written to {}", index.entries.len(), args.out.display());
    Ok(EXIT_OK)
}

pub fn cmd_kan_check(args: &KanCheckArgs, config: &RunConfig, seed: u64) -> Result<i32> {
    let stack = match &args.stack {
        Some(p) => FwKanStack::from_json(&read_text(p)?)?,
        None => FwKanStack::identity(16, 2),
    };
    let trials = args.trials.or(config.kan.trials).unwrap_or(DEFAULT_KAN_TRIALS);
    let report = kan_check(&stack, trials, seed)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(p) => write_file(p, json.as_bytes())?,
        None => print!("{json}"),
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_TOLERANCE })
}

pub fn cmd_dct(args: &DctArgs, config: &RunConfig) -> Result<i32> {
    let tile = args.tile.or(config.run.tile_size);
    if args.inverse {
        let file = std::fs::File::open(&args.input).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileNotFound(args.input.clone()),
            _ => Error::io(&args.input, e),
        })?;
        let spec = read_spectrum(std::io::BufReader::new(file))?;
        let img = match tile {
            Some(t) => idct2_tiled(&spec, t)?,
            None => idct2(&spec)?,
        };
        save_image(&img.clamped(), &args.out)?;
    } else {
        let img = load_image(&args.input)?;
        let spec = match tile {
            Some(t) => dct2_tiled(&img, t)?,
            None => dct2(&img),
        };
        let mut buf = Vec::new();
        write_spectrum(&spec, &mut buf).map_err(|e| Error::io(&args.out, e))?;
        write_file(&args.out, &buf)?;
    }
    Ok(EXIT_OK)
}
