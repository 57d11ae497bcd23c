//! The `dajc` command line: `encode`, `decode`, `calibrate` and `sweep`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 malformed input data (PGM, DAJC
//! stream, calibration file), 3 bad configuration or arguments. Setting
//! `DAJC_THREADS` caps the worker pool.

mod config;
pub mod plot;
mod sweep;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

pub use config::{CodecConfig, RunManifest};
pub use sweep::{run_sweep, SweepKind};

use crate::calib::{characterize, simulator_probe, CalibError, CalibrationFile, InverseQTable};
use crate::jpeg_core::{psnr, quality, JpegError};
use crate::nonideal::NoiseError;
use crate::sc_sim::SimError;
use crate::stream::{decode_frame, encode_frame, load_pgm, save_pgm, Frame, StreamError, StreamHeader};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) => 1,
            Self::Format(_) => 2,
            Self::Config(_) => 3,
        }
    }
}

impl From<StreamError> for CliError {
    fn from(e: StreamError) -> Self {
        match e {
            StreamError::Io(_) => Self::Io(e.to_string()),
            StreamError::Config(_) => Self::Config(e.to_string()),
            _ => Self::Format(e.to_string()),
        }
    }
}

impl From<CalibError> for CliError {
    fn from(e: CalibError) -> Self {
        match e {
            CalibError::Io(_) => Self::Io(e.to_string()),
            CalibError::Averaging | CalibError::Degenerate { .. } | CalibError::ImpulseIndex(_) => {
                Self::Config(e.to_string())
            }
            _ => Self::Format(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<NoiseError> for CliError {
    fn from(e: NoiseError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<JpegError> for CliError {
    fn from(e: JpegError) -> Self {
        Self::Format(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "dajc", version, about = "Switched-capacitor analog JPEG encoder simulator and codec")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SiliconArgs {
    /// JSON config file (see `CodecConfig`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Relative capacitor mismatch; overrides the config.
    #[arg(long)]
    pub mismatch_sigma: Option<f64>,
    /// Seed of the mismatch draw; overrides the config.
    #[arg(long)]
    pub mismatch_seed: Option<u64>,
    /// Parasitic capacitance per node in fF; overrides the config.
    #[arg(long)]
    pub parasitic_ff: Option<f64>,
    /// Significance threshold in mV; overrides the config.
    #[arg(long)]
    pub thresh_mv: Option<u16>,
    /// Disable kT/C noise.
    #[arg(long)]
    pub no_noise: bool,
}

impl SiliconArgs {
    pub fn resolve(&self) -> Result<CodecConfig, CliError> {
        let mut cfg = CodecConfig::load(self.config.as_deref())?;
        if let Some(s) = self.mismatch_sigma {
            cfg.mismatch_sigma = s;
        }
        if let Some(s) = self.mismatch_seed {
            cfg.mismatch_seed = s;
        }
        if let Some(p) = self.parasitic_ff {
            cfg.parasitic_ff = p;
        }
        if let Some(t) = self.thresh_mv {
            cfg.v_thresh_mv = t;
        }
        if self.no_noise {
            cfg.noise = false;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a P5 PGM into a DAJC stream.
    Encode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        silicon: SiliconArgs,
        /// Noise seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Calibration file of this pipeline; marks the stream as calibrated.
        #[arg(long)]
        calib: Option<PathBuf>,
    },
    /// Decode a DAJC stream into a PGM.
    Decode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Calibration file; the nominal Q50 inverse is used otherwise.
        #[arg(long)]
        calib: Option<PathBuf>,
        /// Reference image; prints a `psnr_db,ssim` CSV row.
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
    },
    /// Characterize the pipeline with impulse frames and write a calibration
    /// file. Images given as arguments get a before/after PSNR report.
    Calibrate {
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        silicon: SiliconArgs,
        /// Noise seed for both characterization and the report encodes.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Repeats averaged per impulse frame.
        #[arg(short = 'N', long = "averaging", default_value_t = crate::calib::DEFAULT_AVERAGING)]
        averaging: usize,
        corpus: Vec<PathBuf>,
    },
    /// Sweep one parameter over the given images; writes CSV and SVG.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepKind,
        /// Comma-separated sweep points; a default grid otherwise.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        silicon: SiliconArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn write_file(path: &Path, data: impl AsRef<[u8]>) -> Result<(), CliError> {
    std::fs::write(path, data).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_calibration(path: &Path) -> Result<CalibrationFile, CliError> {
    CalibrationFile::load(path).map_err(|e| match e {
        CalibError::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
        other => CliError::Format(format!("{}: {other}", path.display())),
    })
}

fn load_frame(path: &Path) -> Result<Frame, CliError> {
    load_pgm(path).map_err(|e| match CliError::from(e) {
        CliError::Io(m) => CliError::Io(format!("{}: {m}", path.display())),
        CliError::Format(m) => CliError::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn cmd_encode(
    input: &Path,
    output: &Path,
    silicon: &SiliconArgs,
    seed: u64,
    calib: Option<&Path>,
) -> Result<(), CliError> {
    let cfg = silicon.resolve()?;
    let settings = cfg.encoder_settings(seed)?;
    if let Some(path) = calib {
        let file = load_calibration(path)?;
        if file.config_hash != crate::calib::config_hash(&settings.pipeline) {
            eprintln!("warning: {} was made for a different pipeline configuration", path.display());
        }
    }
    let frame = load_frame(input)?;
    let enc = encode_frame(&frame, &settings, calib.is_some())?;
    write_file(output, &enc.bytes)?;

    let r = &enc.report;
    println!("blocks={}", enc.blocks);
    println!("samples={}", r.samples);
    println!("conversions={}", r.conversions);
    println!("significant_fraction={:.6}", r.significant_fraction());
    println!("adc_energy_j={:.6e}", r.actual_energy());
    println!("baseline_energy_j={:.6e}", r.baseline_energy);
    println!("energy_ratio={:.3}", r.ratio());
    println!("tokens={}", enc.tokens);
    println!("stream_bytes={}", enc.bytes.len());
    println!("compression_ratio={:.3}", enc.compression_ratio());
    println!("analog_cycles={}", enc.cycles);

    let mut manifest = RunManifest::new("encode", silicon.config.as_deref(), &cfg);
    manifest.seeds = vec![seed, cfg.mismatch_seed];
    manifest.input_paths = std::iter::once(input.to_path_buf()).chain(calib.map(Path::to_path_buf)).collect();
    manifest.write_beside(output)?;
    Ok(())
}

fn cmd_decode(input: &Path, output: &Path, calib: Option<&Path>, reference: Option<&Path>) -> Result<(), CliError> {
    let bytes = std::fs::read(input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let header = StreamHeader::parse(&bytes)?;
    let q_inv = match calib {
        Some(path) => load_calibration(path)?.inverse_q()?,
        None => {
            if header.calibrated() {
                eprintln!("warning: stream is flagged calibrated but no --calib file was given");
            }
            InverseQTable::nominal(&header, &crate::jpeg_core::QuantTable::q50())
        }
    };
    let dec = decode_frame(&bytes, &q_inv)?;
    save_pgm(&dec.frame, output).map_err(CliError::from)?;
    if let Some(path) = reference {
        let reference = load_frame(path)?;
        let report = quality(&reference.view(), &dec.frame.view())?;
        println!("psnr_db,ssim");
        println!("{:.4},{:.6}", report.psnr_db, report.ssim);
    }

    let mut manifest = RunManifest::new("decode", None, &CodecConfig::default());
    manifest.input_paths = [Some(input), calib, reference].into_iter().flatten().map(Path::to_path_buf).collect();
    manifest.write_beside(output)?;
    Ok(())
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn cmd_calibrate(
    output: &Path,
    silicon: &SiliconArgs,
    seed: u64,
    averaging: usize,
    corpus: &[PathBuf],
) -> Result<(), CliError> {
    let cfg = silicon.resolve()?;
    let settings = cfg.encoder_settings(seed)?;
    let gains = characterize(
        simulator_probe(&settings.pipeline, seed, settings.noise, settings.temperature),
        averaging,
    )?;
    let file = CalibrationFile::new(&gains, &settings.pipeline, seed, averaging, cfg.mismatch_sigma, cfg.parasitic_ff);
    let calibrated = file.inverse_q()?;
    write_file(output, file.to_json())?;

    if !corpus.is_empty() {
        let frames: Vec<Frame> = corpus.iter().map(|p| load_frame(p)).collect::<Result<_, _>>()?;
        let nominal = InverseQTable::ideal(&cfg.nominal_pipeline()?);
        let rows: Vec<(f64, f64)> = frames
            .par_iter()
            .map(|frame| -> Result<(f64, f64), CliError> {
                let enc = encode_frame(frame, &settings, true)?;
                let before = decode_frame(&enc.bytes, &nominal)?;
                let after = decode_frame(&enc.bytes, &calibrated)?;
                Ok((psnr(&frame.view(), &before.frame.view())?, psnr(&frame.view(), &after.frame.view())?))
            })
            .collect::<Result<_, _>>()?;
        println!("image,psnr_before_db,psnr_after_db,delta_db");
        let mut deltas = Vec::with_capacity(rows.len());
        for (path, (b, a)) in corpus.iter().zip(&rows) {
            println!("{},{b:.4},{a:.4},{:.4}", path.display(), a - b);
            deltas.push(a - b);
        }
        let mut before: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut after: Vec<f64> = rows.iter().map(|r| r.1).collect();
        println!("median,{:.4},{:.4},{:.4}", median(&mut before), median(&mut after), median(&mut deltas));
    }

    let mut manifest = RunManifest::new("calibrate", silicon.config.as_deref(), &cfg);
    manifest.seeds = vec![seed, cfg.mismatch_seed];
    manifest.input_paths = corpus.to_vec();
    manifest.write_beside(output)?;
    Ok(())
}

fn cmd_sweep(
    kind: SweepKind,
    values: &[f64],
    out_dir: &Path,
    silicon: &SiliconArgs,
    seed: u64,
    inputs: &[PathBuf],
) -> Result<(), CliError> {
    let cfg = silicon.resolve()?;
    let frames: Vec<Frame> = inputs.iter().map(|p| load_frame(p)).collect::<Result<_, _>>()?;
    let values = if values.is_empty() { kind.default_values() } else { values.to_vec() };
    let csv = run_sweep(kind, &values, &frames, &cfg, seed)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let csv_path = out_dir.join(format!("sweep_{}.csv", kind.name()));
    let svg_path = out_dir.join(format!("sweep_{}.svg", kind.name()));
    write_file(&csv_path, &csv)?;
    let (x, y) = kind.plot_axes();
    write_file(&svg_path, plot::svg_from_csv(&csv, x, y, &format!("{y} vs {x}"))?)?;
    print!("{csv}");

    let mut manifest = RunManifest::new("sweep", silicon.config.as_deref(), &cfg);
    manifest.seeds = vec![seed, cfg.mismatch_seed];
    manifest.input_paths = inputs.to_vec();
    manifest.outputs = vec![csv_path.clone(), svg_path];
    manifest.write_beside(&csv_path)?;
    Ok(())
}

/// Caps the global rayon pool from `DAJC_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("DAJC_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("DAJC_THREADS={value:?} is not a positive integer")))?;
    // a pool that already exists keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Encode { input, output, silicon, seed, calib } => {
            cmd_encode(input, output, silicon, *seed, calib.as_deref())
        }
        Command::Decode { input, output, calib, reference } => {
            cmd_decode(input, output, calib.as_deref(), reference.as_deref())
        }
        Command::Calibrate { output, silicon, seed, averaging, corpus } => {
            cmd_calibrate(output, silicon, *seed, *averaging, corpus)
        }
        Command::Sweep { kind, values, out_dir, silicon, seed, inputs } => {
            cmd_sweep(*kind, values, out_dir, silicon, *seed, inputs)
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
/// Argument errors exit with 3, like other configuration errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
