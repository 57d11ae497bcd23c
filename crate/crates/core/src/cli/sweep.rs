//! Parameter sweeps. Each point is independent and runs on the rayon pool;
//! rows come back in input order.

use std::fmt::Write;

use rayon::prelude::*;

use super::{CliError, CodecConfig};
use crate::adc_rle::EnergyReport;
use crate::calib::InverseQTable;
use crate::jpeg_core::{psnr, QuantTable};
use crate::nonideal::input_referred_noise;
use crate::stream::{decode_frame, encode_frame, EncoderSettings, Frame, StreamHeader};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepKind {
    /// Compression threshold in mV.
    Thresh,
    /// Square crop edge in pixels.
    Framesize,
    /// Uniform scale on every capacitor.
    Noise,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Thresh => "thresh",
            Self::Framesize => "framesize",
            Self::Noise => "noise",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            Self::Thresh => (0..=20).map(|k| f64::from(k) * 3.0).collect(),
            Self::Framesize => vec![16.0, 32.0, 64.0, 128.0, 256.0, 512.0],
            Self::Noise => vec![0.25, 0.5, 1.0, 2.0, 4.0],
        }
    }

    pub fn header(self) -> &'static str {
        match self {
            Self::Thresh => "thresh_mv,significant_fraction,energy_ratio,mean_psnr_db",
            Self::Framesize => {
                "size,blocks,samples,conversions,significant_fraction,adc_energy_j,baseline_energy_j,baseline_energy_per_sample_j,energy_ratio"
            }
            Self::Noise => "cap_scale,input_referred_uv,significant_fraction,mean_psnr_db",
        }
    }

    /// Columns plotted by default.
    pub fn plot_axes(self) -> (&'static str, &'static str) {
        match self {
            Self::Thresh => ("thresh_mv", "significant_fraction"),
            Self::Framesize => ("size", "adc_energy_j"),
            Self::Noise => ("input_referred_uv", "mean_psnr_db"),
        }
    }
}

struct PointResult {
    report: EnergyReport,
    mean_psnr: f64,
}

fn run_point(frames: &[Frame], settings: &EncoderSettings) -> Result<PointResult, CliError> {
    let mut report = EnergyReport::default();
    let mut total_psnr = 0.0;
    for frame in frames {
        let enc = encode_frame(frame, settings, false)?;
        let header = StreamHeader::parse(&enc.bytes)?;
        let q = InverseQTable::nominal(&header, &QuantTable::q50());
        let dec = decode_frame(&enc.bytes, &q)?;
        total_psnr += psnr(&frame.view(), &dec.frame.view())?;
        report.merge(&enc.report);
    }
    Ok(PointResult { report, mean_psnr: total_psnr / frames.len() as f64 })
}

/// Runs the sweep and returns the CSV text.
pub fn run_sweep(
    kind: SweepKind,
    values: &[f64],
    frames: &[Frame],
    config: &CodecConfig,
    seed: u64,
) -> Result<String, CliError> {
    if frames.is_empty() {
        return Err(CliError::Config("sweep needs at least one input image".into()));
    }
    let rows: Vec<String> = values
        .par_iter()
        .map(|&value| -> Result<String, CliError> {
            match kind {
                SweepKind::Thresh => {
                    if !(0.0..=f64::from(u16::MAX)).contains(&value) || value.fract() != 0.0 {
                        return Err(CliError::Config(format!("threshold {value} mV must be a whole number")));
                    }
                    let settings = EncoderSettings {
                        v_thresh_mv: value as u16,
                        ..config.encoder_settings(seed)?
                    };
                    let r = run_point(frames, &settings)?;
                    Ok(format!(
                        "{value},{},{},{}",
                        r.report.significant_fraction(),
                        r.report.ratio(),
                        r.mean_psnr
                    ))
                }
                SweepKind::Framesize => {
                    if !(value >= 1.0 && value.fract() == 0.0) {
                        return Err(CliError::Config(format!("frame size {value} must be a positive integer")));
                    }
                    let size = value as usize;
                    let crops: Vec<Frame> =
                        frames.iter().map(|f| f.crop(size.min(f.width), size.min(f.height))).collect();
                    let r = run_point(&crops, &config.encoder_settings(seed)?)?;
                    let blocks: usize = crops.iter().map(Frame::block_count).sum();
                    let rep = &r.report;
                    Ok(format!(
                        "{size},{blocks},{},{},{},{},{},{},{}",
                        rep.samples,
                        rep.conversions,
                        rep.significant_fraction(),
                        rep.actual_energy(),
                        rep.baseline_energy,
                        rep.baseline_energy / rep.samples as f64,
                        rep.ratio()
                    ))
                }
                SweepKind::Noise => {
                    if !(value > 0.0 && value.is_finite()) {
                        return Err(CliError::Config(format!("capacitor scale {value} must be positive")));
                    }
                    let mut settings = config.encoder_settings(seed)?;
                    for c in settings.pipeline.switched_caps_mut() {
                        *c *= value;
                    }
                    settings.pipeline.c_norm *= value;
                    let uv = input_referred_noise(&settings.pipeline, settings.temperature) * 1e6;
                    let r = run_point(frames, &settings)?;
                    Ok(format!("{value},{uv},{},{}", r.report.significant_fraction(), r.mean_psnr))
                }
            }
        })
        .collect::<Result<_, _>>()?;
    let mut csv = String::new();
    let _ = writeln!(csv, "{}", kind.header());
    for row in rows {
        let _ = writeln!(csv, "{row}");
    }
    Ok(csv)
}
