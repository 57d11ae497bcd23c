use rayon::prelude::*;

use super::wire::{decode_token, encode_token, StreamHeader, FLAG_CALIBRATED, HEADER_LEN, WIRE_ADC_LSB, WIRE_VERSION};
use super::{tile_blocks, untile, Frame, StreamError};
use crate::adc_rle::{encode_block_with, AdcConfig, EnergyReport, Token, MID_CODE};
use crate::calib::InverseQTable;
use crate::jpeg_core::{idct2, inverse_zigzag, DctBasis};
use crate::nonideal::{NoiseContext, ROOM_TEMPERATURE};
use crate::sc_sim::{run_block, PipelineConfig};

/// Everything the encoder side needs. Streams are reproducible from these
/// values plus the input frame.
#[derive(Debug, Clone)]
pub struct EncoderSettings {
    pub pipeline: PipelineConfig,
    pub adc: AdcConfig,
    pub v_thresh_mv: u16,
    pub seed: u64,
    pub noise: bool,
    pub temperature: f64,
}

impl Default for EncoderSettings {
    fn default() -> Self {
        Self {
            pipeline: PipelineConfig::ideal(),
            adc: AdcConfig::default(),
            v_thresh_mv: 18,
            seed: 0,
            noise: true,
            temperature: ROOM_TEMPERATURE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EncodedFrame {
    pub bytes: Vec<u8>,
    pub report: EnergyReport,
    pub tokens: usize,
    pub blocks: usize,
    pub cycles: u64,
    pub source_pixels: usize,
}

impl EncodedFrame {
    pub fn bits_out(&self) -> usize {
        8 * self.bytes.len()
    }

    /// Raw 8-bit frame size over stream size.
    pub fn compression_ratio(&self) -> f64 {
        (8 * self.source_pixels) as f64 / self.bits_out() as f64
    }
}

fn to_mv(v: f64, what: &str) -> Result<u16, StreamError> {
    let mv = (v * 1000.0).round();
    if !(0.0..=f64::from(u16::MAX)).contains(&mv) {
        return Err(StreamError::Config(format!("{what} {v} V does not fit the header")));
    }
    Ok(mv as u16)
}

/// Tiles the frame, simulates each block through the analog chain (block
/// `k` uses noise stream `k` of `seed`), gates and run-length encodes the
/// samples, and serializes the tokens in block order.
///
/// The DC sample of every block is always converted.
pub fn encode_frame(
    frame: &Frame,
    settings: &EncoderSettings,
    calibrated: bool,
) -> Result<EncodedFrame, StreamError> {
    let adc = &settings.adc;
    adc.validate().map_err(|e| StreamError::Config(e.to_string()))?;
    if adc.v_lo != 0.0 || (adc.lsb() - WIRE_ADC_LSB).abs() > 1e-15 {
        return Err(StreamError::Config(format!(
            "version-{WIRE_VERSION} streams require a 0–1.023 V ADC range"
        )));
    }
    settings.pipeline.validate().map_err(|e| StreamError::Config(e.to_string()))?;
    let width = u16::try_from(frame.width)
        .map_err(|_| StreamError::Config(format!("width {} exceeds 65535", frame.width)))?;
    let height = u16::try_from(frame.height)
        .map_err(|_| StreamError::Config(format!("height {} exceeds 65535", frame.height)))?;
    let header = StreamHeader {
        version: WIRE_VERSION,
        width,
        height,
        v_min_mv: to_mv(settings.pipeline.v_min, "v_min")?,
        v_max_mv: to_mv(settings.pipeline.v_max, "v_max")?,
        v_thresh_mv: settings.v_thresh_mv,
        flags: if calibrated { FLAG_CALIBRATED } else { 0 },
    };
    if header.v_min_mv >= header.v_max_mv {
        return Err(StreamError::Config("v_min must be below v_max".into()));
    }
    let v_thresh = header.v_thresh();

    let blocks = tile_blocks(frame);
    let encoded: Vec<(Vec<Token>, EnergyReport, u64)> = blocks
        .par_iter()
        .enumerate()
        .map(|(k, block)| {
            let mut noise = NoiseContext::for_block(settings.seed, k as u64, settings.temperature)
                .with_enabled(settings.noise);
            let analog = run_block(block, &settings.pipeline, &mut noise);
            let (tokens, report) = encode_block_with(&analog.samples, v_thresh, adc, true);
            (tokens, report, analog.cycles_used)
        })
        .collect();

    let token_count: usize = encoded.iter().map(|(t, _, _)| t.len()).sum();
    let mut bytes = Vec::with_capacity(HEADER_LEN + 2 * token_count);
    bytes.extend_from_slice(&header.to_bytes());
    let mut report = EnergyReport::default();
    let mut cycles = 0;
    for (tokens, r, c) in &encoded {
        for &t in tokens {
            bytes.extend_from_slice(&encode_token(t));
        }
        report.merge(r);
        cycles += c;
    }
    Ok(EncodedFrame {
        bytes,
        report,
        tokens: token_count,
        blocks: blocks.len(),
        cycles,
        source_pixels: frame.width * frame.height,
    })
}

#[derive(Debug, Clone)]
pub struct DecodedFrame {
    pub header: StreamHeader,
    pub frame: Frame,
    pub tokens: usize,
    /// Bytes after the last block, skipped.
    pub trailing_bytes: usize,
}

/// Parses a DAJC stream and reconstructs the frame. Sample codes map to
/// coefficients through `q_inv`; insignificant positions are exactly zero.
pub fn decode_frame(bytes: &[u8], q_inv: &InverseQTable) -> Result<DecodedFrame, StreamError> {
    let header = StreamHeader::parse(bytes)?;
    let (width, height) = (usize::from(header.width), usize::from(header.height));
    let block_count = width.div_ceil(8) * height.div_ceil(8);
    let basis = DctBasis::new();

    let mut pos = HEADER_LEN;
    let mut tokens = 0usize;
    let mut blocks = Vec::with_capacity(block_count);
    for block in 0..block_count {
        let mut seq = [0.0; 64];
        let mut filled = 0usize;
        while filled < 64 {
            if pos + 2 > bytes.len() {
                return Err(StreamError::Truncated { needed: pos + 2, found: bytes.len() });
            }
            let token = decode_token([bytes[pos], bytes[pos + 1]])?;
            pos += 2;
            tokens += 1;
            if filled + token.positions() > 64 {
                return Err(StreamError::PositionSum { block, positions: filled + token.positions() });
            }
            if let Token::Sample(code) = token {
                seq[filled] = (f64::from(code) - f64::from(MID_CODE)) * WIRE_ADC_LSB;
            }
            filled += token.positions();
        }
        // seq holds volts relative to the zero level, in zig-zag order
        let volts = inverse_zigzag(&seq).expect("64 entries");
        let coeffs = q_inv.apply(&volts);
        blocks.push(idct2(&coeffs, &basis).to_pixels());
    }
    Ok(DecodedFrame {
        header,
        frame: untile(&blocks, width, height)?,
        tokens,
        trailing_bytes: bytes.len() - pos,
    })
}
