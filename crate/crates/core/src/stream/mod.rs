//! Frames, pixel/voltage mapping, PGM files and the DAJC bitstream.

mod codec;
mod pgm;
mod wire;

pub use codec::{decode_frame, encode_frame, DecodedFrame, EncodedFrame, EncoderSettings};
pub use pgm::{load_pgm, parse_pgm, save_pgm, write_pgm};
pub use wire::{
    decode_token, encode_token, StreamHeader, FLAG_CALIBRATED, HEADER_LEN, MAGIC, WIRE_ADC_LSB,
    WIRE_VERSION,
};

use thiserror::Error;

use crate::jpeg_core::{ImageRef, PixelBlock};

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported image format {0:?}; only binary P5 is accepted")]
    UnsupportedFormat(String),
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("PGM maxval {0} unsupported; expected 255")]
    MaxVal(u32),
    #[error("data truncated: needed {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },
    #[error("bad stream magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported stream version {0}")]
    BadVersion(u8),
    #[error("reserved bits set in {0}")]
    ReservedBits(String),
    #[error("block {block} tokens cover {positions} positions, expected 64")]
    PositionSum { block: usize, positions: usize },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("encoder configuration: {0}")]
    Config(String),
}

/// A grayscale frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, StreamError> {
        if width == 0 || height == 0 {
            return Err(StreamError::InvalidFrame(format!("empty frame {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(StreamError::InvalidFrame(format!(
                "{width}x{height} frame needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self { width, height, pixels: vec![value; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn view(&self) -> ImageRef<'_> {
        ImageRef { width: self.width, height: self.height, pixels: &self.pixels }
    }

    pub fn blocks_x(&self) -> usize {
        self.width.div_ceil(8)
    }

    pub fn blocks_y(&self) -> usize {
        self.height.div_ceil(8)
    }

    pub fn block_count(&self) -> usize {
        self.blocks_x() * self.blocks_y()
    }

    /// Top-left `width`×`height` crop. Panics if larger than the frame.
    pub fn crop(&self, width: usize, height: usize) -> Frame {
        assert!(width <= self.width && height <= self.height);
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            pixels.extend_from_slice(&self.pixels[y * self.width..y * self.width + width]);
        }
        Frame { width, height, pixels }
    }
}

/// `0 → v_min`, `255 → v_max`, linear in between.
pub fn pixel_to_voltage(p: u8, v_min: f64, v_max: f64) -> f64 {
    f64::from(p) / 255.0 * (v_max - v_min) + v_min
}

/// Inverse of [`pixel_to_voltage`], rounded to nearest and clamped.
pub fn voltage_to_pixel(v: f64, v_min: f64, v_max: f64) -> u8 {
    ((v - v_min) / (v_max - v_min) * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Splits a frame into 8×8 blocks, left to right then top to bottom.
/// Partial blocks at the right and bottom edges replicate the last
/// column/row.
pub fn tile_blocks(f: &Frame) -> Vec<PixelBlock> {
    let mut blocks = Vec::with_capacity(f.block_count());
    for by in 0..f.blocks_y() {
        for bx in 0..f.blocks_x() {
            let mut b = PixelBlock::default();
            for r in 0..8 {
                let y = (by * 8 + r).min(f.height - 1);
                for c in 0..8 {
                    let x = (bx * 8 + c).min(f.width - 1);
                    b.pixels[r][c] = f.get(x, y);
                }
            }
            blocks.push(b);
        }
    }
    blocks
}

/// Reassembles blocks from [`tile_blocks`] and crops the padding.
pub fn untile(blocks: &[PixelBlock], width: usize, height: usize) -> Result<Frame, StreamError> {
    let bx_count = width.div_ceil(8);
    let expected = bx_count * height.div_ceil(8);
    if width == 0 || height == 0 || blocks.len() != expected {
        return Err(StreamError::InvalidFrame(format!(
            "{} blocks cannot form a {width}x{height} frame",
            blocks.len()
        )));
    }
    let mut pixels = vec![0u8; width * height];
    for y in 0..height {
        for x in 0..width {
            pixels[y * width + x] = blocks[(y / 8) * bx_count + x / 8].pixels[y % 8][x % 8];
        }
    }
    Frame::new(width, height, pixels)
}
