//! Exact floating-point JPEG reference path.
//!
//! Every stage the analog encoder realizes with charge sharing has a plain
//! arithmetic counterpart here: the orthonormal 8×8 DCT-II, Q50
//! quantization, zig-zag serialization and the PSNR/SSIM quality metrics.
//! The simulator in [`crate::sc_sim`] is checked against these functions.

mod dct;
mod metrics;
mod quant;
mod zigzag;

pub use dct::{dct2, dct2_levelshifted, idct2, DctBasis};
pub use metrics::{mse, psnr, quality, ssim, ImageRef, QualityReport};
pub use quant::{dequantize, quantize, quantize_unrounded, QuantTable, Q50_LUMA};
pub use zigzag::{inverse_zigzag, zigzag, ZIGZAG};

use thiserror::Error;

/// Row-major 8×8 matrix of reals.
pub type Matrix8 = [[f64; 8]; 8];

pub const BLOCK: usize = 8;
pub const BLOCK_LEN: usize = 64;

/// Pixel value subtracted before the forward transform.
pub const LEVEL_SHIFT: f64 = 128.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JpegError {
    #[error("pixel value {0} outside 0..=255")]
    PixelOutOfRange(i64),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("quantization entry at ({row},{col}) must be >= 1")]
    ZeroQuant { row: usize, col: usize },
    #[error("image dimensions differ: {a:?} vs {b:?}")]
    DimensionMismatch { a: (usize, usize), b: (usize, usize) },
    #[error("image {width}x{height} is smaller than the 8x8 SSIM window")]
    TooSmall { width: usize, height: usize },
}

/// An 8×8 grayscale block, the codec's unit of work.
///
/// Stored as `u8`, so the 0..=255 range holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PixelBlock {
    pub pixels: [[u8; 8]; 8],
}

impl PixelBlock {
    pub fn new(pixels: [[u8; 8]; 8]) -> Self {
        Self { pixels }
    }

    pub fn uniform(value: u8) -> Self {
        Self { pixels: [[value; 8]; 8] }
    }

    /// Builds a block from 64 row-major integers, rejecting anything outside 0..=255.
    pub fn from_values(values: &[i64]) -> Result<Self, JpegError> {
        if values.len() != BLOCK_LEN {
            return Err(JpegError::Length { expected: BLOCK_LEN, got: values.len() });
        }
        let mut pixels = [[0u8; 8]; 8];
        for (k, &v) in values.iter().enumerate() {
            let p = u8::try_from(v).map_err(|_| JpegError::PixelOutOfRange(v))?;
            pixels[k / 8][k % 8] = p;
        }
        Ok(Self { pixels })
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row][col]
    }

    /// Pixel values minus 128.
    pub fn level_shifted(&self) -> Matrix8 {
        let mut m = [[0.0; 8]; 8];
        for (r, row) in self.pixels.iter().enumerate() {
            for (c, &p) in row.iter().enumerate() {
                m[r][c] = f64::from(p) - LEVEL_SHIFT;
            }
        }
        m
    }

    /// Column `c`, top to bottom: the order the stage-1 MAC consumes samples.
    pub fn column(&self, c: usize) -> [u8; 8] {
        std::array::from_fn(|r| self.pixels[r][c])
    }
}

/// An 8×8 block of real coefficients (DCT output, quantized values, or
/// their voltage images).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoeffBlock {
    pub c: Matrix8,
}

impl CoeffBlock {
    pub fn new(c: Matrix8) -> Self {
        Self { c }
    }

    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.c[row][col]
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().flatten().all(|v| v.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.c.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn map(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let mut out = [[0.0; 8]; 8];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j, self.c[i][j]);
            }
        }
        Self { c: out }
    }

    /// Pixel values after clamping to 0..=255 and rounding to nearest.
    pub fn to_pixels(&self) -> PixelBlock {
        let mut pixels = [[0u8; 8]; 8];
        for (i, row) in pixels.iter_mut().enumerate() {
            for (j, p) in row.iter_mut().enumerate() {
                *p = self.c[i][j].round().clamp(0.0, 255.0) as u8;
            }
        }
        PixelBlock { pixels }
    }
}

pub(crate) fn matmul(a: &Matrix8, b: &Matrix8) -> Matrix8 {
    let mut out = [[0.0; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            let mut acc = 0.0;
            for k in 0..8 {
                acc += a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub(crate) fn transpose(a: &Matrix8) -> Matrix8 {
    let mut out = [[0.0; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            out[j][i] = a[i][j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_values_rejects_out_of_range() {
        let mut v = vec![0i64; 64];
        v[5] = 256;
        assert_eq!(PixelBlock::from_values(&v), Err(JpegError::PixelOutOfRange(256)));
        v[5] = -1;
        assert_eq!(PixelBlock::from_values(&v), Err(JpegError::PixelOutOfRange(-1)));
        assert!(matches!(
            PixelBlock::from_values(&v[..63]),
            Err(JpegError::Length { expected: 64, got: 63 })
        ));
    }

    #[test]
    fn column_reads_top_to_bottom() {
        let mut b = PixelBlock::default();
        for r in 0..8 {
            b.pixels[r][3] = r as u8 * 10;
        }
        assert_eq!(b.column(3), [0, 10, 20, 30, 40, 50, 60, 70]);
    }

    #[test]
    fn to_pixels_clamps() {
        let mut c = CoeffBlock::zeros();
        c.c[0][0] = -3.0;
        c.c[0][1] = 300.0;
        c.c[0][2] = 127.5;
        let p = c.to_pixels();
        assert_eq!(p.pixels[0][..3], [0, 255, 128]);
    }
}
