//! PSNR and single-scale SSIM over 8-bit grayscale images.
//!
//! SSIM uses an 8×8 uniform window at stride 1 with K1 = 0.01, K2 = 0.03,
//! L = 255 and population (1/N) moments, averaged over every window.

use super::JpegError;

const PEAK: f64 = 255.0;
const SSIM_WINDOW: usize = 8;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

/// Borrowed row-major grayscale image.
#[derive(Debug, Clone, Copy)]
pub struct ImageRef<'a> {
    pub width: usize,
    pub height: usize,
    pub pixels: &'a [u8],
}

impl<'a> ImageRef<'a> {
    pub fn new(width: usize, height: usize, pixels: &'a [u8]) -> Result<Self, JpegError> {
        if pixels.len() != width * height {
            return Err(JpegError::Length { expected: width * height, got: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub psnr_db: f64,
    pub ssim: f64,
    pub mse: f64,
}

fn check_dims(a: &ImageRef<'_>, b: &ImageRef<'_>) -> Result<(), JpegError> {
    if a.dims() != b.dims() {
        return Err(JpegError::DimensionMismatch { a: a.dims(), b: b.dims() });
    }
    Ok(())
}

pub fn mse(a: &ImageRef<'_>, b: &ImageRef<'_>) -> Result<f64, JpegError> {
    check_dims(a, b)?;
    let n = a.pixels.len().max(1) as f64;
    let sum: f64 = a
        .pixels
        .iter()
        .zip(b.pixels)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum();
    Ok(sum / n)
}

/// PSNR in dB; `f64::INFINITY` for identical images.
pub fn psnr(a: &ImageRef<'_>, b: &ImageRef<'_>) -> Result<f64, JpegError> {
    Ok(psnr_from_mse(mse(a, b)?))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    }
}

/// Summed-area table with a zero row/column prepended.
struct Integral {
    stride: usize,
    data: Vec<f64>,
}

impl Integral {
    fn build(width: usize, height: usize, f: impl Fn(usize) -> f64) -> Self {
        let stride = width + 1;
        let mut data = vec![0.0; stride * (height + 1)];
        for y in 0..height {
            let mut row = 0.0;
            for x in 0..width {
                row += f(y * width + x);
                data[(y + 1) * stride + x + 1] = data[y * stride + x + 1] + row;
            }
        }
        Self { stride, data }
    }

    fn window(&self, x: usize, y: usize, n: usize) -> f64 {
        let s = self.stride;
        self.data[(y + n) * s + x + n] - self.data[y * s + x + n] - self.data[(y + n) * s + x]
            + self.data[y * s + x]
    }
}

pub fn ssim(a: &ImageRef<'_>, b: &ImageRef<'_>) -> Result<f64, JpegError> {
    check_dims(a, b)?;
    let (w, h) = a.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(JpegError::TooSmall { width: w, height: h });
    }
    let pa = |i: usize| f64::from(a.pixels[i]);
    let pb = |i: usize| f64::from(b.pixels[i]);
    let sa = Integral::build(w, h, pa);
    let sb = Integral::build(w, h, pb);
    let saa = Integral::build(w, h, |i| pa(i) * pa(i));
    let sbb = Integral::build(w, h, |i| pb(i) * pb(i));
    let sab = Integral::build(w, h, |i| pa(i) * pb(i));

    let c1 = (K1 * PEAK).powi(2);
    let c2 = (K2 * PEAK).powi(2);
    let n = (SSIM_WINDOW * SSIM_WINDOW) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    for y in 0..=h - SSIM_WINDOW {
        for x in 0..=w - SSIM_WINDOW {
            let mu_a = sa.window(x, y, SSIM_WINDOW) / n;
            let mu_b = sb.window(x, y, SSIM_WINDOW) / n;
            let var_a = (saa.window(x, y, SSIM_WINDOW) / n - mu_a * mu_a).max(0.0);
            let var_b = (sbb.window(x, y, SSIM_WINDOW) / n - mu_b * mu_b).max(0.0);
            let cov = sab.window(x, y, SSIM_WINDOW) / n - mu_a * mu_b;
            let num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            let den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total += num / den;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

pub fn quality(reference: &ImageRef<'_>, test: &ImageRef<'_>) -> Result<QualityReport, JpegError> {
    let mse = mse(reference, test)?;
    Ok(QualityReport { psnr_db: psnr_from_mse(mse), ssim: ssim(reference, test)?, mse })
}
