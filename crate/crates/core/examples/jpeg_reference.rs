//! Floating-point JPEG reference: DCT, Q50 quantization and reconstruction
//! of a whole image, with PSNR and SSIM.
//!
//!     cargo run --example jpeg_reference [image.pgm]

use dajc::jpeg_core::{dct2, dequantize, idct2, quality, quantize, zigzag, DctBasis, QuantTable};
use dajc::stream::{load_pgm, tile_blocks, untile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/corpus/camera.pgm").into());
    let frame = load_pgm(&path)?;
    let basis = DctBasis::new();
    let q = QuantTable::q50();

    let mut nonzero = 0usize;
    let mut out = Vec::new();
    for block in tile_blocks(&frame) {
        let levels = quantize(&dct2(&block, &basis), &q);
        nonzero += zigzag(&levels).iter().filter(|v| **v != 0.0).count();
        out.push(idct2(&dequantize(&levels, &q), &basis).to_pixels());
    }
    let recon = untile(&out, frame.width, frame.height)?;
    let report = quality(&frame.view(), &recon.view())?;

    let coeffs = 64 * frame.block_count();
    println!("{path}: {}x{}, {} blocks", frame.width, frame.height, frame.block_count());
    println!("nonzero quantized coefficients: {nonzero} of {coeffs} ({:.2}%)", 100.0 * nonzero as f64 / coeffs as f64);
    println!("PSNR {:.2} dB, SSIM {:.4}", report.psnr_db, report.ssim);
    Ok(())
}
