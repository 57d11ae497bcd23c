//! Behavioral simulator and codec for a switched-capacitor analog JPEG
//! encoder.
//!
//! The encoder computes the 8×8 DCT, quantization and zig-zag ordering with
//! charge sharing before any digitization; a threshold-gated ADC converts only
//! the significant samples and a run-length encoder counts the rest. This
//! crate models that chain behaviorally and provides:
//!
//! - [`jpeg_core`]: the exact floating-point JPEG reference and PSNR/SSIM,
//! - [`sc_sim`]: the cycle-accounted switched-capacitor pipeline,
//! - [`nonideal`]: kT/C noise, capacitor mismatch, parasitics and the
//!   analytic noise budget,
//! - [`adc_rle`]: the sparsity-aware ADC, run-length tokens and energy
//!   accounting,
//! - [`calib`]: impulse-frame calibration of the decoder's inverse table,
//! - [`stream`]: PGM I/O, tiling and the DAJC bitstream encoder/decoder,
//! - [`cli`]: the `dajc` command-line front end and its reports.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod adc_rle;
pub mod calib;
pub mod cli;
pub mod jpeg_core;
pub mod nonideal;
pub mod sc_sim;
pub mod stream;
