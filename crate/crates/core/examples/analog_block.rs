//! One 8×8 block through the switched-capacitor chain, compared with the
//! exact DCT and quantization, plus the cycle budget.
//!
//!     cargo run --example analog_block

use dajc::jpeg_core::{dct2, quantize_unrounded, zigzag, DctBasis, PixelBlock, QuantTable};
use dajc::nonideal::NoiseContext;
use dajc::sc_sim::{run_block, PipelineConfig};

fn main() {
    let cfg = PipelineConfig::ideal();
    let block = PixelBlock::new(std::array::from_fn(|r| std::array::from_fn(|c| (60 + 20 * r + 9 * c) as u8)));

    let exact = zigzag(&quantize_unrounded(&dct2(&block, &DctBasis::new()), &QuantTable::q50()));
    let clean = run_block(&block, &cfg, &mut NoiseContext::disabled());
    let noisy = run_block(&block, &cfg, &mut NoiseContext::for_block(1, 0, 300.0));
    let volts_per_unit = 3.0 * cfg.input_lsb();

    println!("zz   exact/Q   analog(ideal) V   analog(kT/C) V   back to units");
    for k in 0..10 {
        println!(
            "{k:>2} {:>9.3} {:>17.6} {:>16.6} {:>15.3}",
            exact[k],
            clean.samples[k],
            noisy.samples[k],
            (noisy.samples[k] - cfg.v_out_mid) / volts_per_unit
        );
    }
    println!("...");
    println!("DCT cycles per block: {}", clean.dct_cycles);
    println!("cycles per block incl. division and readout: {}", clean.cycles_used);
    println!("noise draws per block: {}", noisy.noise_draws);
}
