//! kT/C noise: closed-form budget against a Monte Carlo run of the
//! simulator, and the effect of scaling every capacitor.
//!
//!     cargo run --release --example noise_budget

use dajc::jpeg_core::{inverse_zigzag, PixelBlock};
use dajc::nonideal::{input_referred_noise, NoiseBudget, NoiseContext, ROOM_TEMPERATURE};
use dajc::sc_sim::{run_block, PipelineConfig};

fn main() {
    let cfg = PipelineConfig::ideal();
    let budget = NoiseBudget::analyze(&cfg, ROOM_TEMPERATURE);
    println!("input-referred kT/C noise: {:.0} uV rms", budget.input_referred_rms() * 1e6);

    let block = PixelBlock::uniform(90);
    let clean = run_block(&block, &cfg, &mut NoiseContext::disabled()).samples;
    let trials = 5000;
    let mut var = [0.0; 64];
    for k in 0..trials {
        let s = run_block(&block, &cfg, &mut NoiseContext::for_block(9, k, ROOM_TEMPERATURE)).samples;
        for z in 0..64 {
            var[z] += (s[z] - clean[z]).powi(2) / trials as f64;
        }
    }
    let mc = inverse_zigzag(&var.map(f64::sqrt)).expect("64 values");
    println!("\noutput noise (mV), analytic / Monte Carlo, first row:");
    for j in 0..8 {
        println!("  (0,{j})  {:.3} / {:.3}", budget.output_std[0][j] * 1e3, mc.c[0][j] * 1e3);
    }

    println!("\ncap scale   input-referred uV");
    for scale in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let mut scaled = cfg.clone();
        for c in scaled.switched_caps_mut() {
            *c *= scale;
        }
        scaled.c_norm *= scale;
        println!("{scale:>9}   {:>8.0}", input_referred_noise(&scaled, ROOM_TEMPERATURE) * 1e6);
    }
}
