//! Impulse-frame calibration of a mismatched encoder: estimate the
//! per-coefficient gains, build Q'' and compare decoded quality.
//!
//!     cargo run --release --example calibration [sigma] [parasitic_ff]

use dajc::calib::{build_inverse_q, characterize_with_report, simulator_probe, InverseQTable, DEFAULT_AVERAGING};
use dajc::jpeg_core::psnr;
use dajc::nonideal::{apply_parasitics, perturb_caps, MismatchModel, ParasiticModel, ROOM_TEMPERATURE};
use dajc::sc_sim::PipelineConfig;
use dajc::stream::{decode_frame, encode_frame, load_pgm, EncoderSettings};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let sigma: f64 = args.next().map_or(Ok(0.05), |s| s.parse())?;
    let parasitic: f64 = args.next().map_or(Ok(1.0), |s| s.parse())?;

    let ideal = PipelineConfig::ideal();
    let silicon = perturb_caps(&ideal, &MismatchModel { sigma_rel: sigma, seed: 1 })?;
    let silicon = apply_parasitics(&silicon, &ParasiticModel { c_par_node: parasitic })?;

    let probe = simulator_probe(&silicon, 7, true, ROOM_TEMPERATURE);
    let (gains, residual) = characterize_with_report(probe, DEFAULT_AVERAGING)?;
    let nominal = ideal.nominal_chain_gain();
    println!("gain / nominal, first row:");
    println!(
        "  {}",
        (0..8).map(|j| format!("{:.3}", gains.g[0][j] / nominal[0][j])).collect::<Vec<_>>().join(" ")
    );
    println!("worst scalar-model residual: {:.3}", residual.worst());

    let before_q = InverseQTable::ideal(&ideal);
    let after_q = build_inverse_q(&gains)?;
    let settings = EncoderSettings { pipeline: silicon, ..Default::default() };
    println!("\nimage       nominal Q   calibrated Q''");
    for name in ["camera", "coins", "retina"] {
        let frame = load_pgm(format!("{}/data/corpus/{name}.pgm", env!("CARGO_MANIFEST_DIR")))?;
        let enc = encode_frame(&frame, &settings, true)?;
        let before = psnr(&frame.view(), &decode_frame(&enc.bytes, &before_q)?.frame.view())?;
        let after = psnr(&frame.view(), &decode_frame(&enc.bytes, &after_q)?.frame.view())?;
        println!("{name:<11} {before:>6.2} dB   {after:>6.2} dB");
    }
    Ok(())
}
