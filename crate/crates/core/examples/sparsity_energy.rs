//! Sparsity-aware ADC: fraction of significant samples and conversion
//! energy against a convert-everything baseline, per corpus image.
//!
//!     cargo run --release --example sparsity_energy

use dajc::adc_rle::EnergyReport;
use dajc::stream::{encode_frame, load_pgm, EncoderSettings};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let settings = EncoderSettings::default();
    let mut total = EnergyReport::default();
    println!("image       significant  ADC energy (nJ)  baseline (nJ)  ratio  compression");
    for name in ["camera", "astronaut", "chelsea", "coffee", "rocket"] {
        let frame = load_pgm(format!("{}/data/corpus/{name}.pgm", env!("CARGO_MANIFEST_DIR")))?;
        let enc = encode_frame(&frame, &settings, false)?;
        let r = &enc.report;
        println!(
            "{name:<11} {:>10.2}%  {:>15.2}  {:>13.2}  {:>5.1}x  {:>10.1}x",
            100.0 * r.significant_fraction(),
            r.actual_energy() * 1e9,
            r.baseline_energy * 1e9,
            r.ratio(),
            enc.compression_ratio()
        );
        total.merge(r);
    }
    println!(
        "corpus      {:>10.2}%  energy ratio {:.1}x",
        100.0 * total.significant_fraction(),
        total.ratio()
    );
    Ok(())
}
