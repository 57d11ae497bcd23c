//! Radio power for raw versus compressed video at 1 nJ/bit.
//!
//!     cargo run --release --example comm_power

use dajc::adc_rle::comm_power;
use dajc::stream::{encode_frame, load_pgm, EncoderSettings};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pj_per_bit = 1000.0;
    for bps in [1.5e9, 600e6] {
        println!("{:>6.0} Mbps at 1 nJ/bit: {} W", bps / 1e6, comm_power(bps, pj_per_bit));
    }

    let frame = load_pgm(concat!(env!("CARGO_MANIFEST_DIR"), "/data/corpus/astronaut.pgm"))?;
    let enc = encode_frame(&frame, &EncoderSettings::default(), false)?;
    let fps = 30.0;
    let raw = (8 * frame.width * frame.height) as f64 * fps;
    let compressed = enc.bits_out() as f64 * fps;
    println!(
        "\n{}x{} at {fps} fps: raw {:.1} Mbps -> {:.3} W, DAJC {:.2} Mbps -> {:.4} W",
        frame.width,
        frame.height,
        raw / 1e6,
        comm_power(raw, pj_per_bit),
        compressed / 1e6,
        comm_power(compressed, pj_per_bit)
    );
    Ok(())
}
