//! Capacitor sizing: DCT slice capacitors and the two-step quantization
//! dividers synthesized for the Q50 table.
//!
//!     cargo run --example divider_synthesis

use dajc::jpeg_core::QuantTable;
use dajc::sc_sim::{PipelineConfig, QuantCaps};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = PipelineConfig::ideal();
    println!("stage-1 slice capacitors (fF), row-major:");
    for row in &cfg.stage1_mul {
        println!("  {}", row.iter().map(|c| format!("{c:6.1}")).collect::<Vec<_>>().join(" "));
    }

    println!("\nQ    c_a(fF)  c_inter(fF)  c_q(fF)  total(fF)  realized 1/Q");
    let q = QuantTable::q50();
    let mut seen: Vec<u16> = q.entries().iter().flatten().copied().collect();
    seen.sort_unstable();
    seen.dedup();
    for &entry in seen.iter().step_by(4).chain(seen.last()) {
        let caps = QuantCaps::synthesize(entry, 90.0, 20.0)?;
        println!(
            "{entry:<4} {:8.1} {:12.1} {:8.1} {:10.1}  {:.6} (1/Q = {:.6})",
            caps.c_a,
            caps.c_inter,
            caps.c_q,
            caps.total(),
            caps.division_gain(),
            1.0 / f64::from(entry)
        );
    }
    let total: f64 = cfg.switched_caps().iter().sum();
    println!("\nswitched capacitance in the whole chain: {:.1} pF", total / 1000.0);
    Ok(())
}
