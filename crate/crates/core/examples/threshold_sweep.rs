//! Significant-sample fraction, energy ratio and PSNR against the
//! compression threshold, written as CSV and SVG.
//!
//!     cargo run --release --example threshold_sweep [out_dir]

use dajc::cli::plot::svg_from_csv;
use dajc::cli::{run_sweep, CodecConfig, SweepKind};
use dajc::stream::load_pgm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().display().to_string()));
    let frames = ["camera", "coffee"]
        .iter()
        .map(|n| load_pgm(format!("{}/data/corpus/{n}.pgm", env!("CARGO_MANIFEST_DIR"))))
        .collect::<Result<Vec<_>, _>>()?;
    let thresholds: Vec<f64> = (0..=12).map(|k| f64::from(k) * 4.0).collect();
    let csv = run_sweep(SweepKind::Thresh, &thresholds, &frames, &CodecConfig::default(), 0)?;
    print!("{csv}");

    let csv_path = out_dir.join("thresh_sweep.csv");
    let svg_path = out_dir.join("thresh_sweep.svg");
    std::fs::write(&csv_path, &csv)?;
    std::fs::write(&svg_path, svg_from_csv(&csv, "thresh_mv", "significant_fraction", "significant samples vs threshold")?)?;
    println!("wrote {} and {}", csv_path.display(), svg_path.display());
    Ok(())
}
