//! Encode a PGM into a DAJC stream, inspect the header and tokens, decode it
//! back and save the result.
//!
//!     cargo run --release --example codec_roundtrip [in.pgm] [out_dir]

use dajc::calib::InverseQTable;
use dajc::jpeg_core::{quality, QuantTable};
use dajc::stream::{decode_frame, encode_frame, load_pgm, save_pgm, EncoderSettings, StreamHeader};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let input = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/corpus/chelsea.pgm").into());
    let out_dir = std::path::PathBuf::from(args.next().unwrap_or_else(|| std::env::temp_dir().display().to_string()));

    let frame = load_pgm(&input)?;
    let enc = encode_frame(&frame, &EncoderSettings { seed: 11, ..Default::default() }, false)?;
    let stream_path = out_dir.join("roundtrip.dajc");
    std::fs::write(&stream_path, &enc.bytes)?;

    let header = StreamHeader::parse(&enc.bytes)?;
    println!("{header:?}");
    println!(
        "{} tokens in {} bytes, {:.1}x smaller than the raw frame",
        enc.tokens,
        enc.bytes.len(),
        enc.compression_ratio()
    );

    let dec = decode_frame(&enc.bytes, &InverseQTable::nominal(&header, &QuantTable::q50()))?;
    let out_path = out_dir.join("roundtrip.pgm");
    save_pgm(&dec.frame, &out_path)?;
    let q = quality(&frame.view(), &dec.frame.view())?;
    println!("PSNR {:.2} dB, SSIM {:.4}", q.psnr_db, q.ssim);
    println!("wrote {} and {}", stream_path.display(), out_path.display());
    Ok(())
}
