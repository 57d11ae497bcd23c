//! DAJC stream layout, all integers big-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "DAJC"
//!      4     1  version (1)
//!      5     2  width
//!      7     2  height
//!      9     2  v_min, mV
//!     11     2  v_max, mV
//!     13     2  v_thresh, mV
//!     15     1  flags (bit0: calibrated decode expected)
//!     16     …  tokens, 2 bytes each, block after block
//! ```
//!
//! Token word: bit 15 set → sample, bits 9..0 hold the code; bit 15 clear →
//! run, bits 5..0 hold the count (1..=63). All other bits are zero. Bytes
//! after the last block are ignored.

use super::StreamError;
use crate::adc_rle::{Token, ADC_MAX_CODE, MAX_RUN};

pub const MAGIC: [u8; 4] = *b"DAJC";
pub const WIRE_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;
pub const FLAG_CALIBRATED: u8 = 0x01;
/// Volts per ADC code assumed by version-1 streams (0–1.023 V, 10 bits).
pub const WIRE_ADC_LSB: f64 = 1e-3;

const SAMPLE_BIT: u16 = 0x8000;
const CODE_MASK: u16 = 0x03ff;
const RUN_MASK: u16 = 0x003f;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamHeader {
    pub version: u8,
    pub width: u16,
    pub height: u16,
    pub v_min_mv: u16,
    pub v_max_mv: u16,
    pub v_thresh_mv: u16,
    pub flags: u8,
}

impl StreamHeader {
    pub fn calibrated(&self) -> bool {
        self.flags & FLAG_CALIBRATED != 0
    }

    pub fn v_min(&self) -> f64 {
        f64::from(self.v_min_mv) / 1000.0
    }

    pub fn v_max(&self) -> f64 {
        f64::from(self.v_max_mv) / 1000.0
    }

    pub fn v_thresh(&self) -> f64 {
        f64::from(self.v_thresh_mv) / 1000.0
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        out[4] = self.version;
        out[5..7].copy_from_slice(&self.width.to_be_bytes());
        out[7..9].copy_from_slice(&self.height.to_be_bytes());
        out[9..11].copy_from_slice(&self.v_min_mv.to_be_bytes());
        out[11..13].copy_from_slice(&self.v_max_mv.to_be_bytes());
        out[13..15].copy_from_slice(&self.v_thresh_mv.to_be_bytes());
        out[15] = self.flags;
        out
    }

    pub fn parse(data: &[u8]) -> Result<Self, StreamError> {
        if data.len() < HEADER_LEN {
            return Err(StreamError::Truncated { needed: HEADER_LEN, found: data.len() });
        }
        let magic: [u8; 4] = data[..4].try_into().expect("4 bytes");
        if magic != MAGIC {
            return Err(StreamError::BadMagic(magic));
        }
        if data[4] != WIRE_VERSION {
            return Err(StreamError::BadVersion(data[4]));
        }
        let be = |k: usize| u16::from_be_bytes([data[k], data[k + 1]]);
        let h = Self {
            version: data[4],
            width: be(5),
            height: be(7),
            v_min_mv: be(9),
            v_max_mv: be(11),
            v_thresh_mv: be(13),
            flags: data[15],
        };
        if h.flags & !FLAG_CALIBRATED != 0 {
            return Err(StreamError::ReservedBits(format!("header flags {:#04x}", h.flags)));
        }
        if h.width == 0 || h.height == 0 {
            return Err(StreamError::InvalidFrame(format!("header size {}x{}", h.width, h.height)));
        }
        if h.v_min_mv >= h.v_max_mv {
            return Err(StreamError::InvalidFrame(format!(
                "v_min {} mV not below v_max {} mV",
                h.v_min_mv, h.v_max_mv
            )));
        }
        Ok(h)
    }
}

pub fn encode_token(t: Token) -> [u8; 2] {
    let word = match t {
        Token::Sample(code) => {
            debug_assert!(code <= ADC_MAX_CODE);
            SAMPLE_BIT | (code & CODE_MASK)
        }
        Token::Run(n) => {
            debug_assert!((1..=MAX_RUN).contains(&n));
            u16::from(n) & RUN_MASK
        }
    };
    word.to_be_bytes()
}

pub fn decode_token(bytes: [u8; 2]) -> Result<Token, StreamError> {
    let word = u16::from_be_bytes(bytes);
    if word & SAMPLE_BIT != 0 {
        if word & !(SAMPLE_BIT | CODE_MASK) != 0 {
            return Err(StreamError::ReservedBits(format!("sample token {word:#06x}")));
        }
        Ok(Token::Sample(word & CODE_MASK))
    } else {
        if word & !RUN_MASK != 0 {
            return Err(StreamError::ReservedBits(format!("run token {word:#06x}")));
        }
        let n = (word & RUN_MASK) as u8;
        if n == 0 {
            return Err(StreamError::ReservedBits("run token with zero count".into()));
        }
        Ok(Token::Run(n))
    }
}
