//! Threshold-gated ADC and run-length encoder.
//!
//! Each zig-zag sample is compared against a threshold around the
//! zero-coefficient level. Significant samples get a 10-bit conversion (14
//! clock cycles each); insignificant ones only advance a run counter, so the
//! ADC energy scales with the number of significant samples.

use thiserror::Error;

pub const ADC_BITS: u32 = 10;
pub const ADC_MAX_CODE: u16 = 1023;
/// Code of a zero coefficient.
pub const MID_CODE: u16 = 512;
pub const CYCLES_PER_CONVERSION: u32 = 14;
/// Measured ADC power at an 84 MHz clock.
pub const ADC_POWER_W: f64 = 98.5e-6;
pub const ADC_CLOCK_HZ: f64 = 84e6;
/// Longest run a token can carry (6-bit field).
pub const MAX_RUN: u8 = 63;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdcError {
    #[error("block tokens cover {0} positions, expected 64")]
    PositionCount(usize),
    #[error("run length {0} outside 1..=63")]
    RunLength(u8),
    #[error("sample code {0} exceeds 10 bits")]
    Code(u16),
    #[error("invalid ADC configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdcConfig {
    pub bits: u32,
    pub v_lo: f64,
    pub v_hi: f64,
    pub cycles_per_conversion: u32,
    /// Joules per ADC clock cycle.
    pub energy_per_cycle: f64,
    /// Joules per threshold comparison.
    pub comparator_energy: f64,
    /// Optional additive transfer error in LSB, indexed by ideal code.
    pub inl_lsb: Option<Vec<f64>>,
}

impl Default for AdcConfig {
    fn default() -> Self {
        Self {
            bits: ADC_BITS,
            v_lo: 0.0,
            v_hi: 1.023,
            cycles_per_conversion: CYCLES_PER_CONVERSION,
            energy_per_cycle: ADC_POWER_W / ADC_CLOCK_HZ,
            comparator_energy: 0.0,
            inl_lsb: None,
        }
    }
}

impl AdcConfig {
    pub fn validate(&self) -> Result<(), AdcError> {
        if self.bits != ADC_BITS {
            return Err(AdcError::Config(format!("only {ADC_BITS}-bit conversion is modeled")));
        }
        if !(self.v_lo < self.v_hi) {
            return Err(AdcError::Config("v_lo must be below v_hi".into()));
        }
        if !(self.energy_per_cycle >= 0.0 && self.comparator_energy >= 0.0) {
            return Err(AdcError::Config("energies must be non-negative".into()));
        }
        if let Some(inl) = &self.inl_lsb {
            if inl.len() != usize::from(ADC_MAX_CODE) + 1 {
                return Err(AdcError::Config(format!("INL table needs 1024 entries, got {}", inl.len())));
            }
        }
        Ok(())
    }

    pub fn lsb(&self) -> f64 {
        (self.v_hi - self.v_lo) / f64::from(ADC_MAX_CODE)
    }

    /// Voltage of a zero coefficient: the center of code 512.
    pub fn v_mid(&self) -> f64 {
        self.v_lo + f64::from(MID_CODE) * self.lsb()
    }

    pub fn conversion_energy(&self) -> f64 {
        f64::from(self.cycles_per_conversion) * self.energy_per_cycle
    }

    pub fn code_to_voltage(&self, code: u16) -> f64 {
        self.v_lo + f64::from(code) * self.lsb()
    }
}

/// Closed boundary: `|v − v_mid| = v_thresh` counts as significant.
pub fn classify(v: f64, v_mid: f64, v_thresh: f64) -> bool {
    (v - v_mid).abs() >= v_thresh
}

/// Mid-tread uniform quantizer, clamped to the end codes.
pub fn adc_convert(v: f64, cfg: &AdcConfig) -> u16 {
    let max = f64::from(ADC_MAX_CODE);
    let mut x = (v - cfg.v_lo) / (cfg.v_hi - cfg.v_lo) * max;
    if let Some(inl) = &cfg.inl_lsb {
        x += inl[x.round().clamp(0.0, max) as usize];
    }
    x.round().clamp(0.0, max) as u16
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Sample(u16),
    Run(u8),
}

impl Token {
    /// Sample positions the token covers.
    pub fn positions(&self) -> usize {
        match self {
            Token::Sample(_) => 1,
            Token::Run(n) => usize::from(*n),
        }
    }
}

/// ADC activity over one or more blocks. Reports from different blocks add.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyReport {
    pub samples: u64,
    pub conversions: u64,
    pub adc_energy: f64,
    pub comparator_energy: f64,
    /// A plain ADC digitizing every sample.
    pub baseline_energy: f64,
}

impl EnergyReport {
    pub fn significant_fraction(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.conversions as f64 / self.samples as f64
        }
    }

    pub fn actual_energy(&self) -> f64 {
        self.adc_energy + self.comparator_energy
    }

    pub fn ratio(&self) -> f64 {
        energy_ratio(self)
    }

    pub fn merge(&mut self, other: &EnergyReport) {
        self.samples += other.samples;
        self.conversions += other.conversions;
        self.adc_energy += other.adc_energy;
        self.comparator_energy += other.comparator_energy;
        self.baseline_energy += other.baseline_energy;
    }

    pub fn merged<'a>(reports: impl IntoIterator<Item = &'a EnergyReport>) -> EnergyReport {
        let mut total = EnergyReport::default();
        for r in reports {
            total.merge(r);
        }
        total
    }
}

/// Baseline over actual energy; `+∞` when nothing was spent.
pub fn energy_ratio(report: &EnergyReport) -> f64 {
    let actual = report.actual_energy();
    if actual == 0.0 {
        f64::INFINITY
    } else {
        report.baseline_energy / actual
    }
}

/// Encodes 64 zig-zag samples. See [`encode_block_with`].
pub fn encode_block(samples: &[f64; 64], v_thresh: f64, cfg: &AdcConfig) -> (Vec<Token>, EnergyReport) {
    encode_block_with(samples, v_thresh, cfg, false)
}

/// Encodes 64 zig-zag samples into tokens. With `force_dc`, the first
/// sample is converted regardless of the threshold.
pub fn encode_block_with(
    samples: &[f64; 64],
    v_thresh: f64,
    cfg: &AdcConfig,
    force_dc: bool,
) -> (Vec<Token>, EnergyReport) {
    let v_mid = cfg.v_mid();
    let mut tokens = Vec::new();
    let mut run: u8 = 0;
    let mut conversions = 0u64;
    for (k, &v) in samples.iter().enumerate() {
        if (force_dc && k == 0) || classify(v, v_mid, v_thresh) {
            if run > 0 {
                tokens.push(Token::Run(run));
                run = 0;
            }
            tokens.push(Token::Sample(adc_convert(v, cfg)));
            conversions += 1;
        } else {
            run += 1;
            if run == MAX_RUN {
                tokens.push(Token::Run(run));
                run = 0;
            }
        }
    }
    if run > 0 {
        tokens.push(Token::Run(run));
    }
    let n = samples.len() as u64;
    let report = EnergyReport {
        samples: n,
        conversions,
        adc_energy: conversions as f64 * cfg.conversion_energy(),
        comparator_energy: n as f64 * cfg.comparator_energy,
        baseline_energy: n as f64 * cfg.conversion_energy(),
    };
    (tokens, report)
}

/// Expands one block's tokens to per-position codes; `None` marks an
/// insignificant sample.
pub fn expand_tokens(tokens: &[Token]) -> Result<[Option<u16>; 64], AdcError> {
    let mut out = [None; 64];
    let mut pos = 0usize;
    for t in tokens {
        match *t {
            Token::Sample(code) => {
                if code > ADC_MAX_CODE {
                    return Err(AdcError::Code(code));
                }
                if pos >= 64 {
                    return Err(AdcError::PositionCount(pos + 1));
                }
                out[pos] = Some(code);
            }
            Token::Run(n) => {
                if n == 0 || n > MAX_RUN {
                    return Err(AdcError::RunLength(n));
                }
            }
        }
        pos += t.positions();
        if pos > 64 {
            return Err(AdcError::PositionCount(pos));
        }
    }
    if pos != 64 {
        return Err(AdcError::PositionCount(pos));
    }
    Ok(out)
}

/// Reconstructs sample voltages: codes map back through the ADC transfer and
/// insignificant positions sit exactly at the zero-coefficient level.
pub fn decode_block(tokens: &[Token], cfg: &AdcConfig) -> Result<[f64; 64], AdcError> {
    let codes = expand_tokens(tokens)?;
    Ok(codes.map(|c| match c {
        Some(code) => cfg.code_to_voltage(code),
        None => cfg.v_mid(),
    }))
}

/// Transmit power in watts for a bit rate and a link efficiency in pJ/bit.
pub fn comm_power(bit_rate_bps: f64, energy_pj_per_bit: f64) -> f64 {
    bit_rate_bps * energy_pj_per_bit / 1e12
}
