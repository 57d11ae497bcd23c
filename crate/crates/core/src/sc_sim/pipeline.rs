use super::{buffer, share, CapNode, PipelineConfig};
use crate::jpeg_core::{Matrix8, PixelBlock, ZIGZAG};
use crate::nonideal::NoiseContext;
use crate::stream::pixel_to_voltage;

/// Stage-1 clocking: eight sampling cycles and one accumulation cycle per
/// input column. The accumulator reset is merged into a sampling phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSchedule {
    pub sampling_cycles: u32,
    pub accumulation_cycles: u32,
    pub columns: u32,
}

impl Default for PhaseSchedule {
    fn default() -> Self {
        Self { sampling_cycles: 8, accumulation_cycles: 1, columns: 8 }
    }
}

impl PhaseSchedule {
    pub fn cycles_per_column(&self) -> u32 {
        self.sampling_cycles + self.accumulation_cycles
    }

    pub fn total_block_cycles(&self) -> u32 {
        self.cycles_per_column() * self.columns
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogBlockResult {
    /// Single-ended output voltages in zig-zag order.
    pub samples: [f64; 64],
    pub dct_cycles: u32,
    pub cycles_used: u64,
    /// Noise draws consumed by this block.
    pub noise_draws: u64,
}

/// One MAC pass: each input is sampled onto its row's slice capacitor (one
/// cycle per input), then the signed charges are transferred onto the
/// accumulation node, whose charge-to-voltage scale is `c_norm`.
fn mac_column(
    input: &[f64; 8],
    caps: &Matrix8,
    cfg: &PipelineConfig,
    noise: &mut NoiseContext,
) -> ([f64; 8], u32) {
    let schedule = PhaseSchedule::default();
    let mut charge = [0.0; 8];
    let mut cycles = 0;
    for (j, &x) in input.iter().enumerate() {
        for (i, q) in charge.iter_mut().enumerate() {
            let c = caps[i][j];
            let sampled = x + noise.sample_ktc_differential(c);
            *q += cfg.signs[i][j] * c * sampled;
        }
        cycles += 1;
    }
    let mut out = [0.0; 8];
    for (o, q) in out.iter_mut().zip(charge) {
        *o = q / cfg.c_norm + noise.sample_ktc_differential(cfg.c_acc);
    }
    cycles += schedule.accumulation_cycles;
    debug_assert_eq!(cycles, schedule.cycles_per_column());
    (out, cycles)
}

/// Stage-1 DCT of one input column (level-shifted volts). Returns the eight
/// row outputs and the cycles spent, always 9.
pub fn stage1_dct_column(
    col: &[f64; 8],
    cfg: &PipelineConfig,
    noise: &mut NoiseContext,
) -> ([f64; 8], u32) {
    mac_column(col, &cfg.stage1_mul, cfg, noise)
}

/// Buffer then attenuating share onto the stage-2 input capacitor.
fn interstage(v: f64, cfg: &PipelineConfig, noise: &mut NoiseContext) -> f64 {
    let driven = buffer(v, cfg.buf1_gain, cfg.gain_error);
    let mut nodes = [
        CapNode::new(cfg.c_hold, driven).expect("validated config"),
        CapNode::discharged(cfg.c_stage2_in).expect("validated config"),
    ];
    share(&mut nodes) + noise.sample_ktc_differential(cfg.c_hold + cfg.c_stage2_in)
}

/// Stage-2 DCT. `rows[i]` is row `i` of the stage-1 result after the
/// inter-stage buffer; reading it row-wise realizes the right multiply by Aᵀ.
pub fn stage2_dct(rows: &Matrix8, cfg: &PipelineConfig, noise: &mut NoiseContext) -> Matrix8 {
    let mut out = [[0.0; 8]; 8];
    for (o, row) in out.iter_mut().zip(rows) {
        *o = mac_column(row, &cfg.stage2_mul, cfg, noise).0;
    }
    out
}

/// Samples `v` onto `c_a`, then the two division shares, each with its own
/// sampling noise.
fn quantize_coefficient(
    v: f64,
    i: usize,
    j: usize,
    cfg: &PipelineConfig,
    noise: &mut NoiseContext,
) -> f64 {
    let caps = cfg.quant[i][j];
    let held = v + noise.sample_ktc_differential(caps.c_a);
    let mut first = [
        CapNode::new(caps.c_a, held).expect("validated config"),
        CapNode::discharged(caps.c_inter).expect("validated config"),
    ];
    let v_inter = share(&mut first) + noise.sample_ktc_differential(caps.c_a + caps.c_inter);
    let mut second = [
        CapNode::new(caps.c_inter, v_inter).expect("validated config"),
        CapNode::discharged(caps.c_q).expect("validated config"),
    ];
    share(&mut second) + noise.sample_ktc_differential(caps.c_inter + caps.c_q)
}

/// Full block: pixels to voltages, then [`run_block_levelshifted`].
pub fn run_block(
    x: &PixelBlock,
    cfg: &PipelineConfig,
    noise: &mut NoiseContext,
) -> AnalogBlockResult {
    let v_cm = pixel_to_voltage(128, cfg.v_min, cfg.v_max);
    let mut diff = [[0.0; 8]; 8];
    for (r, row) in x.pixels.iter().enumerate() {
        for (c, &p) in row.iter().enumerate() {
            diff[r][c] = pixel_to_voltage(p, cfg.v_min, cfg.v_max) - v_cm;
        }
    }
    run_block_levelshifted(&diff, cfg, noise)
}

/// Runs the chain on differential input voltages (`x[row][col]`, relative to
/// the mid-gray common mode): stage-1 per column, inter-stage buffer,
/// stage-2, division, 3× output buffer, single-ended conversion and zig-zag
/// readout.
pub fn run_block_levelshifted(
    x: &Matrix8,
    cfg: &PipelineConfig,
    noise: &mut NoiseContext,
) -> AnalogBlockResult {
    let draws_before = noise.draw_count();
    let mut dct_cycles = 0;

    // stage1[i][c]: row i of A·X, produced one column at a time
    let mut stage1 = [[0.0; 8]; 8];
    for c in 0..8 {
        let col: [f64; 8] = std::array::from_fn(|r| x[r][c]);
        let (out, cycles) = stage1_dct_column(&col, cfg, noise);
        dct_cycles += cycles;
        for (i, v) in out.into_iter().enumerate() {
            stage1[i][c] = v;
        }
    }

    let mut staged = [[0.0; 8]; 8];
    for (dst, src) in staged.iter_mut().flatten().zip(stage1.iter().flatten()) {
        *dst = interstage(*src, cfg, noise);
    }
    let dct = stage2_dct(&staged, cfg, noise);

    let mut out = [[0.0; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            let divided = quantize_coefficient(dct[i][j], i, j, cfg, noise);
            out[i][j] = buffer(divided, cfg.buf3_gain, cfg.gain_error);
        }
    }

    let samples = std::array::from_fn(|k| {
        let idx = ZIGZAG[k];
        cfg.v_out_mid + out[idx / 8][idx % 8]
    });
    AnalogBlockResult {
        samples,
        dct_cycles,
        cycles_used: u64::from(dct_cycles)
            + 64 * u64::from(cfg.cycles.division_per_coeff)
            + 64 * u64::from(cfg.cycles.mux_per_output),
        noise_draws: noise.draw_count() - draws_before,
    }
}
