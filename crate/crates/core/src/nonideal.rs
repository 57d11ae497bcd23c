//! Stochastic non-idealities: kT/C sampling noise, capacitor mismatch and
//! switch/routing parasitics, plus the closed-form noise budget of the chain.
//!
//! Randomness comes from ChaCha8 keyed by a 64-bit seed, with the block index
//! selecting the stream. Any (seed, block, draw index) triple maps to the same
//! value on every platform, and blocks can be simulated in parallel without
//! shared generator state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::jpeg_core::{DctBasis, Matrix8};
use crate::sc_sim::PipelineConfig;

pub const BOLTZMANN: f64 = 1.380649e-23;
pub const ROOM_TEMPERATURE: f64 = 300.0;
const FEMTO: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("temperature {0} K must be positive")]
    Temperature(f64),
    #[error("mismatch sigma {0} must be non-negative")]
    Sigma(f64),
    #[error("parasitic capacitance {0} fF must be non-negative")]
    Parasitic(f64),
}

/// Standard deviation of kT/C noise on a capacitor given in fF.
pub fn ktc_std(c_ff: f64, temperature: f64) -> f64 {
    (BOLTZMANN * temperature / (c_ff * FEMTO)).sqrt()
}

/// Per-task noise source. Never shared between tasks.
#[derive(Debug, Clone)]
pub struct NoiseContext {
    temperature: f64,
    enabled: bool,
    seed: u64,
    stream: u64,
    draw_count: u64,
    rng: ChaCha8Rng,
}

impl NoiseContext {
    pub fn new(seed: u64, temperature: f64) -> Result<Self, NoiseError> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(NoiseError::Temperature(temperature));
        }
        Ok(Self::build(seed, 0, temperature, true))
    }

    /// Context for block `index` of a frame simulated with `seed`.
    ///
    /// Panics on a non-positive temperature.
    pub fn for_block(seed: u64, index: u64, temperature: f64) -> Self {
        assert!(temperature > 0.0, "temperature must be positive");
        Self::build(seed, index, temperature, true)
    }

    /// A context that never draws; every sample is exactly zero.
    pub fn disabled() -> Self {
        Self::build(0, 0, ROOM_TEMPERATURE, false)
    }

    fn build(seed: u64, stream: u64, temperature: f64, enabled: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { temperature, enabled, seed, stream, draw_count: 0, rng }
    }

    pub fn with_enabled(mut self, enabled: bool) -> Self {
        self.enabled = enabled;
        self
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn draw_count(&self) -> u64 {
        self.draw_count
    }

    /// One Gaussian kT/C sample in volts for a capacitor in fF.
    pub fn sample_ktc(&mut self, c_ff: f64) -> f64 {
        if !self.enabled {
            return 0.0;
        }
        self.draw_count += 1;
        let z: f64 = self.rng.sample(StandardNormal);
        z * ktc_std(c_ff, self.temperature)
    }

    /// Noise of a differential sampling event: one draw per half, variance
    /// `2kT/C`.
    pub fn sample_ktc_differential(&mut self, c_ff: f64) -> f64 {
        let p = self.sample_ktc(c_ff);
        let n = self.sample_ktc(c_ff);
        p - n
    }
}

/// Independent Gaussian relative error on every switched capacitor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchModel {
    pub sigma_rel: f64,
    pub seed: u64,
}

pub fn perturb_caps(cfg: &PipelineConfig, m: &MismatchModel) -> Result<PipelineConfig, NoiseError> {
    if !(m.sigma_rel >= 0.0) {
        return Err(NoiseError::Sigma(m.sigma_rel));
    }
    let mut out = cfg.clone();
    if m.sigma_rel == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(m.seed);
    for c in out.switched_caps_mut() {
        let factor = loop {
            let eps: f64 = rng.sample::<f64, _>(StandardNormal) * m.sigma_rel;
            if 1.0 + eps > 0.0 {
                break 1.0 + eps;
            }
        };
        *c *= factor;
    }
    Ok(out)
}

/// Additive parasitic capacitance on every switched node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParasiticModel {
    pub c_par_node: f64,
}

pub fn apply_parasitics(cfg: &PipelineConfig, p: &ParasiticModel) -> Result<PipelineConfig, NoiseError> {
    if !(p.c_par_node >= 0.0) {
        return Err(NoiseError::Parasitic(p.c_par_node));
    }
    let mut out = cfg.clone();
    for c in out.switched_caps_mut() {
        *c += p.c_par_node;
    }
    Ok(out)
}

/// Closed-form noise of the chain, per coefficient in natural (row, col)
/// order. Uses the same draw model as the simulator: one differential kT/C
/// draw per sampling event.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBudget {
    /// Std of the single-ended output sample, volts.
    pub output_std: Matrix8,
    /// Std at the stage-2 output, before the divider, volts.
    pub transform_std: Matrix8,
    /// `transform_std` referred back to the pixel-voltage input.
    pub input_referred: Matrix8,
}

impl NoiseBudget {
    pub fn analyze(cfg: &PipelineConfig, temperature: f64) -> Self {
        let a = DctBasis::new().a;
        let kt2 = 2.0 * BOLTZMANN * temperature / FEMTO;
        let var_diff = |c: f64| kt2 / c;

        // stage-1 output variance per row (independent of column)
        let stage1: [f64; 8] = std::array::from_fn(|i| {
            let slices: f64 = (0..8).map(|j| cfg.stage1_mul[i][j] / cfg.c_norm.powi(2)).sum();
            kt2 * slices + var_diff(cfg.c_acc)
        });
        let g_inter = cfg.interstage_gain();
        let staged: [f64; 8] = std::array::from_fn(|i| {
            stage1[i] * g_inter * g_inter + var_diff(cfg.c_hold + cfg.c_stage2_in)
        });

        let mut output_std = [[0.0; 8]; 8];
        let mut transform_std = [[0.0; 8]; 8];
        let mut input_referred = [[0.0; 8]; 8];
        for i in 0..8 {
            for k in 0..8 {
                let mut var_z = var_diff(cfg.c_acc);
                for c in 0..8 {
                    let cap = cfg.stage2_mul[k][c];
                    let w = cap / cfg.c_norm;
                    var_z += w * w * staged[i] + kt2 * cap / cfg.c_norm.powi(2);
                }
                let q = cfg.quant[i][k];
                let (r1, r2) = (q.first_ratio(), q.second_ratio());
                let var_div = (var_z + var_diff(q.c_a)) * (r1 * r2).powi(2)
                    + var_diff(q.c_a + q.c_inter) * r2 * r2
                    + var_diff(q.c_inter + q.c_q);
                output_std[i][k] = (var_div * cfg.output_gain().powi(2)).sqrt();
                transform_std[i][k] = var_z.sqrt();

                let row_gain: f64 = (0..8).map(|r| cfg.stage1_coeff(i, r) * a[i][r]).sum();
                let col_gain: f64 = (0..8).map(|c| cfg.stage2_coeff(k, c) * a[k][c]).sum();
                input_referred[i][k] = var_z.sqrt() / (g_inter * row_gain * col_gain).abs();
            }
        }
        Self { output_std, transform_std, input_referred }
    }

    /// RMS of the per-coefficient input-referred noise.
    pub fn input_referred_rms(&self) -> f64 {
        let sum: f64 = self.input_referred.iter().flatten().map(|v| v * v).sum();
        (sum / 64.0).sqrt()
    }
}

/// Input-referred kT/C noise of the transform path (sampling, both DCT
/// stages and the inter-stage buffer), RMS over coefficients, in volts.
///
/// The divider's own terms act after the deliberate 1/Q attenuation; they
/// appear in [`NoiseBudget::output_std`] rather than here.
pub fn input_referred_noise(cfg: &PipelineConfig, temperature: f64) -> f64 {
    NoiseBudget::analyze(cfg, temperature).input_referred_rms()
}
