use serde::{Deserialize, Serialize};

use super::{share_ratio, SimError};
use crate::jpeg_core::{DctBasis, Matrix8, QuantTable};

/// Design-level parameters from which a full [`PipelineConfig`] is sized.
///
/// Appears as the `design` object of the CLI config file; unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignParams {
    /// Stage-1/2 accumulation capacitor.
    pub c_acc_ff: f64,
    /// Charge-to-voltage normalization of the MAC slices; `a_ij = c_mul/c_norm`.
    pub c_norm_ff: f64,
    /// Capacitor holding the inter-stage buffer output.
    pub c_hold_ff: f64,
    pub intentional_attenuation: f64,
    /// Output capacitor of every quantization divider.
    pub c_q_out_ff: f64,
    /// Smallest capacitor the divider synthesis may use.
    pub c_min_ff: f64,
    pub buf1_gain: f64,
    pub buf3_gain: f64,
    pub gain_error: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Single-ended output level of a zero coefficient.
    pub v_out_mid: f64,
    pub division_cycles: u32,
    pub mux_cycles: u32,
}

impl Default for DesignParams {
    fn default() -> Self {
        Self {
            c_acc_ff: 500.0,
            c_norm_ff: 204.0,
            c_hold_ff: 500.0,
            intentional_attenuation: 0.5,
            c_q_out_ff: 90.0,
            c_min_ff: 20.0,
            buf1_gain: 2.0,
            buf3_gain: 3.0,
            gain_error: 0.0,
            v_min: 0.25,
            v_max: 0.75,
            v_out_mid: 0.512,
            division_cycles: 2,
            mux_cycles: 1,
        }
    }
}

/// Capacitors of one coefficient's two-step divider, in fF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantCaps {
    pub c_a: f64,
    pub c_inter: f64,
    pub c_q: f64,
}

impl QuantCaps {
    pub fn first_ratio(&self) -> f64 {
        share_ratio(self.c_a, self.c_inter)
    }

    pub fn second_ratio(&self) -> f64 {
        share_ratio(self.c_inter, self.c_q)
    }

    /// Overall attenuation `1/Q` realized by the two shares.
    pub fn division_gain(&self) -> f64 {
        self.first_ratio() * self.second_ratio()
    }

    pub fn total(&self) -> f64 {
        self.c_a + self.c_inter + self.c_q
    }

    /// Sizes a divider for `1/q` with `c_q` fixed, minimizing total
    /// capacitance subject to every capacitor being at least `c_min`.
    ///
    /// With second ratio `r`, the first is `1/(q·r)` and the total of the
    /// free capacitors is `c_q·q·r² / ((1−r)(q·r−1))`, which is unimodal on
    /// `(1/q, 1)` with its minimum at `r = 2/(q+1)`. The floor on `c_inter`
    /// bounds `r` from below and the floor on `c_a` excludes the interval
    /// between the roots of `c_min·q·r² − (c_min(q+1) − c_q)·r + c_min`, so
    /// the constrained optimum is one of a handful of candidate points.
    pub fn synthesize(q: u16, c_q: f64, c_min: f64) -> Result<Self, SimError> {
        if q < 2 {
            return Err(SimError::UnrealizableDivisor(q));
        }
        let qf = f64::from(q);
        let r_lo = (1.0 / qf).max(c_min / (c_min + c_q));
        let feasible_ca = |r: f64| c_q * r >= c_min * (1.0 - r) * (qf * r - 1.0) * (1.0 - 1e-12);

        let mut candidates = vec![(2.0 / (qf + 1.0)).max(r_lo), r_lo];
        let a = c_min * qf;
        let b = -(c_min * (qf + 1.0) - c_q);
        let disc = b * b - 4.0 * a * c_min;
        if disc >= 0.0 {
            let s = disc.sqrt();
            candidates.push((-b - s) / (2.0 * a));
            candidates.push((-b + s) / (2.0 * a));
        }
        let equal = 1.0 / qf.sqrt();
        let best = candidates
            .into_iter()
            .filter(|&r| r >= r_lo && r > 1.0 / qf && r < 1.0 && feasible_ca(r))
            .map(|r| {
                let caps = Self::from_second_ratio(qf, r, c_q);
                (caps, r)
            })
            .min_by(|(x, rx), (y, ry)| {
                let (tx, ty) = (x.total(), y.total());
                if (tx - ty).abs() <= 1e-9 * tx.max(ty) {
                    (rx - equal).abs().total_cmp(&(ry - equal).abs())
                } else {
                    tx.total_cmp(&ty)
                }
            })
            .map(|(caps, _)| caps);
        best.ok_or(SimError::UnrealizableDivisor(q))
    }

    fn from_second_ratio(q: f64, r2: f64, c_q: f64) -> Self {
        let c_inter = c_q * r2 / (1.0 - r2);
        let r1 = 1.0 / (q * r2);
        let c_a = c_inter * r1 / (1.0 - r1);
        Self { c_a, c_inter, c_q }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCosts {
    /// Cycles per coefficient spent in the two-step division.
    pub division_per_coeff: u32,
    /// Cycles per sample read through the 64:1 output mux.
    pub mux_per_output: u32,
}

/// Every capacitor, gain and rail of the analog model. Capacitances in fF,
/// voltages in V.
///
/// Immutable once built; non-idealities produce a new config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub c_acc: f64,
    pub c_norm: f64,
    /// Stage-1 slice capacitors, `|A[i][j]|·c_norm` when ideal.
    pub stage1_mul: Matrix8,
    /// Stage-2 slice capacitors (separate physical array, same sizing).
    pub stage2_mul: Matrix8,
    /// Sign of each DCT coefficient, realized by differential crossing.
    pub signs: Matrix8,
    pub c_hold: f64,
    pub c_stage2_in: f64,
    pub quant: [[QuantCaps; 8]; 8],
    pub buf1_gain: f64,
    pub buf3_gain: f64,
    pub gain_error: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub v_out_mid: f64,
    pub cycles: CycleCosts,
}

impl PipelineConfig {
    pub fn from_design(
        design: &DesignParams,
        q: &QuantTable,
        basis: &DctBasis,
    ) -> Result<Self, SimError> {
        let att = design.intentional_attenuation;
        if !(att > 0.0 && att < 1.0) {
            return Err(SimError::InvalidConfig(format!(
                "intentional_attenuation {att} must lie in (0, 1)"
            )));
        }
        let mul: Matrix8 = std::array::from_fn(|i| {
            std::array::from_fn(|j| basis.a[i][j].abs() * design.c_norm_ff)
        });
        let signs: Matrix8 =
            std::array::from_fn(|i| std::array::from_fn(|j| basis.a[i][j].signum()));
        let mut quant = [[QuantCaps { c_a: 0.0, c_inter: 0.0, c_q: 0.0 }; 8]; 8];
        for (i, row) in quant.iter_mut().enumerate() {
            for (j, caps) in row.iter_mut().enumerate() {
                *caps = QuantCaps::synthesize(q.get(i, j), design.c_q_out_ff, design.c_min_ff)?;
            }
        }
        let cfg = Self {
            c_acc: design.c_acc_ff,
            c_norm: design.c_norm_ff,
            stage1_mul: mul,
            stage2_mul: mul,
            signs,
            c_hold: design.c_hold_ff,
            c_stage2_in: design.c_hold_ff * (1.0 - att) / att,
            quant,
            buf1_gain: design.buf1_gain,
            buf3_gain: design.buf3_gain,
            gain_error: design.gain_error,
            v_min: design.v_min,
            v_max: design.v_max,
            v_out_mid: design.v_out_mid,
            cycles: CycleCosts {
                division_per_coeff: design.division_cycles,
                mux_per_output: design.mux_cycles,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default design, Q50 table.
    pub fn ideal() -> Self {
        Self::from_design(&DesignParams::default(), &QuantTable::q50(), &DctBasis::new())
            .expect("default design is realizable")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for c in self.switched_caps().into_iter().chain([self.c_norm]) {
            if !(c > 0.0 && c.is_finite()) {
                return Err(SimError::InvalidCapacitance(c));
            }
        }
        if !(self.buf1_gain > 0.0 && self.buf3_gain > 0.0) {
            return Err(SimError::InvalidConfig("buffer gains must be positive".into()));
        }
        if !(self.gain_error > -1.0 && self.gain_error.is_finite()) {
            return Err(SimError::InvalidConfig("gain_error must exceed -1".into()));
        }
        if !(self.v_min < self.v_max) {
            return Err(SimError::InvalidConfig(format!(
                "v_min {} must be below v_max {}",
                self.v_min, self.v_max
            )));
        }
        Ok(())
    }

    /// Every physically switched capacitor, in a fixed order. `c_norm` is an
    /// effective normalization and is not included.
    pub fn switched_caps(&self) -> Vec<f64> {
        let mut cfg = self.clone();
        cfg.switched_caps_mut().into_iter().map(|c| *c).collect()
    }

    /// Mutable handles on every switched capacitor, same order as
    /// [`Self::switched_caps`].
    pub fn switched_caps_mut(&mut self) -> Vec<&mut f64> {
        let mut caps: Vec<&mut f64> = vec![&mut self.c_acc, &mut self.c_hold, &mut self.c_stage2_in];
        caps.extend(self.stage1_mul.iter_mut().flatten());
        caps.extend(self.stage2_mul.iter_mut().flatten());
        for qc in self.quant.iter_mut().flatten() {
            caps.push(&mut qc.c_a);
            caps.push(&mut qc.c_inter);
            caps.push(&mut qc.c_q);
        }
        caps
    }

    /// Volts per pixel code at the input.
    pub fn input_lsb(&self) -> f64 {
        (self.v_max - self.v_min) / 255.0
    }

    pub fn attenuation(&self) -> f64 {
        share_ratio(self.c_hold, self.c_stage2_in)
    }

    /// Effective signed coefficient realized by stage-1 slice `(i, j)`.
    pub fn stage1_coeff(&self, i: usize, j: usize) -> f64 {
        self.signs[i][j] * self.stage1_mul[i][j] / self.c_norm
    }

    pub fn stage2_coeff(&self, i: usize, j: usize) -> f64 {
        self.signs[i][j] * self.stage2_mul[i][j] / self.c_norm
    }

    /// Gain between the two DCT stages: buffer then attenuating share.
    pub fn interstage_gain(&self) -> f64 {
        self.buf1_gain * (1.0 + self.gain_error) * self.attenuation()
    }

    pub fn output_gain(&self) -> f64 {
        self.buf3_gain * (1.0 + self.gain_error)
    }

    /// Output volts per unit of pre-quantization DCT coefficient (pixel
    /// scale), assuming the DCT slices realize the basis exactly. For an
    /// ideal config this is the exact chain gain `lsb·2·0.5·3/Q`.
    pub fn nominal_chain_gain(&self) -> Matrix8 {
        let base = self.input_lsb() * self.interstage_gain() * self.output_gain();
        std::array::from_fn(|i| std::array::from_fn(|j| base * self.quant[i][j].division_gain()))
    }

    pub fn dct_cycles(&self) -> u32 {
        super::PhaseSchedule::default().total_block_cycles()
    }

    /// DCT cycles plus per-coefficient division and mux readout.
    pub fn block_cycles(&self) -> u64 {
        u64::from(self.dct_cycles())
            + 64 * u64::from(self.cycles.division_per_coeff)
            + 64 * u64::from(self.cycles.mux_per_output)
    }
}
