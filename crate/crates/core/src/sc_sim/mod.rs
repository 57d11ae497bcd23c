//! Behavioral, cycle-accounted model of the switched-capacitor encoder.
//!
//! Every arithmetic step is a charge operation: the DCT stages sample the
//! input onto per-coefficient slice capacitors and transfer the summed charge
//! onto the accumulation node, quantization is two successive charge-sharing
//! divisions, and buffers are ideal gains with a scalar error knob. Signals
//! are differential around a common mode; signs of DCT coefficients come from
//! swapping the differential halves, so they are applied directly here.

mod config;
mod pipeline;

pub use config::{CycleCosts, DesignParams, PipelineConfig, QuantCaps};
pub use pipeline::{
    run_block, run_block_levelshifted, stage1_dct_column, stage2_dct, AnalogBlockResult,
    PhaseSchedule,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("capacitance {0} fF must be positive and finite")]
    InvalidCapacitance(f64),
    #[error("voltage {0} V is not finite")]
    InvalidVoltage(f64),
    #[error("quantization divisor {0} cannot be realized as a product of two share ratios")]
    UnrealizableDivisor(u16),
    #[error("invalid pipeline configuration: {0}")]
    InvalidConfig(String),
}

/// A capacitor holding a voltage. Capacitance in femtofarads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapNode {
    capacitance: f64,
    pub voltage: f64,
}

impl CapNode {
    pub fn new(capacitance_ff: f64, voltage: f64) -> Result<Self, SimError> {
        if !(capacitance_ff > 0.0 && capacitance_ff.is_finite()) {
            return Err(SimError::InvalidCapacitance(capacitance_ff));
        }
        if !voltage.is_finite() {
            return Err(SimError::InvalidVoltage(voltage));
        }
        Ok(Self { capacitance: capacitance_ff, voltage })
    }

    /// A node reset to 0 V.
    pub fn discharged(capacitance_ff: f64) -> Result<Self, SimError> {
        Self::new(capacitance_ff, 0.0)
    }

    pub fn capacitance(&self) -> f64 {
        self.capacitance
    }

    /// Stored charge in fC.
    pub fn charge(&self) -> f64 {
        self.capacitance * self.voltage
    }
}

/// Connects the nodes in parallel. Total charge is conserved, so every node
/// ends at `Σ Cᵢ·Vᵢ / Σ Cᵢ`, which is returned.
///
/// Panics if fewer than two nodes are given.
pub fn share(nodes: &mut [CapNode]) -> f64 {
    assert!(nodes.len() >= 2, "charge sharing needs at least two nodes");
    let charge: f64 = nodes.iter().map(CapNode::charge).sum();
    let cap: f64 = nodes.iter().map(CapNode::capacitance).sum();
    let v = charge / cap;
    for n in nodes.iter_mut() {
        n.voltage = v;
    }
    v
}

/// Ideal voltage buffer with a relative gain error.
pub fn buffer(v: f64, gain: f64, gain_error: f64) -> f64 {
    v * gain * (1.0 + gain_error)
}

/// Share ratio `c_from / (c_from + c_to)` of moving a held voltage onto a
/// discharged capacitor.
pub fn share_ratio(c_from: f64, c_to: f64) -> f64 {
    c_from / (c_from + c_to)
}

/// Two-step capacitive division: `c_a` (holding `v`) shares with a discharged
/// `c_inter`, then `c_inter` shares with a discharged `c_q`. Result is the
/// voltage left on `c_q`.
pub fn two_step_divide(v: f64, c_a: f64, c_inter: f64, c_q: f64) -> Result<f64, SimError> {
    let mut first = [CapNode::new(c_a, v)?, CapNode::discharged(c_inter)?];
    let v_inter = share(&mut first);
    let mut second = [CapNode::new(c_inter, v_inter)?, CapNode::discharged(c_q)?];
    Ok(share(&mut second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn share_hand_calculation() {
        let mut nodes = [
            CapNode::new(100.0, 0.5).unwrap(),
            CapNode::new(100.0, 0.3).unwrap(),
            CapNode::new(500.0, 0.0).unwrap(),
        ];
        let v = share(&mut nodes);
        assert!((v - 0.114286).abs() < 1e-6);
        assert!(nodes.iter().all(|n| n.voltage == v));
    }

    #[test]
    fn share_equal_voltages_and_halving() {
        let mut same = [CapNode::new(42.0, 0.7).unwrap(), CapNode::new(42.0, 0.7).unwrap()];
        assert!((share(&mut same) - 0.7).abs() < 1e-15);
        let mut half = [CapNode::new(42.0, 0.7).unwrap(), CapNode::discharged(42.0).unwrap()];
        assert!((share(&mut half) - 0.35).abs() < 1e-15);
    }

    #[test]
    fn cap_node_rejects_bad_values() {
        assert_eq!(CapNode::new(0.0, 1.0), Err(SimError::InvalidCapacitance(0.0)));
        assert_eq!(CapNode::new(-3.0, 1.0), Err(SimError::InvalidCapacitance(-3.0)));
        assert!(matches!(CapNode::new(1.0, f64::NAN), Err(SimError::InvalidVoltage(_))));
    }

    #[test]
    #[should_panic]
    fn share_needs_two_nodes() {
        share(&mut [CapNode::new(1.0, 1.0).unwrap()]);
    }

    #[test]
    fn buffer_formula() {
        assert_eq!(buffer(0.0, 2.0, 0.0), 0.0);
        assert!((buffer(0.2, 2.0, 0.0) - 0.4).abs() < 1e-15);
        assert!((buffer(0.2, 2.0, -0.05) - 0.38).abs() < 1e-15);
    }

    #[test]
    fn two_step_examples() {
        assert!((two_step_divide(0.8, 90.0, 90.0, 90.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(two_step_divide(0.0, 13.0, 70.0, 90.0).unwrap(), 0.0);
        let v = two_step_divide(1.6, 30.0, 90.0, 270.0).unwrap();
        assert!((v - 0.1).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn share_conserves_charge(
            caps in proptest::collection::vec(0.1f64..2000.0, 2..10),
            volts in proptest::collection::vec(-1.5f64..1.5, 10),
        ) {
            let mut nodes: Vec<CapNode> = caps.iter().zip(&volts).map(|(&c, &v)| CapNode::new(c, v).unwrap()).collect();
            let before: f64 = nodes.iter().map(CapNode::charge).sum();
            share(&mut nodes);
            let after: f64 = nodes.iter().map(CapNode::charge).sum();
            let scale: f64 = nodes.iter().map(|n| n.capacitance() * 1.5).sum();
            prop_assert!((before - after).abs() <= 1e-15 * scale * caps.len() as f64);
        }

        #[test]
        fn two_step_is_product_of_ratios(
            v in -1.0f64..1.0, a in 1.0f64..500.0, b in 1.0f64..500.0, q in 1.0f64..500.0,
        ) {
            let expect = v * share_ratio(a, b) * share_ratio(b, q);
            prop_assert!((two_step_divide(v, a, b, q).unwrap() - expect).abs() <= 1e-15 * (1.0 + v.abs()));
        }
    }
}
