//! Per-synapse long-term potentiation.
//!
//! An excitatory arrival that finds its synapse depolarized to at least
//! `gate_mv` deposits one quantum of calcium charge. The accumulated charge `Q`
//! sets both how strongly later EPSPs on that synapse are scaled
//! (`1 + min(c * Q, cap)`) and how long the potentiation lasts
//! (`round(a * Q^b)` ticks, restarted on each new deposit). When the timer runs
//! out the synapse forgets everything at once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::register::ShiftRegister;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LtpConfig {
    /// Local potential (mV) an arrival must find to open the gate.
    pub gate_mv: f64,
    /// Charge deposited per qualifying arrival.
    pub charge_quantum: f64,
    /// `a` in `round(a * Q^b)`, in ticks.
    pub duration_scale: f64,
    /// `b` in `round(a * Q^b)`.
    pub duration_exponent: f64,
    /// `c`: multiplier gain per unit charge.
    pub strength_gain: f64,
    /// Largest excess over 1 the multiplier may reach.
    pub strength_cap: f64,
}

impl Default for LtpConfig {
    fn default() -> Self {
        Self {
            gate_mv: -70.0,
            charge_quantum: 1.0,
            duration_scale: 200.0,
            duration_exponent: 1.5,
            strength_gain: 0.05,
            strength_cap: 2.0,
        }
    }
}

impl LtpConfig {
    pub fn validate(&self, e_k: f64, v_threshold: f64) -> Result<()> {
        if !(e_k < self.gate_mv && self.gate_mv < v_threshold) {
            return Err(Error::config(
                "ltp.gate_mv",
                format!(
                    "must lie strictly between e_k ({e_k}) and v_threshold ({v_threshold}), got {}",
                    self.gate_mv
                ),
            ));
        }
        let positive = [
            ("ltp.charge_quantum", self.charge_quantum),
            ("ltp.duration_scale", self.duration_scale),
            ("ltp.strength_gain", self.strength_gain),
        ];
        for (path, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(path, format!("must be > 0, got {v}")));
            }
        }
        if !(self.duration_exponent >= 1.0 && self.duration_exponent.is_finite()) {
            return Err(Error::config(
                "ltp.duration_exponent",
                format!("must be >= 1, got {}", self.duration_exponent),
            ));
        }
        if !(self.strength_cap >= 0.0 && self.strength_cap.is_finite()) {
            return Err(Error::config(
                "ltp.strength_cap",
                format!("must be >= 0, got {}", self.strength_cap),
            ));
        }
        Ok(())
    }

    /// Potentiation period for a given charge.
    pub fn duration_ticks(&self, charge: f64) -> u64 {
        (self.duration_scale * charge.powf(self.duration_exponent)).round() as u64
    }

    pub fn max_multiplier(&self) -> f64 {
        1.0 + self.strength_cap
    }
}

/// Calcium register, outstanding charge and the potentiation countdown of one
/// synapse.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PotentiationState {
    calcium: ShiftRegister,
    /// Charge that has aged out of the calcium register but is still
    /// outstanding.
    carried: f64,
    charge: f64,
    timer: u64,
    memory: f64,
}

impl PotentiationState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a state directly from a charge and a timer. Both must be zero or
    /// both positive.
    pub fn with_charge(charge: f64, timer: u64) -> Self {
        assert_eq!(
            charge > 0.0,
            timer > 0,
            "charge and timer must be zero together"
        );
        Self {
            calcium: ShiftRegister::new(),
            carried: charge,
            charge,
            timer,
            memory: charge,
        }
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn timer(&self) -> u64 {
        self.timer
    }

    pub fn memory(&self) -> f64 {
        self.memory
    }

    pub fn calcium(&self) -> &ShiftRegister {
        &self.calcium
    }

    pub fn is_potentiated(&self) -> bool {
        self.timer > 0
    }

    /// One tick of calcium register shift. Charge leaving the register is
    /// carried rather than lost.
    #[inline]
    pub fn shift(&mut self) {
        self.carried += self.calcium.shift_in(0.0);
    }

    /// Counts the potentiation period down by one tick.
    #[inline]
    pub fn decay(&mut self) {
        if self.timer == 0 {
            return;
        }
        self.timer -= 1;
        if self.timer == 0 {
            self.calcium.reset();
            self.carried = 0.0;
            self.charge = 0.0;
            self.memory = 0.0;
        } else {
            self.memory = self.charge;
        }
    }

    /// Applies the gate for an arrival that sees local potential `v_local`.
    /// Returns whether charge was deposited.
    pub fn gate_check(&mut self, v_local: f64, config: &LtpConfig) -> bool {
        if v_local < config.gate_mv {
            return false;
        }
        self.calcium.add(0, config.charge_quantum);
        self.charge = self.calcium.sum() + self.carried;
        self.timer = config.duration_ticks(self.charge);
        self.memory = self.charge;
        true
    }

    /// EPSP scaling factor; exactly 1 when not potentiated.
    #[inline]
    pub fn multiplier(&self, config: &LtpConfig) -> f64 {
        if self.timer > 0 {
            1.0 + (config.strength_gain * self.charge).min(config.strength_cap)
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_gate_leaves_state_alone() {
        let cfg = LtpConfig::default();
        let mut s = PotentiationState::new();
        assert!(!s.gate_check(-75.0, &cfg));
        assert_eq!(s, PotentiationState::new());
        assert_eq!(s.multiplier(&cfg), 1.0);
    }

    #[test]
    fn first_qualifying_arrival_sets_200_ticks() {
        let cfg = LtpConfig::default();
        let mut s = PotentiationState::new();
        assert!(s.gate_check(-70.0, &cfg));
        assert_eq!(s.charge(), 1.0);
        assert_eq!(s.timer(), 200);
        assert_eq!(s.memory(), 1.0);
    }

    #[test]
    fn fourth_arrival_in_window_sets_1600_ticks() {
        let cfg = LtpConfig::default();
        let mut s = PotentiationState::new();
        for _ in 0..4 {
            s.shift();
            s.decay();
            s.gate_check(-60.0, &cfg);
            for _ in 0..10 {
                s.shift();
                s.decay();
            }
        }
        assert_eq!(s.charge(), 4.0);
        // Last deposit restarted the timer at round(200 * 4^1.5); 10 ticks since.
        assert_eq!(s.timer(), 1600 - 10);
    }

    #[test]
    fn charge_survives_leaving_the_calcium_register() {
        let cfg = LtpConfig::default();
        let mut s = PotentiationState::new();
        s.gate_check(-60.0, &cfg);
        for _ in 0..100 {
            s.shift();
            s.decay();
        }
        assert_eq!(s.calcium().sum(), 0.0);
        s.gate_check(-60.0, &cfg);
        assert_eq!(s.charge(), 2.0);
        assert_eq!(s.timer(), cfg.duration_ticks(2.0));
    }

    #[test]
    fn multiplier_formula_and_cap() {
        let cfg = LtpConfig::default();
        assert_eq!(PotentiationState::new().multiplier(&cfg), 1.0);
        let s = PotentiationState::with_charge(4.0, 10);
        assert!((s.multiplier(&cfg) - 1.2).abs() < 1e-12);
        let s = PotentiationState::with_charge(100.0, 10);
        assert_eq!(s.multiplier(&cfg), 3.0);
    }

    #[test]
    fn decay_expires_and_counts_down() {
        let mut s = PotentiationState::with_charge(2.0, 1);
        s.decay();
        assert_eq!((s.timer(), s.charge(), s.memory()), (0, 0.0, 0.0));

        let mut s = PotentiationState::with_charge(2.0, 500);
        s.decay();
        assert_eq!((s.timer(), s.memory()), (499, 2.0));

        let mut s = PotentiationState::new();
        s.decay();
        assert_eq!(s, PotentiationState::new());
    }

    #[test]
    fn config_validation() {
        let cfg = LtpConfig::default();
        assert!(cfg.validate(-90.0, -50.0).is_ok());
        assert!(cfg.validate(-90.0, -75.0).is_err());
        let cfg = LtpConfig {
            duration_exponent: 0.5,
            ..LtpConfig::default()
        };
        assert!(cfg.validate(-90.0, -50.0).is_err());
    }

    proptest! {
        #[test]
        fn invariants_hold_over_random_histories(
            events in prop::collection::vec((any::<bool>(), -80.0f64..-60.0, 0usize..300), 1..60)
        ) {
            let cfg = LtpConfig::default();
            let mut s = PotentiationState::new();
            for (arrive, v_local, idle) in events {
                if arrive {
                    let before = (s.charge(), s.timer());
                    let opened = s.gate_check(v_local, &cfg);
                    if opened {
                        prop_assert!(s.charge() > before.0);
                        prop_assert!(s.timer() > before.1);
                    }
                }
                for _ in 0..idle {
                    s.shift();
                    s.decay();
                    prop_assert_eq!(s.timer() > 0, s.charge() > 0.0);
                    prop_assert_eq!(s.memory() == 0.0, s.timer() == 0);
                    let m = s.multiplier(&cfg);
                    prop_assert!((1.0..=cfg.max_multiplier()).contains(&m));
                }
            }
        }
    }
}
