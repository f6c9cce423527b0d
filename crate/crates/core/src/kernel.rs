//! Postsynaptic potential time courses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::register::REGISTER_LEN;

/// Fraction of the peak above which the last kernel sample counts as a
/// visible truncation.
pub const TRUNCATION_WARN_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynapseKind {
    Excitatory,
    Inhibitory,
}

impl SynapseKind {
    pub fn sign(self) -> f64 {
        match self {
            SynapseKind::Excitatory => 1.0,
            SynapseKind::Inhibitory => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            SynapseKind::Excitatory => 'E',
            SynapseKind::Inhibitory => 'I',
        }
    }
}

/// One PSP time course sampled once per tick; index 0 is the arrival tick.
#[derive(Debug, Clone, PartialEq)]
pub struct PspKernel {
    kind: SynapseKind,
    amplitude: f64,
    rise_ticks: usize,
    samples: [f64; REGISTER_LEN],
}

impl PspKernel {
    /// Linear rise from 0 to the signed amplitude over `rise_ticks`, then
    /// geometric decay with the given half-life, cut at the register length.
    pub fn new(
        kind: SynapseKind,
        amplitude: f64,
        rise_ticks: usize,
        decay_half_life_ticks: f64,
    ) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::config(
                "kernel.amplitude",
                format!("must be > 0, got {amplitude}"),
            ));
        }
        if !(1..REGISTER_LEN).contains(&rise_ticks) {
            return Err(Error::config(
                "kernel.rise_ticks",
                format!("must lie in [1, {}], got {rise_ticks}", REGISTER_LEN - 1),
            ));
        }
        if !(decay_half_life_ticks > 0.0 && decay_half_life_ticks.is_finite()) {
            return Err(Error::config(
                "kernel.decay_half_life_ticks",
                format!("must be > 0, got {decay_half_life_ticks}"),
            ));
        }
        let peak = kind.sign() * amplitude;
        let mut samples = [0.0; REGISTER_LEN];
        for (k, s) in samples.iter_mut().enumerate() {
            *s = if k < rise_ticks {
                peak * k as f64 / rise_ticks as f64
            } else if k == rise_ticks {
                peak
            } else {
                peak * 0.5f64.powf((k - rise_ticks) as f64 / decay_half_life_ticks)
            };
        }
        Ok(Self {
            kind,
            amplitude,
            rise_ticks,
            samples,
        })
    }

    pub fn kind(&self) -> SynapseKind {
        self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn rise_ticks(&self) -> usize {
        self.rise_ticks
    }

    pub fn samples(&self) -> &[f64; REGISTER_LEN] {
        &self.samples
    }

    pub fn sample(&self, k: usize) -> f64 {
        self.samples.get(k).copied().unwrap_or(0.0)
    }

    /// Signed peak value.
    pub fn peak(&self) -> f64 {
        self.kind.sign() * self.amplitude
    }

    /// Magnitude of the last sample relative to the amplitude.
    pub fn tail_fraction(&self) -> f64 {
        self.samples[REGISTER_LEN - 1].abs() / self.amplitude
    }

    pub fn is_truncated(&self) -> bool {
        self.tail_fraction() > TRUNCATION_WARN_FRACTION
    }
}

pub fn make_kernel(
    kind: SynapseKind,
    amplitude: f64,
    rise_ticks: usize,
    decay_half_life_ticks: f64,
) -> Result<PspKernel> {
    PspKernel::new(kind, amplitude, rise_ticks, decay_half_life_ticks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn excitatory_rise_and_half_life() {
        let k = make_kernel(SynapseKind::Excitatory, 5.0, 2, 6.0).unwrap();
        assert_eq!(k.samples()[0], 0.0);
        assert_eq!(k.samples()[1], 2.5);
        assert_eq!(k.samples()[2], 5.0);
        assert_abs_diff_eq!(k.samples()[8], 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(k.samples()[14], 1.25, epsilon = 1e-12);
    }

    #[test]
    fn inhibitory_is_the_mirror_image() {
        let e = make_kernel(SynapseKind::Excitatory, 5.0, 2, 6.0).unwrap();
        let i = make_kernel(SynapseKind::Inhibitory, 5.0, 2, 6.0).unwrap();
        assert_eq!(i.samples()[2], -5.0);
        for k in 0..REGISTER_LEN {
            assert_eq!(i.samples()[k], -e.samples()[k]);
            assert!(i.samples()[k] <= 0.0);
        }
        let min = i.samples().iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(min, -5.0);
    }

    #[test]
    fn fast_kernel_decays_geometrically() {
        let k = make_kernel(SynapseKind::Excitatory, 5.0, 1, 1.0).unwrap();
        assert_eq!(k.samples()[1], 5.0);
        assert_eq!(k.samples()[2], 2.5);
        // 5 * 2^-10
        assert_abs_diff_eq!(k.samples()[11], 0.0048828125, epsilon = 1e-12);
        assert!(!k.is_truncated());
    }

    #[test]
    fn peak_is_exact_and_samples_nonnegative() {
        for rise in 1..REGISTER_LEN {
            let k = make_kernel(SynapseKind::Excitatory, 3.7, rise, 4.5).unwrap();
            let max = k
                .samples()
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(max, 3.7);
            assert!(k.samples().iter().all(|&s| s >= 0.0));
        }
    }

    #[test]
    fn slow_decay_is_flagged_as_truncated() {
        let k = make_kernel(SynapseKind::Excitatory, 5.0, 2, 6.0).unwrap();
        // 0.5^(27/6) ~ 0.044 of the peak survives at slot 29
        assert!(k.is_truncated());
        assert_abs_diff_eq!(k.tail_fraction(), 0.5f64.powf(4.5), epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_kernel(SynapseKind::Excitatory, 0.0, 2, 6.0).is_err());
        assert!(make_kernel(SynapseKind::Excitatory, 5.0, 0, 6.0).is_err());
        assert!(make_kernel(SynapseKind::Excitatory, 5.0, 30, 6.0).is_err());
        assert!(make_kernel(SynapseKind::Excitatory, 5.0, 2, 0.0).is_err());
    }
}
