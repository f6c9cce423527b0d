//! Deterministic periodic spike trains for external input lines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clock::TICKS_PER_SECOND;
use crate::error::{Error, Result};

/// Highest frequency with a period of at least one tick.
pub const MAX_FREQUENCY_HZ: f64 = TICKS_PER_SECOND as f64;

/// Compartment addressed by a train or a connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub cell: usize,
    pub compartment: usize,
}

impl Target {
    pub fn new(cell: usize, compartment: usize) -> Self {
        Self { cell, compartment }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Jitter {
    #[default]
    None,
    /// Each spike moves by a uniform integer offset in `[-ticks, ticks]`.
    Uniform { ticks: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    pub target: Target,
    pub frequency_hz: f64,
    #[serde(default)]
    pub phase_ticks: u64,
    pub start_tick: u64,
    pub stop_tick: u64,
    #[serde(default)]
    pub jitter: Jitter,
}

impl TrainSpec {
    pub fn periodic(
        target: Target,
        frequency_hz: f64,
        phase_ticks: u64,
        start_tick: u64,
        stop_tick: u64,
    ) -> Self {
        Self {
            target,
            frequency_hz,
            phase_ticks,
            start_tick,
            stop_tick,
            jitter: Jitter::None,
        }
    }

    pub fn period_ticks(&self) -> f64 {
        TICKS_PER_SECOND as f64 / self.frequency_hz
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
            return Err(Error::config(
                "frequency_hz",
                format!("must be > 0, got {}", self.frequency_hz),
            ));
        }
        if self.frequency_hz > MAX_FREQUENCY_HZ {
            return Err(Error::config(
                "frequency_hz",
                format!(
                    "{} Hz has a period shorter than one 0.5 ms tick (max {MAX_FREQUENCY_HZ} Hz)",
                    self.frequency_hz
                ),
            ));
        }
        if self.start_tick >= self.stop_tick {
            return Err(Error::config(
                "start_tick",
                format!("window [{}, {}) is empty", self.start_tick, self.stop_tick),
            ));
        }
        Ok(())
    }
}

/// Spike ticks of a train, strictly increasing.
///
/// Without jitter the result is
/// `{start + phase + round(k * period)} ∩ [start, stop)` and `seed` is ignored.
/// With jitter, each nominal tick is displaced by a draw from a generator
/// seeded from `seed` and the target, then clamped into the window;
/// collisions are merged.
pub fn generate(spec: &TrainSpec, seed: u64) -> Result<Vec<u64>> {
    spec.validate()?;
    let period = spec.period_ticks();
    let origin = spec.start_tick + spec.phase_ticks;
    let mut ticks = Vec::new();
    for k in 0u64.. {
        let t = origin + (k as f64 * period).round() as u64;
        if t >= spec.stop_tick {
            break;
        }
        ticks.push(t);
    }
    if let Jitter::Uniform { ticks: j } = spec.jitter {
        if j > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(train_seed(seed, spec));
            let j = j as i64;
            for t in &mut ticks {
                let shifted = *t as i64 + rng.gen_range(-j..=j);
                *t = shifted.clamp(spec.start_tick as i64, spec.stop_tick as i64 - 1) as u64;
            }
            ticks.sort_unstable();
            ticks.dedup();
        }
    }
    Ok(ticks)
}

fn train_seed(seed: u64, spec: &TrainSpec) -> u64 {
    // splitmix64 finalizer over the seed and the target address
    let mut z = seed
        ^ (spec.target.cell as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (spec.target.compartment as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ spec.start_tick.rotate_left(32);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
