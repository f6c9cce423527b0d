//! Simulated time. One tick is half a millisecond.

use serde::{Deserialize, Serialize};

/// Duration of a single update cycle in milliseconds.
pub const TICK_MS: f64 = 0.5;

/// Number of ticks in one simulated second.
pub const TICKS_PER_SECOND: u64 = 2000;

/// Monotone tick counter. The tick duration is fixed for a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickClock {
    tick: u64,
}

impl TickClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tick_index(&self) -> u64 {
        self.tick
    }

    pub fn tick_duration_ms(&self) -> f64 {
        TICK_MS
    }

    pub fn simulated_time_ms(&self) -> f64 {
        ticks_to_ms(self.tick)
    }

    pub fn advance(&mut self) {
        self.tick += 1;
    }
}

pub fn ticks_to_ms(ticks: u64) -> f64 {
    ticks as f64 * TICK_MS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_is_half_ms_per_tick() {
        let mut clock = TickClock::new();
        for _ in 0..7 {
            clock.advance();
        }
        assert_eq!(clock.tick_index(), 7);
        assert_eq!(clock.simulated_time_ms(), 3.5);
        assert_eq!(clock.tick_duration_ms(), 0.5);
        assert_eq!(ticks_to_ms(TICKS_PER_SECOND), 1000.0);
    }
}
