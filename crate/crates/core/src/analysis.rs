//! Interspike intervals, firing rates and Poincaré return maps.

use crate::clock::{TICKS_PER_SECOND, TICK_MS};

/// Intervals between consecutive spikes, in ticks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IsiSequence {
    pub intervals: Vec<u64>,
}

impl IsiSequence {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn to_ms(&self) -> Vec<f64> {
        self.intervals.iter().map(|&i| i as f64 * TICK_MS).collect()
    }

    /// Population variance of the intervals in ms².
    pub fn variance_ms2(&self) -> f64 {
        if self.intervals.is_empty() {
            return 0.0;
        }
        let ms = self.to_ms();
        let n = ms.len() as f64;
        let mean = ms.iter().sum::<f64>() / n;
        ms.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
    }

    /// Spike ticks relative to the first spike.
    pub fn cumulative(&self) -> Vec<u64> {
        std::iter::once(0)
            .chain(self.intervals.iter().scan(0, |acc, &i| {
                *acc += i;
                Some(*acc)
            }))
            .collect()
    }
}

/// Consecutive interval pairs `(I(n), I(n+1))` in ms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReturnMap {
    pub points: Vec<(f64, f64)>,
}

impl ReturnMap {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of distinct points. Points live on the 0.5 ms tick grid, so
    /// comparing them in whole ticks is exact.
    pub fn distinct_points(&self) -> usize {
        let mut keys: Vec<(u64, u64)> = self
            .points
            .iter()
            .map(|&(a, b)| ((a / TICK_MS).round() as u64, (b / TICK_MS).round() as u64))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys.len()
    }
}

pub fn isi(spike_ticks: &[u64]) -> IsiSequence {
    debug_assert!(
        spike_ticks.windows(2).all(|w| w[0] < w[1]),
        "spike ticks must increase"
    );
    IsiSequence {
        intervals: spike_ticks.windows(2).map(|w| w[1] - w[0]).collect(),
    }
}

pub fn return_map(isi: &IsiSequence) -> ReturnMap {
    ReturnMap {
        points: isi
            .intervals
            .windows(2)
            .map(|w| (w[0] as f64 * TICK_MS, w[1] as f64 * TICK_MS))
            .collect(),
    }
}

/// Firing rate in Hz for consecutive windows of `window_ticks`, covering
/// `[0, total_ticks)`. A trailing partial window is rated over its own length.
pub fn rate(spike_ticks: &[u64], window_ticks: u64, total_ticks: u64) -> Vec<f64> {
    assert!(window_ticks >= 1, "window_ticks must be at least 1");
    let mut out = Vec::new();
    let mut start = 0;
    while start < total_ticks {
        let end = (start + window_ticks).min(total_ticks);
        out.push(rate_in(spike_ticks, start, end));
        start = end;
    }
    out
}

/// Mean rate in Hz over `[start, end)`.
pub fn rate_in(spike_ticks: &[u64], start: u64, end: u64) -> f64 {
    if end <= start {
        return 0.0;
    }
    count_in(spike_ticks, start, end) as f64 * TICKS_PER_SECOND as f64 / (end - start) as f64
}

pub fn count_in(spike_ticks: &[u64], start: u64, end: u64) -> usize {
    spike_ticks
        .iter()
        .filter(|&&t| t >= start && t < end)
        .count()
}
