//! Runs a scenario end to end and records spikes, body potential and
//! synaptic memory.

use crate::analysis;
use crate::cell::DerivedAmplitudes;
use crate::error::Result;
use crate::scenario::Scenario;
use crate::stimulus::Target;

/// Body potential and per-compartment memory of one cell, one entry per tick.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTrace {
    pub cell: usize,
    pub vbody: Vec<f64>,
    /// `memory[compartment][tick]`
    pub memory: Vec<Vec<f64>>,
}

impl CellTrace {
    pub fn memory_at(&self, compartment: usize, tick: u64) -> f64 {
        self.memory[compartment][tick as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordSet {
    pub scenario: Scenario,
    pub amplitudes: DerivedAmplitudes,
    pub total_ticks: u64,
    /// Spike ticks per cell.
    pub spikes: Vec<Vec<u64>>,
    pub trace: CellTrace,
    pub warnings: Vec<String>,
}

impl RecordSet {
    pub fn observed_spikes(&self) -> &[u64] {
        self.spikes
            .get(self.trace.cell)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn spike_count(&self) -> usize {
        self.spikes.iter().map(Vec::len).sum()
    }
}

/// Simulates `scenario` for its full length.
pub fn run(scenario: &Scenario) -> Result<RecordSet> {
    let built = scenario.build()?;
    let mut network = built.network;
    let total = scenario.total_ticks;
    let observed = scenario.recording.observed_cell;
    let n_comp = network.cells().get(observed).map_or(0, |c| c.len());

    let mut spikes = vec![Vec::new(); network.len()];
    let mut trace = CellTrace {
        cell: observed,
        vbody: Vec::with_capacity(total as usize),
        memory: vec![Vec::with_capacity(total as usize); n_comp],
    };
    let mut schedule = built.schedule.iter().peekable();
    let mut external: Vec<Target> = Vec::new();

    for tick in 0..total {
        external.clear();
        while let Some(&&(t, target)) = schedule.peek() {
            if t != tick {
                break;
            }
            external.push(target);
            schedule.next();
        }
        let outcomes = network.step(&external);
        for (id, out) in outcomes.iter().enumerate() {
            if out.spike {
                spikes[id].push(tick);
            }
        }
        match outcomes.get(observed) {
            Some(out) => {
                trace.vbody.push(out.v_body);
                for (c, m) in network.cell(observed).memories().enumerate() {
                    trace.memory[c].push(m);
                }
            }
            None => trace.vbody.push(scenario.cell.v_rest),
        }
    }

    Ok(RecordSet {
        scenario: scenario.clone(),
        amplitudes: built.amplitudes,
        total_ticks: total,
        spikes,
        trace,
        warnings: built.warnings,
    })
}

/// Runs independent scenarios, in parallel when the `parallel` feature is on.
/// Results come back in input order.
pub fn run_sweep(scenarios: &[Scenario]) -> Vec<Result<RecordSet>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        scenarios.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        scenarios.iter().map(run).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSummary {
    pub start_tick: u64,
    pub end_tick: u64,
    pub spikes: usize,
    pub rate_hz: f64,
    /// Memory of every compartment of the observed cell at the last tick of
    /// the window.
    pub memory: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub pre: WindowSummary,
    pub post: WindowSummary,
}

impl Comparison {
    pub fn memory_delta(&self) -> Vec<f64> {
        self.post
            .memory
            .iter()
            .zip(&self.pre.memory)
            .map(|(b, a)| b - a)
            .collect()
    }
}

/// Rates and memory of the observed cell over two windows.
///
/// # Panics
/// If a window is empty, overlaps the other or runs past the record.
pub fn compare(pre: (u64, u64), post: (u64, u64), record: &RecordSet) -> Comparison {
    assert!(
        pre.0 < pre.1 && post.0 < post.1,
        "windows must be non-empty"
    );
    assert!(
        pre.1 <= post.0 || post.1 <= pre.0,
        "windows must not overlap"
    );
    assert!(
        pre.1.max(post.1) <= record.total_ticks,
        "windows must lie within the run"
    );
    let window = |(start, end): (u64, u64)| {
        let spikes = record.observed_spikes();
        WindowSummary {
            start_tick: start,
            end_tick: end,
            spikes: analysis::count_in(spikes, start, end),
            rate_hz: analysis::rate_in(spikes, start, end),
            memory: record
                .trace
                .memory
                .iter()
                .map(|m| m[(end - 1) as usize])
                .collect(),
        }
    };
    Comparison {
        pre: window(pre),
        post: window(post),
    }
}
