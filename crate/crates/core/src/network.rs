//! Multi-cell wiring, axonal delays and the global tick scheduler.

use serde::{Deserialize, Serialize};

use crate::cell::{Arrival, FiringCell, StepOutcome};
use crate::error::{Error, Result};
use crate::kernel::SynapseKind;
use crate::stimulus::Target;

/// Whether a cell's output spikes excite or inhibit its targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    #[default]
    Excitatory,
    Inhibitory,
}

impl Polarity {
    pub fn synapse_kind(self) -> SynapseKind {
        match self {
            Polarity::Excitatory => SynapseKind::Excitatory,
            Polarity::Inhibitory => SynapseKind::Inhibitory,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Connection {
    pub source: usize,
    pub target: Target,
    #[serde(default = "default_delay")]
    pub delay_ticks: u32,
}

fn default_delay() -> u32 {
    1
}

impl Connection {
    pub fn new(source: usize, target: Target, delay_ticks: u32) -> Self {
        Self {
            source,
            target,
            delay_ticks,
        }
    }
}

/// Delivery counters, used to check that no spike is lost or duplicated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NetworkStats {
    pub emitted: u64,
    pub scheduled: u64,
    pub delivered: u64,
    pub dropped_refractory: u64,
}

/// How cells are stepped within a tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Data-parallel over cells for networks of at least 64 cells; sequential
    /// without the `parallel` feature.
    #[default]
    Parallel,
}

#[derive(Debug, Clone)]
pub struct Network {
    cells: Vec<FiringCell>,
    polarity: Vec<Polarity>,
    connections: Vec<Connection>,
    /// Outgoing (target, delay) per source cell, in connection order.
    outgoing: Vec<Vec<(Target, u32)>>,
    /// In-flight spikes bucketed by `arrival_tick % calendar.len()`.
    calendar: Vec<Vec<Target>>,
    inbox: Vec<Vec<Arrival>>,
    outcomes: Vec<StepOutcome>,
    tick: u64,
    stats: NetworkStats,
}

impl Network {
    pub fn new(
        cells: Vec<FiringCell>,
        polarity: Vec<Polarity>,
        connections: Vec<Connection>,
    ) -> Result<Self> {
        if polarity.len() != cells.len() {
            return Err(Error::config(
                "cells",
                format!("{} cells but {} polarities", cells.len(), polarity.len()),
            ));
        }
        let mut outgoing = vec![Vec::new(); cells.len()];
        let mut max_delay = 1;
        for (k, c) in connections.iter().enumerate() {
            let path = format!("connections[{k}]");
            if c.source >= cells.len() {
                return Err(Error::config(
                    path,
                    format!("unknown source cell {}", c.source),
                ));
            }
            check_target(&cells, c.target).map_err(|reason| Error::config(&path, reason))?;
            if c.delay_ticks < 1 {
                return Err(Error::config(path, "delay_ticks must be at least 1"));
            }
            let kind = cells[c.target.cell].compartments()[c.target.compartment].kind();
            if kind != polarity[c.source].synapse_kind() {
                return Err(Error::config(
                    path,
                    format!(
                        "{:?} cell {} cannot drive {:?} compartment {} of cell {}",
                        polarity[c.source], c.source, kind, c.target.compartment, c.target.cell
                    ),
                ));
            }
            outgoing[c.source].push((c.target, c.delay_ticks));
            max_delay = max_delay.max(c.delay_ticks);
        }
        let n = cells.len();
        Ok(Self {
            cells,
            polarity,
            connections,
            outgoing,
            calendar: vec![Vec::new(); max_delay as usize + 1],
            inbox: vec![Vec::new(); n],
            outcomes: Vec::with_capacity(n),
            tick: 0,
            stats: NetworkStats::default(),
        })
    }

    /// A network of unconnected excitatory cells.
    pub fn isolated(cells: Vec<FiringCell>) -> Self {
        let n = cells.len();
        Self::new(cells, vec![Polarity::Excitatory; n], Vec::new())
            .expect("no connections to validate")
    }

    pub fn cells(&self) -> &[FiringCell] {
        &self.cells
    }

    pub fn cell(&self, id: usize) -> &FiringCell {
        &self.cells[id]
    }

    pub fn polarity(&self) -> &[Polarity] {
        &self.polarity
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Ticks stepped so far; the next step processes this tick.
    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn stats(&self) -> NetworkStats {
        self.stats
    }

    /// Outcomes of the most recent step, indexed by cell id.
    pub fn outcomes(&self) -> &[StepOutcome] {
        &self.outcomes
    }

    /// Spikes still scheduled for future ticks.
    pub fn in_flight(&self) -> usize {
        self.calendar.iter().map(Vec::len).sum()
    }

    pub fn check_target(&self, target: Target) -> Result<()> {
        check_target(&self.cells, target).map_err(|reason| Error::config("target", reason))
    }

    /// Advances every cell by one tick.
    ///
    /// All deliveries for the current tick (in-flight spikes first, then
    /// `external`) are collected before any cell steps, so the cells are
    /// independent within the tick and may be stepped in any order or in
    /// parallel. Returns the per-cell outcomes.
    pub fn step(&mut self, external: &[Target]) -> &[StepOutcome] {
        self.step_with(external, Execution::default())
    }

    /// [`Network::step`] with an explicit execution strategy. Both strategies
    /// produce identical results.
    pub fn step_with(&mut self, external: &[Target], execution: Execution) -> &[StepOutcome] {
        let slot = (self.tick % self.calendar.len() as u64) as usize;
        let due = std::mem::take(&mut self.calendar[slot]);
        for t in due.iter().chain(external) {
            self.inbox[t.cell].push(Arrival::new(t.compartment));
        }
        let mut due = due;
        due.clear();
        self.calendar[slot] = due;

        self.outcomes.clear();
        match execution {
            Execution::Sequential => {
                step_cells_sequential(&mut self.cells, &self.inbox, &mut self.outcomes)
            }
            Execution::Parallel => step_cells(&mut self.cells, &self.inbox, &mut self.outcomes),
        }

        for (id, out) in self.outcomes.iter().enumerate() {
            let n_in = self.inbox[id].len() as u64;
            if out.accepted {
                self.stats.delivered += n_in;
            } else {
                self.stats.dropped_refractory += n_in;
            }
            self.inbox[id].clear();
            if out.spike {
                self.stats.emitted += 1;
                for &(target, delay) in &self.outgoing[id] {
                    let at = ((self.tick + delay as u64) % self.calendar.len() as u64) as usize;
                    self.calendar[at].push(target);
                    self.stats.scheduled += 1;
                }
            }
        }
        self.tick += 1;
        &self.outcomes
    }
}

fn check_target(cells: &[FiringCell], target: Target) -> std::result::Result<(), String> {
    let cell = cells
        .get(target.cell)
        .ok_or_else(|| format!("unknown target cell {}", target.cell))?;
    if target.compartment >= cell.len() {
        return Err(format!(
            "cell {} has {} compartments, no compartment {}",
            target.cell,
            cell.len(),
            target.compartment
        ));
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn step_cells(cells: &mut [FiringCell], inbox: &[Vec<Arrival>], outcomes: &mut Vec<StepOutcome>) {
    use rayon::prelude::*;
    // Below this size the fork/join overhead outweighs the work.
    const MIN_PARALLEL_CELLS: usize = 64;
    if cells.len() < MIN_PARALLEL_CELLS {
        return step_cells_sequential(cells, inbox, outcomes);
    }
    cells
        .par_iter_mut()
        .zip(inbox.par_iter())
        .map(|(cell, arrivals)| cell.step(arrivals))
        .collect_into_vec(outcomes);
}

#[cfg(not(feature = "parallel"))]
fn step_cells(cells: &mut [FiringCell], inbox: &[Vec<Arrival>], outcomes: &mut Vec<StepOutcome>) {
    step_cells_sequential(cells, inbox, outcomes)
}

fn step_cells_sequential(
    cells: &mut [FiringCell],
    inbox: &[Vec<Arrival>],
    outcomes: &mut Vec<StepOutcome>,
) {
    outcomes.extend(
        cells
            .iter_mut()
            .zip(inbox)
            .map(|(cell, arrivals)| cell.step(arrivals)),
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::CellParams;
    use SynapseKind::{Excitatory as E, Inhibitory as I};

    fn cell(layout: &[SynapseKind]) -> FiringCell {
        FiringCell::new(&CellParams::default(), layout).unwrap()
    }

    #[test]
    fn lone_cell_just_shifts() {
        let mut net = Network::isolated(vec![cell(&[E, E])]);
        for _ in 0..10 {
            assert!(!net.step(&[])[0].spike);
        }
        assert_eq!(net.tick(), 10);
        assert_eq!(net.cell(0).clock().tick_index(), 10);
    }

    #[test]
    fn spike_reaches_target_after_delay() {
        // Cell 0 has one input (80 mV EPSP) and fires one tick after drive.
        let net_cells = vec![cell(&[E]), cell(&[E, E, E, E])];
        let conn = Connection::new(0, Target::new(1, 2), 1);
        let mut net = Network::new(net_cells, vec![Polarity::Excitatory; 2], vec![conn]).unwrap();
        net.step(&[Target::new(0, 0)]);
        let out = net.step(&[]).to_vec();
        assert!(out[0].spike);
        assert_eq!(net.in_flight(), 1);
        // Delivered on the next tick: the kernel lands with sample 0 = 0 now.
        net.step(&[]);
        let reg = net.cell(1).compartments()[2].psp_register();
        let k = net.cell(1).epsp_kernel();
        assert_eq!(reg.get(0), k.sample(0));
        assert_eq!(reg.get(1), k.sample(1));
        assert_eq!(net.stats().delivered, 2);
    }

    #[test]
    fn polarity_must_match_target_kind() {
        let cells = vec![cell(&[E]), cell(&[E, I])];
        let bad = Connection::new(0, Target::new(1, 1), 1);
        assert!(Network::new(cells.clone(), vec![Polarity::Excitatory; 2], vec![bad]).is_err());
        let ok = Connection::new(0, Target::new(1, 1), 1);
        assert!(Network::new(
            cells.clone(),
            vec![Polarity::Inhibitory, Polarity::Excitatory],
            vec![ok]
        )
        .is_ok());
        let zero = Connection::new(0, Target::new(1, 0), 0);
        assert!(Network::new(cells.clone(), vec![Polarity::Excitatory; 2], vec![zero]).is_err());
        let missing = Connection::new(0, Target::new(1, 5), 1);
        assert!(Network::new(cells, vec![Polarity::Excitatory; 2], vec![missing]).is_err());
    }

    fn spike_log(
        net: &mut Network,
        drive: &dyn Fn(u64) -> Vec<Target>,
        ticks: u64,
    ) -> Vec<(u64, usize)> {
        let mut log = Vec::new();
        for t in 0..ticks {
            let out = net.step(&drive(t));
            for (id, o) in out.iter().enumerate() {
                if o.spike {
                    log.push((t, id));
                }
            }
        }
        log
    }

    #[test]
    fn cell_order_does_not_matter() {
        let make = |swap: bool| {
            let (a, b) = if swap { (1, 0) } else { (0, 1) };
            let p = CellParams {
                n_inputs: Some(1),
                ..CellParams::default()
            };
            let strong = || FiringCell::new(&p, &[E, E, E]).unwrap();
            let cells = vec![strong(), strong()];
            let conns = vec![
                Connection::new(a, Target::new(b, 1), 1),
                Connection::new(b, Target::new(a, 2), 1),
            ];
            Network::new(cells, vec![Polarity::Excitatory; 2], conns).unwrap()
        };
        let drive = |swap: bool| {
            move |t: u64| {
                let a = if swap { 1 } else { 0 };
                if t.is_multiple_of(37) {
                    vec![Target::new(a, 0)]
                } else {
                    vec![]
                }
            }
        };
        let log = spike_log(&mut make(false), &drive(false), 2000);
        let swapped: Vec<(u64, usize)> = spike_log(&mut make(true), &drive(true), 2000)
            .into_iter()
            .map(|(t, id)| (t, 1 - id))
            .collect();
        assert!(!log.is_empty());
        let mut sorted = swapped;
        sorted.sort();
        assert_eq!(log, sorted);
    }
}
