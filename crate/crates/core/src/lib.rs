//! Discrete-time simulator of the firing cell neuron model.
//!
//! Each dendrite compartment keeps its postsynaptic potential in a short shift
//! register instead of integrating membrane equations. Every 0.5 ms tick the
//! registers shift, incoming spikes add their PSP time course, the weighted
//! sum of the current slots is compared with the firing threshold, and a
//! spike resets all PSP registers and starts a 1.5 ms refraction. A calcium
//! register per synapse accumulates charge whenever an arrival finds the
//! synapse depolarized past the local gate, giving the synapse a long-lived
//! memory that scales its later EPSPs.
//!
//! Modules, bottom up:
//!
//! * [`register`], [`kernel`], [`plasticity`], [`cell`]: single-cell dynamics
//! * [`network`]: wiring, axonal delays and the tick scheduler
//! * [`stimulus`]: periodic external spike trains
//! * [`scenario`], [`harness`]: configuration files and complete runs
//! * [`analysis`], [`output`]: interspike intervals, return maps, CSV files

pub mod analysis;
pub mod cell;
pub mod clock;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod network;
pub mod output;
pub mod plasticity;
pub mod register;
pub mod scenario;
pub mod stimulus;

pub use cell::{
    effective_epsp_amplitude, min_psp, Arrival, CellParams, Compartment, FiringCell, StepOutcome,
};
pub use error::{Error, Result};
pub use harness::{compare, run, run_sweep, Comparison, RecordSet};
pub use kernel::{make_kernel, PspKernel, SynapseKind};
pub use network::{Connection, Execution, Network, NetworkStats, Polarity};
pub use plasticity::{LtpConfig, PotentiationState};
pub use register::{ShiftRegister, REGISTER_LEN};
pub use scenario::Scenario;
pub use stimulus::{generate, Jitter, Target, TrainSpec};
