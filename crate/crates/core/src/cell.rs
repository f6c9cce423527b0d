//! Single firing cell: compartment string, weighted body summation, threshold
//! firing, refraction and the back-propagated reset.

use serde::{Deserialize, Serialize};

use crate::clock::TickClock;
use crate::error::{Error, Result};
use crate::kernel::{PspKernel, SynapseKind};
use crate::plasticity::{LtpConfig, PotentiationState};
use crate::register::{ShiftRegister, REGISTER_LEN};

/// Smallest single PSP: the span between threshold and the potassium
/// equilibrium potential shared out over all inputs.
pub fn min_psp(v_threshold: f64, e_k: f64, n_inputs: usize) -> Result<f64> {
    if n_inputs == 0 {
        return Err(Error::config("n_inputs", "must be at least 1"));
    }
    if v_threshold.partial_cmp(&e_k) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::config(
            "v_threshold",
            format!("must exceed e_k ({e_k}), got {v_threshold}"),
        ));
    }
    Ok((v_threshold - e_k) / n_inputs as f64)
}

pub fn effective_epsp_amplitude(min_psp: f64, enhancement: f64) -> Result<f64> {
    if !(min_psp > 0.0 && min_psp.is_finite()) {
        return Err(Error::config(
            "min_psp",
            format!("must be > 0, got {min_psp}"),
        ));
    }
    if !(enhancement >= 1.0 && enhancement.is_finite()) {
        return Err(Error::config(
            "epsp_enhancement",
            format!("must be >= 1, got {enhancement}"),
        ));
    }
    Ok(min_psp * enhancement)
}

/// Body and dendrite parameters shared by every cell built from one template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellParams {
    pub v_rest: f64,
    pub v_threshold: f64,
    /// Potassium equilibrium potential; floor for every potential.
    pub e_k: f64,
    pub refractory_ticks: u32,
    /// Input count used for the minimal PSP. `None` means the number of
    /// compartments of the cell.
    pub n_inputs: Option<usize>,
    pub epsp_enhancement: f64,
    pub ipsp_enhancement: f64,
    pub rise_ticks: usize,
    pub decay_half_life_ticks: f64,
    /// Passive attenuation per compartment of distance for local potentials.
    pub spread: f64,
    pub w_proximal: f64,
    pub w_distal: f64,
    /// How many ticks ahead of the arrival tick the LTP gate reads the local
    /// potential. `None` means the EPSP rise time, i.e. the gate sees the
    /// arriving EPSP at its peak.
    pub gate_lookahead_ticks: Option<usize>,
    pub ltp: LtpConfig,
}

impl Default for CellParams {
    fn default() -> Self {
        Self {
            v_rest: -80.0,
            v_threshold: -50.0,
            e_k: -90.0,
            refractory_ticks: 3,
            n_inputs: None,
            epsp_enhancement: 2.0,
            ipsp_enhancement: 1.0,
            rise_ticks: 2,
            decay_half_life_ticks: 6.0,
            spread: 0.5,
            w_proximal: 1.0,
            w_distal: 0.6,
            gate_lookahead_ticks: None,
            ltp: LtpConfig::default(),
        }
    }
}

/// Resolved PSP amplitudes for a given compartment count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedAmplitudes {
    pub n_inputs: usize,
    pub min_psp_mv: f64,
    pub epsp_mv: f64,
    pub ipsp_mv: f64,
}

impl CellParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_k < self.v_rest
            && self.v_rest < self.ltp.gate_mv
            && self.ltp.gate_mv < self.v_threshold)
        {
            return Err(Error::config(
                "cell",
                format!(
                    "potentials must satisfy e_k < v_rest < gate_mv < v_threshold, got {} < {} < {} < {}",
                    self.e_k, self.v_rest, self.ltp.gate_mv, self.v_threshold
                ),
            ));
        }
        self.ltp.validate(self.e_k, self.v_threshold)?;
        if !(self.spread > 0.0 && self.spread < 1.0) {
            return Err(Error::config(
                "cell.spread",
                format!("must lie in (0, 1), got {}", self.spread),
            ));
        }
        for (path, w) in [
            ("cell.w_proximal", self.w_proximal),
            ("cell.w_distal", self.w_distal),
        ] {
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::config(path, format!("must lie in (0, 1], got {w}")));
            }
        }
        if self.w_distal > self.w_proximal {
            return Err(Error::config(
                "cell.w_distal",
                "must not exceed w_proximal (weights fall off with distance from the body)",
            ));
        }
        if let Some(k) = self.gate_lookahead_ticks {
            if k >= REGISTER_LEN {
                return Err(Error::config(
                    "cell.gate_lookahead_ticks",
                    format!("must be < {REGISTER_LEN}, got {k}"),
                ));
            }
        }
        Ok(())
    }

    pub fn amplitudes(&self, n_compartments: usize) -> Result<DerivedAmplitudes> {
        let n_inputs = self.n_inputs.unwrap_or(n_compartments);
        let base = min_psp(self.v_threshold, self.e_k, n_inputs)?;
        Ok(DerivedAmplitudes {
            n_inputs,
            min_psp_mv: base,
            epsp_mv: effective_epsp_amplitude(base, self.epsp_enhancement)?,
            ipsp_mv: effective_epsp_amplitude(base, self.ipsp_enhancement)
                .map_err(|_| Error::config("cell.ipsp_enhancement", "must be >= 1"))?,
        })
    }

    /// Linear proximal-to-distal weight ramp.
    pub fn weight_profile(&self, n: usize) -> Vec<f64> {
        if n <= 1 {
            return vec![self.w_proximal; n];
        }
        let span = self.w_distal - self.w_proximal;
        (0..n)
            .map(|i| self.w_proximal + span * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// One dendrite segment with its synapse.
#[derive(Debug, Clone, PartialEq)]
pub struct Compartment {
    index: usize,
    kind: SynapseKind,
    weight: f64,
    psp: ShiftRegister,
    potentiation: PotentiationState,
    /// Third register for neuromodulation. Allocated but never driven.
    neuromod: ShiftRegister,
}

impl Compartment {
    pub fn new(index: usize, kind: SynapseKind, weight: f64) -> Self {
        Self {
            index,
            kind,
            weight,
            psp: ShiftRegister::new(),
            potentiation: PotentiationState::new(),
            neuromod: ShiftRegister::new(),
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn kind(&self) -> SynapseKind {
        self.kind
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn psp_register(&self) -> &ShiftRegister {
        &self.psp
    }

    pub fn psp_register_mut(&mut self) -> &mut ShiftRegister {
        &mut self.psp
    }

    pub fn calcium_register(&self) -> &ShiftRegister {
        self.potentiation.calcium()
    }

    pub fn neuromod_register(&self) -> &ShiftRegister {
        &self.neuromod
    }

    pub fn potentiation(&self) -> &PotentiationState {
        &self.potentiation
    }

    pub fn potentiation_mut(&mut self) -> &mut PotentiationState {
        &mut self.potentiation
    }

    pub fn memory(&self) -> f64 {
        self.potentiation.memory()
    }

    pub fn potentiation_timer(&self) -> u64 {
        self.potentiation.timer()
    }

    /// Adds `kernel * multiplier` onto the PSP register, then lifts any slot
    /// that would take the local potential below `floor` (a deviation from
    /// rest).
    pub fn deposit(&mut self, kernel: &PspKernel, multiplier: f64, floor: f64) {
        for (k, &s) in kernel.samples().iter().enumerate() {
            self.psp.add(k, s * multiplier);
        }
        if kernel.kind() == SynapseKind::Inhibitory {
            for k in 0..REGISTER_LEN {
                if self.psp.get(k) < floor {
                    self.psp.set(k, floor);
                }
            }
        }
    }
}

/// A spike delivered to a compartment this tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub compartment: usize,
    pub multiplier: f64,
}

impl Arrival {
    pub fn new(compartment: usize) -> Self {
        Self {
            compartment,
            multiplier: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub spike: bool,
    /// Body potential compared against threshold this tick (before any reset).
    pub v_body: f64,
    /// False when the cell was refractory and dropped this tick's arrivals.
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct FiringCell {
    compartments: Vec<Compartment>,
    v_rest: f64,
    v_threshold: f64,
    e_k: f64,
    refractory_ticks_total: u32,
    refractory_remaining: u32,
    epsp: PspKernel,
    ipsp: PspKernel,
    ltp: LtpConfig,
    gate_lookahead: usize,
    /// `spread^d` for every compartment distance `d`.
    spread_pow: Vec<f64>,
    clock: TickClock,
    touched: Vec<bool>,
}

impl FiringCell {
    /// Builds a cell with the default weight ramp.
    pub fn new(params: &CellParams, layout: &[SynapseKind]) -> Result<Self> {
        Self::with_weights(params, layout, None)
    }

    pub fn with_weights(
        params: &CellParams,
        layout: &[SynapseKind],
        weights: Option<&[f64]>,
    ) -> Result<Self> {
        params.validate()?;
        let n = layout.len();
        let weights = match weights {
            Some(w) => {
                if w.len() != n {
                    return Err(Error::config(
                        "weights",
                        format!("expected {n} weights, got {}", w.len()),
                    ));
                }
                w.to_vec()
            }
            None => params.weight_profile(n),
        };
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::config(
                    format!("weights[{i}]"),
                    format!("must lie in (0, 1], got {w}"),
                ));
            }
            if i > 0 && w > weights[i - 1] {
                return Err(Error::config(
                    format!("weights[{i}]"),
                    "weights must not increase with distance from the body",
                ));
            }
        }
        let amps = params.amplitudes(n.max(1))?;
        let epsp = PspKernel::new(
            SynapseKind::Excitatory,
            amps.epsp_mv,
            params.rise_ticks,
            params.decay_half_life_ticks,
        )?;
        let ipsp = PspKernel::new(
            SynapseKind::Inhibitory,
            amps.ipsp_mv,
            params.rise_ticks,
            params.decay_half_life_ticks,
        )?;
        let compartments = layout
            .iter()
            .zip(&weights)
            .enumerate()
            .map(|(i, (&kind, &w))| Compartment::new(i, kind, w))
            .collect();
        let spread_pow = (0..n.max(1))
            .map(|d| params.spread.powi(d as i32))
            .collect();
        Ok(Self {
            compartments,
            v_rest: params.v_rest,
            v_threshold: params.v_threshold,
            e_k: params.e_k,
            refractory_ticks_total: params.refractory_ticks,
            refractory_remaining: 0,
            epsp,
            ipsp,
            ltp: params.ltp.clone(),
            gate_lookahead: params.gate_lookahead_ticks.unwrap_or(params.rise_ticks),
            spread_pow,
            clock: TickClock::new(),
            touched: vec![false; n],
        })
    }

    pub fn compartments(&self) -> &[Compartment] {
        &self.compartments
    }

    pub fn compartments_mut(&mut self) -> &mut [Compartment] {
        &mut self.compartments
    }

    pub fn len(&self) -> usize {
        self.compartments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.compartments.is_empty()
    }

    pub fn v_rest(&self) -> f64 {
        self.v_rest
    }

    pub fn v_threshold(&self) -> f64 {
        self.v_threshold
    }

    pub fn v_local_threshold(&self) -> f64 {
        self.ltp.gate_mv
    }

    pub fn e_k(&self) -> f64 {
        self.e_k
    }

    pub fn epsp_kernel(&self) -> &PspKernel {
        &self.epsp
    }

    pub fn ipsp_kernel(&self) -> &PspKernel {
        &self.ipsp
    }

    pub fn ltp(&self) -> &LtpConfig {
        &self.ltp
    }

    pub fn kernel_for(&self, kind: SynapseKind) -> &PspKernel {
        match kind {
            SynapseKind::Excitatory => &self.epsp,
            SynapseKind::Inhibitory => &self.ipsp,
        }
    }

    pub fn refractory_ticks_total(&self) -> u32 {
        self.refractory_ticks_total
    }

    pub fn refractory_remaining(&self) -> u32 {
        self.refractory_remaining
    }

    pub fn clock(&self) -> TickClock {
        self.clock
    }

    pub fn memories(&self) -> impl Iterator<Item = f64> + '_ {
        self.compartments.iter().map(Compartment::memory)
    }

    /// Lowest slot value a PSP register may hold.
    pub fn psp_floor(&self) -> f64 {
        self.e_k - self.v_rest
    }

    /// Weighted sum of the current PSP deviations on top of rest, floored at
    /// `e_k`.
    pub fn body_potential(&self) -> f64 {
        let sum: f64 = self
            .compartments
            .iter()
            .map(|c| c.weight * c.psp.now())
            .sum();
        (self.v_rest + sum).max(self.e_k)
    }

    /// Potential at the synapse of compartment `i`, with every other
    /// compartment attenuated by `spread^distance`.
    pub fn local_potential(&self, i: usize) -> f64 {
        self.local_potential_at(i, 0)
    }

    /// Local potential `lookahead` ticks from now given the currently
    /// scheduled register contents.
    pub fn local_potential_at(&self, i: usize, lookahead: usize) -> f64 {
        assert!(i < self.compartments.len(), "compartment {i} out of range");
        let sum: f64 = self
            .compartments
            .iter()
            .enumerate()
            .map(|(j, c)| self.spread_pow[i.abs_diff(j)] * c.psp.get(lookahead))
            .sum();
        (self.v_rest + sum).max(self.e_k)
    }

    /// Current EPSP scaling for compartment `i`.
    pub fn potentiation_multiplier(&self, i: usize) -> f64 {
        let c = &self.compartments[i];
        match c.kind {
            SynapseKind::Excitatory => c.potentiation.multiplier(&self.ltp),
            SynapseKind::Inhibitory => 1.0,
        }
    }

    /// Deposits a spike on compartment `i` without any other tick processing.
    pub fn deposit_spike(&mut self, i: usize, multiplier: f64) {
        let floor = self.psp_floor();
        let kernel = match self.compartments[i].kind {
            SynapseKind::Excitatory => &self.epsp,
            SynapseKind::Inhibitory => &self.ipsp,
        };
        self.compartments[i].deposit(kernel, multiplier, floor);
    }

    /// Zeroes every PSP register (the switching signal).
    pub fn reset_psp(&mut self) {
        for c in &mut self.compartments {
            c.psp.reset();
        }
    }

    /// Advances the cell by one tick.
    ///
    /// Order: shift registers and count down potentiation; if refractory, drop
    /// the arrivals; deposit arrivals scaled by potentiation; run the LTP gate
    /// on every compartment that received something; compare the body
    /// potential with threshold and, on a spike, reset PSP registers and
    /// enter refraction.
    pub fn step(&mut self, arrivals: &[Arrival]) -> StepOutcome {
        self.clock.advance();
        for c in &mut self.compartments {
            c.psp.advance(0.0);
            c.potentiation.shift();
            c.potentiation.decay();
        }

        if self.refractory_remaining > 0 {
            self.refractory_remaining -= 1;
            return StepOutcome {
                spike: false,
                v_body: self.body_potential(),
                accepted: arrivals.is_empty(),
            };
        }

        if !arrivals.is_empty() {
            let floor = self.psp_floor();
            for a in arrivals {
                let c = &mut self.compartments[a.compartment];
                let (kernel, gain) = match c.kind {
                    SynapseKind::Excitatory => (&self.epsp, c.potentiation.multiplier(&self.ltp)),
                    SynapseKind::Inhibitory => (&self.ipsp, 1.0),
                };
                c.deposit(kernel, a.multiplier * gain, floor);
                self.touched[a.compartment] = true;
            }
            for i in 0..self.compartments.len() {
                if !std::mem::take(&mut self.touched[i]) {
                    continue;
                }
                if self.compartments[i].kind == SynapseKind::Excitatory {
                    let v_local = self.local_potential_at(i, self.gate_lookahead);
                    self.compartments[i]
                        .potentiation
                        .gate_check(v_local, &self.ltp);
                }
            }
        }

        let v_body = self.body_potential();
        let spike = v_body >= self.v_threshold;
        if spike {
            self.reset_psp();
            self.refractory_remaining = self.refractory_ticks_total;
        }
        StepOutcome {
            spike,
            v_body,
            accepted: true,
        }
    }
}
