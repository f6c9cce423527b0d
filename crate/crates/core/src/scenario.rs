//! Scenario files: network topology, stimulus program and recording options.
//!
//! Scenarios are TOML documents carrying a `schema_version`. Every field has
//! a default, so a loaded scenario serializes back with every resolved value
//! spelled out.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cell::{CellParams, DerivedAmplitudes, FiringCell};
use crate::error::{Error, Result};
use crate::kernel::SynapseKind;
use crate::network::{Connection, Network, Polarity};
use crate::stimulus::{generate, Jitter, Target, TrainSpec};

pub const SCHEMA_VERSION: u32 = 1;

const EPSP5_PRESET: &str = include_str!("../presets/epsp5.toml");
const EPSP7_PRESET: &str = include_str!("../presets/epsp7.toml");

/// Names of the built-in presets.
pub const PRESETS: [&str; 2] = ["epsp5", "epsp7"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_total_ticks")]
    pub total_ticks: u64,
    /// Template shared by every cell.
    #[serde(default)]
    pub cell: CellParams,
    #[serde(default)]
    pub cells: Vec<CellSpec>,
    #[serde(default)]
    pub connections: Vec<Connection>,
    #[serde(default)]
    pub stimulus: StimulusSpec,
    #[serde(default)]
    pub recording: RecordingOptions,
}

fn default_total_ticks() -> u64 {
    5000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    /// One character per compartment from the body outwards: `E` excitatory,
    /// `I` inhibitory.
    pub layout: String,
    #[serde(default)]
    pub polarity: Polarity,
    /// Per-compartment weights; the template's linear ramp when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl CellSpec {
    pub fn kinds(&self) -> std::result::Result<Vec<SynapseKind>, String> {
        self.layout
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c.to_ascii_uppercase() {
                'E' => Ok(SynapseKind::Excitatory),
                'I' => Ok(SynapseKind::Inhibitory),
                other => Err(format!(
                    "unknown compartment kind '{other}' (expected E or I)"
                )),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StimulusSpec {
    pub baseline: BaselineSpec,
    /// Additional free-running trains. `stop_tick` of 0 means `total_ticks`.
    pub trains: Vec<TrainSpec>,
    pub episodes: Vec<Episode>,
}

/// Ongoing periodic drive on every input of the listed cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSpec {
    pub enabled: bool,
    /// Cells that receive baseline drive. Empty means all cells.
    pub cells: Vec<usize>,
    pub excitatory_hz: f64,
    pub inhibitory_hz: f64,
    /// Phase of input `i` is `i * phase_step_ticks` unless overridden.
    pub phase_step_ticks: u64,
    /// Per-compartment frequency overrides (Hz).
    pub frequencies_hz: Vec<f64>,
    /// Per-compartment phase overrides (ticks).
    pub phase_offsets: Vec<u64>,
    pub jitter: Jitter,
}

impl Default for BaselineSpec {
    fn default() -> Self {
        Self {
            enabled: true,
            cells: Vec::new(),
            excitatory_hz: 25.0,
            inhibitory_hz: 10.0,
            phase_step_ticks: 3,
            frequencies_hz: Vec::new(),
            phase_offsets: Vec::new(),
            jitter: Jitter::None,
        }
    }
}

/// A time-limited stimulation protocol such as the training burst.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Episode {
    pub name: String,
    pub start_tick: u64,
    pub stop_tick: u64,
    pub trains: Vec<EpisodeTrain>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeTrain {
    pub target: Target,
    pub frequency_hz: f64,
    /// Relative to the episode start.
    #[serde(default)]
    pub phase_ticks: u64,
    #[serde(default)]
    pub jitter: Jitter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecordingOptions {
    /// Cell whose body potential, memory and return map are written.
    pub observed_cell: usize,
    pub rate_window_ticks: u64,
    pub svg: bool,
}

impl Default for RecordingOptions {
    fn default() -> Self {
        Self {
            observed_cell: 0,
            rate_window_ticks: 200,
            svg: true,
        }
    }
}

/// A scenario turned into a ready-to-step network and a spike schedule.
#[derive(Debug, Clone)]
pub struct Built {
    pub network: Network,
    /// External arrivals sorted by tick (stable within a tick).
    pub schedule: Vec<(u64, Target)>,
    pub trains: Vec<TrainSpec>,
    pub amplitudes: DerivedAmplitudes,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        let value: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
        // A run manifest nests the scenario under `[scenario]`.
        let table = match value.get("scenario") {
            Some(toml::Value::Table(t)) if value.contains_key("run") => t.clone(),
            _ => value,
        };
        table.try_into().map_err(|e: toml::de::Error| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scenario = Self::from_toml_str(&text).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            message,
        })?;
        scenario.check_schema()?;
        Ok(scenario)
    }

    pub fn preset(name: &str) -> Option<Self> {
        let text = match name {
            "epsp5" => EPSP5_PRESET,
            "epsp7" => EPSP7_PRESET,
            _ => return None,
        };
        Some(Self::from_toml_str(text).expect("built-in presets parse"))
    }

    /// The preset source text exactly as shipped.
    pub fn preset_source(name: &str) -> Option<&'static str> {
        match name {
            "epsp5" => Some(EPSP5_PRESET),
            "epsp7" => Some(EPSP7_PRESET),
            _ => None,
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn check_schema(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        Ok(())
    }

    /// The first episode, conventionally the training protocol.
    pub fn training(&self) -> Option<&Episode> {
        self.stimulus.episodes.first()
    }

    /// Default comparison windows: before the first episode and after it.
    pub fn compare_windows(&self) -> Option<((u64, u64), (u64, u64))> {
        self.training()
            .map(|e| ((0, e.start_tick), (e.stop_tick, self.total_ticks)))
    }

    pub fn amplitudes(&self) -> Result<DerivedAmplitudes> {
        let n = match self.cells.first() {
            Some(c) => c
                .kinds()
                .map_err(|r| Error::config("cells[0].layout", r))?
                .len(),
            None => 1,
        };
        self.cell.amplitudes(n.max(1))
    }

    pub fn validate(&self) -> Result<()> {
        self.build().map(|_| ())
    }

    pub fn build(&self) -> Result<Built> {
        self.check_schema()?;
        if self.total_ticks == 0 {
            return Err(Error::config("total_ticks", "must be at least 1"));
        }
        self.cell.validate()?;

        let mut cells = Vec::with_capacity(self.cells.len());
        let mut polarity = Vec::with_capacity(self.cells.len());
        for (i, spec) in self.cells.iter().enumerate() {
            let kinds = spec
                .kinds()
                .map_err(|r| Error::config(format!("cells[{i}].layout"), r))?;
            if kinds.is_empty() {
                return Err(Error::config(
                    format!("cells[{i}].layout"),
                    "a cell needs at least one compartment",
                ));
            }
            let cell = FiringCell::with_weights(&self.cell, &kinds, spec.weights.as_deref())
                .map_err(|e| match e {
                    Error::Config { path, reason } => {
                        Error::config(format!("cells[{i}].{path}"), reason)
                    }
                    other => other,
                })?;
            cells.push(cell);
            polarity.push(spec.polarity);
        }
        let mut warnings = Vec::new();
        if let Some(c) = cells.first() {
            for k in [c.epsp_kernel(), c.ipsp_kernel()] {
                if k.is_truncated() {
                    warnings.push(format!(
                        "{:?} kernel is cut at 15 ms with {:.1}% of its peak remaining",
                        k.kind(),
                        100.0 * k.tail_fraction()
                    ));
                }
            }
        }
        let network = Network::new(cells, polarity, self.connections.clone())?;

        let trains = self.trains(&network)?;
        let mut schedule = Vec::new();
        for spec in &trains {
            for t in generate(spec, self.seed)? {
                schedule.push((t, spec.target));
            }
        }
        schedule.sort_by_key(|&(t, _)| t);

        if self.recording.observed_cell >= network.len().max(1) {
            return Err(Error::config(
                "recording.observed_cell",
                format!("no cell {}", self.recording.observed_cell),
            ));
        }
        if self.recording.rate_window_ticks == 0 {
            return Err(Error::config(
                "recording.rate_window_ticks",
                "must be at least 1",
            ));
        }

        Ok(Built {
            network,
            schedule,
            trains,
            amplitudes: self.amplitudes()?,
            warnings,
        })
    }

    /// Every train of the scenario with absolute windows, in a fixed order:
    /// baseline, free trains, then episodes.
    pub fn trains(&self, network: &Network) -> Result<Vec<TrainSpec>> {
        let mut out = Vec::new();
        let b = &self.stimulus.baseline;
        if b.enabled {
            let cells: Vec<usize> = if b.cells.is_empty() {
                (0..network.len()).collect()
            } else {
                b.cells.clone()
            };
            for (k, &cell) in cells.iter().enumerate() {
                if cell >= network.len() {
                    return Err(Error::config(
                        format!("stimulus.baseline.cells[{k}]"),
                        format!("no cell {cell}"),
                    ));
                }
                for c in network.cell(cell).compartments() {
                    let i = c.index();
                    let frequency_hz = b.frequencies_hz.get(i).copied().unwrap_or(match c.kind() {
                        SynapseKind::Excitatory => b.excitatory_hz,
                        SynapseKind::Inhibitory => b.inhibitory_hz,
                    });
                    let phase_ticks = b
                        .phase_offsets
                        .get(i)
                        .copied()
                        .unwrap_or(i as u64 * b.phase_step_ticks);
                    let spec = TrainSpec {
                        target: Target::new(cell, i),
                        frequency_hz,
                        phase_ticks,
                        start_tick: 0,
                        stop_tick: self.total_ticks,
                        jitter: b.jitter,
                    };
                    spec.validate().map_err(|e| {
                        prefix(
                            e,
                            &format!("stimulus.baseline[cell {cell}, compartment {i}]"),
                        )
                    })?;
                    out.push(spec);
                }
            }
        }
        for (k, t) in self.stimulus.trains.iter().enumerate() {
            let path = format!("stimulus.trains[{k}]");
            let mut spec = t.clone();
            if spec.stop_tick == 0 {
                spec.stop_tick = self.total_ticks;
            }
            if spec.stop_tick > self.total_ticks {
                return Err(Error::config(
                    format!("{path}.stop_tick"),
                    "window extends past total_ticks",
                ));
            }
            network
                .check_target(spec.target)
                .map_err(|e| prefix(e, &path))?;
            spec.validate().map_err(|e| prefix(e, &path))?;
            out.push(spec);
        }
        for (k, ep) in self.stimulus.episodes.iter().enumerate() {
            let path = format!("stimulus.episodes[{k}]");
            if ep.start_tick >= ep.stop_tick || ep.stop_tick > self.total_ticks {
                return Err(Error::config(
                    path,
                    format!(
                        "window [{}, {}) must be non-empty and lie within [0, {})",
                        ep.start_tick, ep.stop_tick, self.total_ticks
                    ),
                ));
            }
            for (j, t) in ep.trains.iter().enumerate() {
                let path = format!("{path}.trains[{j}]");
                network
                    .check_target(t.target)
                    .map_err(|e| prefix(e, &path))?;
                let spec = TrainSpec {
                    target: t.target,
                    frequency_hz: t.frequency_hz,
                    phase_ticks: t.phase_ticks,
                    start_tick: ep.start_tick,
                    stop_tick: ep.stop_tick,
                    jitter: t.jitter,
                };
                spec.validate().map_err(|e| prefix(e, &path))?;
                out.push(spec);
            }
        }
        Ok(out)
    }
}

fn prefix(e: Error, path: &str) -> Error {
    match e {
        Error::Config {
            path: inner,
            reason,
        } if inner == "target" => Error::config(format!("{path}.target"), reason),
        Error::Config {
            path: inner,
            reason,
        } => Error::config(format!("{path}.{inner}"), reason),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        schema_version = 1
        total_ticks = 100
        [[cells]]
        layout = "EEI"
    "#;

    #[test]
    fn minimal_scenario_fills_defaults() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(s.cell, CellParams::default());
        let built = s.build().unwrap();
        assert_eq!(built.network.len(), 1);
        assert_eq!(built.trains.len(), 3);
        assert_eq!(built.trains[2].frequency_hz, 10.0);
        assert_eq!(built.trains[1].phase_ticks, 3);
        assert!(built.schedule.windows(2).all(|w| w[0].0 <= w[1].0));
    }

    #[test]
    fn resolved_scenario_round_trips() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        let again = Scenario::from_toml_str(&s.to_toml_string()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        assert!(Scenario::from_toml_str("schema_version = 1\nbogus = 3").is_err());
        let s = Scenario::from_toml_str("schema_version = 9").unwrap();
        assert!(matches!(s.build(), Err(Error::Schema { found: 9, .. })));
    }

    #[test]
    fn validation_names_the_offending_key() {
        let text = r#"
            schema_version = 1
            total_ticks = 100
            [[cells]]
            layout = "EE"
            [[stimulus.episodes]]
            name = "training"
            start_tick = 50
            stop_tick = 200
            trains = []
        "#;
        let err = Scenario::from_toml_str(text).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("stimulus.episodes[0]"), "{err}");

        let text = r#"
            schema_version = 1
            [[cells]]
            layout = "EX"
        "#;
        let err = Scenario::from_toml_str(text).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("cells[0].layout"), "{err}");

        let text = r#"
            schema_version = 1
            [[cells]]
            layout = "EE"
            [[stimulus.trains]]
            target = { cell = 0, compartment = 4 }
            frequency_hz = 10.0
            start_tick = 0
            stop_tick = 0
        "#;
        let err = Scenario::from_toml_str(text).unwrap().build().unwrap_err();
        assert!(
            err.to_string().contains("stimulus.trains[0].target"),
            "{err}"
        );
    }

    #[test]
    fn presets_build_with_expected_amplitudes() {
        let five = Scenario::preset("epsp5").unwrap();
        let a = five.build().unwrap().amplitudes;
        assert_eq!(a.n_inputs, 16);
        assert_eq!(a.min_psp_mv, 2.5);
        assert_eq!(a.epsp_mv, 5.0);
        let seven = Scenario::preset("epsp7")
            .unwrap()
            .build()
            .unwrap()
            .amplitudes;
        assert!((seven.epsp_mv - 7.0).abs() < 1e-12);
        assert!(Scenario::preset("nope").is_none());
    }
}
