//! `fcsim`: run firing-cell scenarios and the built-in presets.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use firing_cell::output::{read_spikes, write_analysis, write_run};
use firing_cell::scenario::PRESETS;
use firing_cell::{run, Error, Scenario};

const EXIT_IO: u8 = 3;
const EXIT_PARSE: u8 = 4;
const EXIT_INVALID: u8 = 5;

#[derive(Parser)]
#[command(name = "fcsim", version, about = "Discrete-time firing cell simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario and print the resolved PSP amplitudes.
    Validate(Source),
    /// Run a scenario file and write the output directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a built-in preset and write the output directory.
    Replicate {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
        preset: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Recompute ISI, return-map and rate files from an existing spikes.csv.
    Analyze {
        #[arg(long)]
        spikes: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        cell: usize,
        /// Run length; defaults to one past the last spike.
        #[arg(long)]
        total_ticks: Option<u64>,
        #[arg(long, default_value_t = 200)]
        window_ticks: u64,
        #[arg(long)]
        no_svg: bool,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    preset: Option<String>,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    total_ticks: Option<u64>,
}

impl Overrides {
    fn apply(&self, scenario: &mut Scenario) {
        if let Some(seed) = self.seed {
            scenario.seed = seed;
        }
        if let Some(total) = self.total_ticks {
            scenario.total_ticks = total;
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => EXIT_IO,
        Error::Parse { .. } | Error::Schema { .. } | Error::Csv { .. } => EXIT_PARSE,
        Error::Config { .. } => EXIT_INVALID,
    }
}

fn preset(name: &str) -> Scenario {
    Scenario::preset(name).expect("preset names are checked by the parser")
}

fn simulate(mut scenario: Scenario, overrides: &Overrides) -> Result<(), Error> {
    overrides.apply(&mut scenario);
    scenario.validate()?;
    let record = run(&scenario)?;
    for w in &record.warnings {
        log::warn!("{w}");
    }
    write_run(&record, &overrides.out)?;
    println!(
        "{}: {} spikes of cell {} in {} ticks, written to {}",
        scenario.name,
        record.observed_spikes().len(),
        scenario.recording.observed_cell,
        record.total_ticks,
        overrides.out.display()
    );
    Ok(())
}

fn validate(source: &Source) -> Result<(), Error> {
    let scenario = match (&source.config, &source.preset) {
        (Some(path), _) => Scenario::load(path)?,
        (None, Some(name)) => preset(name),
        (None, None) => unreachable!("clap requires one source"),
    };
    let built = scenario.build()?;
    let a = built.amplitudes;
    println!("scenario {} is valid", scenario.name);
    println!("inputs per cell: {}", a.n_inputs);
    println!("minimal PSP: {:.1} mV", a.min_psp_mv);
    println!("EPSP amplitude: {:.1} mV", a.epsp_mv);
    println!("IPSP amplitude: {:.1} mV", a.ipsp_mv);
    for w in &built.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

fn analyze(
    spikes: &Path,
    out: &Path,
    cell: usize,
    total: Option<u64>,
    window: u64,
    svg: bool,
) -> Result<(), Error> {
    if window == 0 {
        return Err(Error::config("window_ticks", "must be positive"));
    }
    let ticks = read_spikes(spikes, cell)?;
    let total = total.unwrap_or_else(|| ticks.last().map_or(0, |t| t + 1));
    if let Some(&last) = ticks.last() {
        if last >= total {
            return Err(Error::config(
                "total_ticks",
                format!("spike at tick {last} lies outside {total} ticks"),
            ));
        }
    }
    write_analysis(&ticks, total, window, svg, out)?;
    println!(
        "{} spikes of cell {cell} analysed, written to {}",
        ticks.len(),
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(source) => validate(source),
        Command::Run { config, overrides } => {
            Scenario::load(config).and_then(|s| simulate(s, overrides))
        }
        Command::Replicate {
            preset: name,
            overrides,
        } => simulate(preset(name), overrides),
        Command::Analyze {
            spikes,
            out,
            cell,
            total_ticks,
            window_ticks,
            no_svg,
        } => analyze(spikes, out, *cell, *total_ticks, *window_ticks, !no_svg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
