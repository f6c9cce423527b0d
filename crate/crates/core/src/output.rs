//! Run directory layout: manifest, CSV traces and the return-map SVG.
//!
//! All numbers are written with fixed decimal places, independent of locale.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::analysis::{self, ReturnMap};
use crate::clock::TICK_MS;
use crate::error::{Error, Result};
use crate::harness::{compare, RecordSet};

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const SPIKES_FILE: &str = "spikes.csv";
pub const ISI_FILE: &str = "isi.csv";
pub const POINCARE_FILE: &str = "poincare.csv";
pub const RATES_FILE: &str = "rates.csv";
pub const MEMORY_FILE: &str = "memory.csv";
pub const VBODY_FILE: &str = "vbody.csv";
pub const SVG_FILE: &str = "poincare.svg";
pub const SUMMARY_FILE: &str = "summary.toml";

fn mv(x: f64) -> String {
    format!("{x:.6}")
}

fn ms(x: f64) -> String {
    format!("{x:.1}")
}

fn hz(x: f64) -> String {
    format!("{x:.3}")
}

struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl CsvOut {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let writer = csv::Writer::from_path(&path).map_err(|source| Error::Csv {
            path: path.clone(),
            source,
        })?;
        let mut out = Self { path, writer };
        out.row(header)?;
        Ok(out)
    }

    fn row<I, T>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .map_err(|source| Error::Csv {
                path: self.path.clone(),
                source,
            })
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Writes the complete run directory for `record`.
pub fn write_run(record: &RecordSet, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_manifest(record, dir)?;

    let mut spikes = CsvOut::create(dir, SPIKES_FILE, &["tick", "cell_id"])?;
    let mut all: Vec<(u64, usize)> = record
        .spikes
        .iter()
        .enumerate()
        .flat_map(|(id, ticks)| ticks.iter().map(move |&t| (t, id)))
        .collect();
    all.sort_unstable();
    for (t, id) in all {
        spikes.row([t.to_string(), id.to_string()])?;
    }
    spikes.finish()?;

    let mut vbody = CsvOut::create(dir, VBODY_FILE, &["tick", "v_body_mv"])?;
    for (t, v) in record.trace.vbody.iter().enumerate() {
        vbody.row([t.to_string(), mv(*v)])?;
    }
    vbody.finish()?;

    let mut memory = CsvOut::create(dir, MEMORY_FILE, &["tick", "input", "memory"])?;
    for t in 0..record.total_ticks as usize {
        for (input, m) in record.trace.memory.iter().enumerate() {
            memory.row([t.to_string(), input.to_string(), mv(m[t])])?;
        }
    }
    memory.finish()?;

    write_analysis(
        record.observed_spikes(),
        record.total_ticks,
        record.scenario.recording.rate_window_ticks,
        record.scenario.recording.svg,
        dir,
    )?;

    if let Some((pre, post)) = record.scenario.compare_windows() {
        if pre.0 < pre.1 && post.0 < post.1 {
            write_summary(record, pre, post, dir)?;
        }
    }
    Ok(())
}

/// Writes `isi.csv`, `poincare.csv`, `rates.csv` and optionally the SVG for a
/// single spike train.
pub fn write_analysis(
    spike_ticks: &[u64],
    total_ticks: u64,
    window_ticks: u64,
    svg: bool,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let seq = analysis::isi(spike_ticks);

    let mut isi = CsvOut::create(dir, ISI_FILE, &["n", "interval_ticks", "interval_ms"])?;
    for (n, &i) in seq.intervals.iter().enumerate() {
        isi.row([n.to_string(), i.to_string(), ms(i as f64 * TICK_MS)])?;
    }
    isi.finish()?;

    let map = analysis::return_map(&seq);
    let mut poincare = CsvOut::create(dir, POINCARE_FILE, &["I_n_ms", "I_n1_ms"])?;
    for &(a, b) in &map.points {
        poincare.row([ms(a), ms(b)])?;
    }
    poincare.finish()?;

    let mut rates = CsvOut::create(dir, RATES_FILE, &["start_tick", "end_tick", "rate_hz"])?;
    for (k, r) in analysis::rate(spike_ticks, window_ticks, total_ticks)
        .into_iter()
        .enumerate()
    {
        let start = k as u64 * window_ticks;
        let end = (start + window_ticks).min(total_ticks);
        rates.row([start.to_string(), end.to_string(), hz(r)])?;
    }
    rates.finish()?;

    if svg {
        let path = dir.join(SVG_FILE);
        fs::write(&path, return_map_svg(&map)).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn write_manifest(record: &RecordSet, dir: &Path) -> Result<()> {
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let a = &record.amplitudes;
    let mut text = String::new();
    writeln!(text, "[run]").unwrap();
    writeln!(text, "code_version = \"{}\"", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(text, "created_unix_s = {created}").unwrap();
    writeln!(text, "seed = {}", record.scenario.seed).unwrap();
    writeln!(text, "n_inputs = {}", a.n_inputs).unwrap();
    writeln!(text, "min_psp_mv = {}", mv(a.min_psp_mv)).unwrap();
    writeln!(text, "epsp_amplitude_mv = {}", mv(a.epsp_mv)).unwrap();
    writeln!(text, "ipsp_amplitude_mv = {}", mv(a.ipsp_mv)).unwrap();
    let warnings: Vec<String> = record.warnings.iter().map(|w| format!("{w:?}")).collect();
    writeln!(text, "warnings = [{}]", warnings.join(", ")).unwrap();
    writeln!(text).unwrap();
    let scenario = toml::to_string(&ScenarioWrapper {
        scenario: &record.scenario,
    })
    .expect("scenario serializes");
    text.push_str(&scenario);
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

#[derive(serde::Serialize)]
struct ScenarioWrapper<'a> {
    scenario: &'a crate::scenario::Scenario,
}

fn write_summary(record: &RecordSet, pre: (u64, u64), post: (u64, u64), dir: &Path) -> Result<()> {
    let c = compare(pre, post, record);
    let mut text = String::new();
    for (name, w) in [("pre", &c.pre), ("post", &c.post)] {
        writeln!(text, "[{name}]").unwrap();
        writeln!(text, "start_tick = {}", w.start_tick).unwrap();
        writeln!(text, "end_tick = {}", w.end_tick).unwrap();
        writeln!(
            text,
            "duration_ms = {}",
            ms((w.end_tick - w.start_tick) as f64 * TICK_MS)
        )
        .unwrap();
        writeln!(text, "spikes = {}", w.spikes).unwrap();
        writeln!(text, "rate_hz = {}", hz(w.rate_hz)).unwrap();
        let mem: Vec<String> = w.memory.iter().map(|&m| mv(m)).collect();
        writeln!(text, "memory = [{}]", mem.join(", ")).unwrap();
        writeln!(text).unwrap();
    }
    let delta: Vec<String> = c.memory_delta().iter().map(|&m| mv(m)).collect();
    writeln!(text, "memory_delta = [{}]", delta.join(", ")).unwrap();
    let path = dir.join(SUMMARY_FILE);
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

/// Reads a `spikes.csv` and returns the ticks of `cell`, sorted.
pub fn read_spikes(path: &Path, cell: usize) -> Result<Vec<u64>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut ticks = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let parse = |k: usize| -> Result<u64> {
            row.get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    message: format!("row {}: expected `tick,cell_id` integers", line + 2),
                })
        };
        let (tick, id) = (parse(0)?, parse(1)?);
        if id as usize == cell {
            ticks.push(tick);
        }
    }
    ticks.sort_unstable();
    ticks.dedup();
    Ok(ticks)
}

/// Scatter plot of the return map on a fixed 480×480 canvas with both axes
/// spanning `[0, axis_max]` ms.
pub fn return_map_svg(map: &ReturnMap) -> String {
    const SIZE: f64 = 480.0;
    const MARGIN: f64 = 48.0;
    let data_max = map
        .points
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .fold(0.0f64, f64::max);
    let axis_max = ((data_max / 10.0).ceil() * 10.0).max(10.0);
    let plot = SIZE - 2.0 * MARGIN;
    let x = |v: f64| MARGIN + v / axis_max * plot;
    let y = |v: f64| SIZE - MARGIN - v / axis_max * plot;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<path d="M {l} {t} L {l} {b} L {r} {b}" fill="none" stroke="black"/>"#,
        l = MARGIN,
        t = MARGIN,
        b = SIZE - MARGIN,
        r = SIZE - MARGIN
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">I(n) [ms]</text>"#,
        SIZE / 2.0,
        SIZE - 12.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="14" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {})">I(n+1) [ms]</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    )
    .unwrap();
    for (v, anchor) in [(0.0, "start"), (axis_max, "end")] {
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="{anchor}">{}</text>"#,
            x(v),
            SIZE - MARGIN + 14.0,
            ms(v)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#,
        MARGIN - 4.0,
        y(axis_max) + 4.0,
        ms(axis_max)
    )
    .unwrap();
    for &(a, b) in &map.points {
        writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="black" fill-opacity="0.6"/>"#,
            x(a),
            y(b)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
