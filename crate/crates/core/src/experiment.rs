//! End-to-end experiment: scenario, per-radar processing, artifacts, report.
//!
//! Per receiving radar the chain is synthesis, range correlation, LOS phase
//! extraction and compensation of every remote section, then the Doppler DFT
//! of both the raw and the compensated matrix. Receivers run in parallel;
//! artifacts are written afterwards in receiver order, so outputs do not
//! depend on the thread count.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::compensation::{apply_compensation, extract_pn_vector, locate_los_bin, PnVector};
use crate::config::ExperimentConfig;
use crate::dsp::{
    doppler_dft, noise_floor, periodic_correlate, ridge_power, DopplerWindow, RangeDopplerMap,
    RangeSlowTimeMatrix,
};
use crate::error::{Error, Result};
use crate::export::{save_heatmap, write_db_csv, write_matrix_binary};
use crate::phasenoise::PsdMask;
use crate::scene::{enumerate_paths, los_to_mono_ratio, PathKind, Scenario};
use crate::txrx::{save_raw_frame, synthesize_rx, BasebandFrame};
use crate::units::{amplitude_to_db, db_to_power, power_to_db};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_LOS_NOT_FOUND: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::BadScenario(_)
        | Error::BadMask(_)
        | Error::BadCode(_)
        | Error::OddLength(_)
        | Error::IndivisibleCode { .. }
        | Error::BadBand { .. }
        | Error::BadDuration(_)
        | Error::PnDurationTooShort { .. } => EXIT_CONFIG,
        Error::LosNotFound { .. } => EXIT_LOS_NOT_FOUND,
        Error::Io { .. } | Error::Image(_) => EXIT_IO,
        _ => EXIT_OTHER,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    fn new(severity: Severity, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity,
            code,
            message: message.into(),
        }
    }
}

/// Static checks on a parsed configuration. Nothing is simulated.
fn positive(v: f64) -> bool {
    v > 0.0
}

pub fn validate(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    use Severity::*;
    let mut out = Vec::new();
    let m = cfg.nodes.len();

    let mut ids: Vec<usize> = cfg.nodes.iter().map(|n| n.id).collect();
    ids.sort_unstable();
    if ids != (1..=m).collect::<Vec<_>>() {
        out.push(Diagnostic::new(
            Error,
            "node_ids",
            format!("radar ids must be 1..={m}, got {ids:?}"),
        ));
    }

    let code_length = match cfg.load_code() {
        Ok(code) => Some(code.len()),
        Err(e) => {
            out.push(Diagnostic::new(Error, "code", e.to_string()));
            cfg.code_length()
        }
    };
    if let Some(len) = code_length {
        if m == 0 || len % (2 * m) != 0 {
            out.push(Diagnostic::new(
                Error,
                "divisibility",
                format!("code length {len} is not divisible by 2M = {}", 2 * m),
            ));
        } else {
            out.push(Diagnostic::new(
                Info,
                "sections",
                format!("{} range bins per radar section", len / (2 * m)),
            ));
        }
    }

    if cfg.waveform.bursts == 0
        || !positive(cfg.waveform.chip_s)
        || !positive(cfg.waveform.carrier_hz)
    {
        out.push(Diagnostic::new(
            Error,
            "waveform",
            "bursts, chip duration and carrier must be positive",
        ));
    }

    if cfg.pn.enabled {
        match cfg.load_mask() {
            Ok(_) => {}
            Err(e) => out.push(Diagnostic::new(Error, "mask", e.to_string())),
        }
        if let Some(len) = code_length {
            let duration = (len * cfg.waveform.bursts) as f64 * cfg.waveform.chip_s;
            let delta_f = 1.0 / duration;
            if cfg.pn.f_max_hz.is_nan() || cfg.pn.f_max_hz <= delta_f {
                out.push(Diagnostic::new(
                    Error,
                    "pn_band",
                    format!(
                        "f_max {} Hz must exceed the line spacing {delta_f} Hz",
                        cfg.pn.f_max_hz
                    ),
                ));
            } else {
                out.push(Diagnostic::new(
                    Info,
                    "pn_duration",
                    format!(
                        "PLL realization covers {duration:e} s with {} lines",
                        (cfg.pn.f_max_hz / delta_f).floor()
                    ),
                ));
            }
            let nyquist = 0.5 / cfg.waveform.chip_s;
            if cfg.pn.f_max_hz > nyquist {
                out.push(Diagnostic::new(
                    Warning,
                    "pn_alias",
                    format!(
                        "f_max {} Hz exceeds the chip-rate Nyquist {nyquist} Hz",
                        cfg.pn.f_max_hz
                    ),
                ));
            }
        }
    }

    if cfg.targets.is_empty() && cfg.pipeline.compensation {
        out.push(Diagnostic::new(
            Warning,
            "no_targets",
            "no targets; compensation still runs on the LOS returns",
        ));
    }
    if m < 2 && cfg.pipeline.compensation {
        out.push(Diagnostic::new(
            Warning,
            "single_radar",
            "compensation needs a remote radar",
        ));
    }
    for &rx in &cfg.pipeline.receivers {
        if rx == 0 || rx > m {
            out.push(Diagnostic::new(
                Error,
                "receivers",
                format!("receiver {rx} is not a radar id"),
            ));
        }
    }

    // geometry: every path must land inside its transmitter's section
    let has_errors = out.iter().any(|d| d.severity == Error);
    if !has_errors {
        let mut plain = cfg.clone();
        plain.pn.enabled = false;
        match plain.build_scenario() {
            Ok(scenario) => out.extend(section_checks(&scenario)),
            Err(e) => out.push(Diagnostic::new(Error, "scenario", e.to_string())),
        }
    }
    out
}

fn section_checks(scenario: &Scenario) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let section = scenario.section_len();
    let chip_s = scenario.waveform().chip_s;
    for rx in scenario.nodes() {
        let paths = match enumerate_paths(scenario, rx.id) {
            Ok(p) => p,
            Err(e) => {
                out.push(Diagnostic::new(Severity::Error, "geometry", e.to_string()));
                continue;
            }
        };
        for p in paths {
            let d = p.delay_bins(chip_s);
            if d >= section {
                out.push(Diagnostic::new(
                    Severity::Error,
                    "section_overflow",
                    format!(
                        "radar {}: {} path from radar {} has delay {d} bins, section holds {section}",
                        rx.id,
                        p.kind.name(),
                        p.tx_id
                    ),
                ));
            } else if p.kind == PathKind::Los {
                let bin = d + scenario.node(p.tx_id).map(|n| n.code_shift()).unwrap_or(0);
                out.push(Diagnostic::new(
                    Severity::Info,
                    "los_bin",
                    format!(
                        "radar {}: expected LOS from radar {} at bin {bin}",
                        rx.id, p.tx_id
                    ),
                ));
            }
        }
    }
    out
}

pub fn diagnostics_json(diags: &[Diagnostic]) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        ok: bool,
        diagnostics: &'a [Diagnostic],
    }
    let ok = !diags.iter().any(|d| d.severity == Severity::Error);
    serde_json::to_string_pretty(&Doc {
        ok,
        diagnostics: diags,
    })
    .expect("diagnostics serialize")
}

/// Per-path row levels before and after compensation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathMetric {
    pub kind: &'static str,
    pub tx_id: usize,
    pub target: Option<usize>,
    pub bin: usize,
    pub power_dbm: f64,
    pub ridge_pre_db: f64,
    pub ridge_post_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReceiverMetrics {
    pub rx_id: usize,
    /// LOS bin located per remote radar, `(tx_id, bin)`.
    pub los_bins: Vec<(usize, usize)>,
    pub noise_floor_pre_db: f64,
    pub noise_floor_post_db: Option<f64>,
    pub paths: Vec<PathMetric>,
    /// Simulated LOS/mono power ratio from the path amplitudes.
    pub simulated_los_to_mono_db: Option<f64>,
    /// Closed-form LOS/mono ratio for the first target and first remote radar.
    pub link_budget_los_to_mono_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub master_seed: u64,
    pub pn_enabled: bool,
    pub pn_mode: &'static str,
    pub compensation: bool,
    pub window: &'static str,
    pub code_length: usize,
    pub bursts: usize,
    pub radars: usize,
    pub receivers: Vec<ReceiverMetrics>,
}

impl ReceiverMetrics {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialize")
    }
}

/// Everything computed for one receiving radar.
#[derive(Debug, Clone)]
pub struct ReceiverOutput {
    pub frame: BasebandFrame,
    pub rst: RangeSlowTimeMatrix,
    pub compensated: Option<RangeSlowTimeMatrix>,
    pub pre: RangeDopplerMap,
    pub post: Option<RangeDopplerMap>,
    pub pn_vectors: Vec<PnVector>,
    pub metrics: ReceiverMetrics,
}

/// Runs the chain for one receiver. With PN disabled the extracted phase is
/// identically zero, so the compensation step is the identity.
pub fn process_receiver(
    scenario: &Scenario,
    rx_id: usize,
    window: DopplerWindow,
    compensate: bool,
) -> Result<ReceiverOutput> {
    let frame = synthesize_rx(scenario, rx_id)?;
    let m = scenario.radar_count();
    let rst = periodic_correlate(&frame, scenario.code(), m)?;
    let pre = doppler_dft(&rst, window);

    let mut pn_vectors = Vec::new();
    let mut los_bins = Vec::new();
    let compensated = if compensate && m > 1 {
        let mut out = rst.clone();
        for tx in scenario.nodes().iter().filter(|n| n.id != rx_id) {
            let section = rst.section(tx.id - 1);
            let bin = locate_los_bin(&rst, section.clone())?;
            los_bins.push((tx.id, bin));
            if scenario.pn_enabled {
                let xi = extract_pn_vector(&rst, bin, rx_id, tx.id)?;
                out = apply_compensation(&out, &xi, section)?;
                pn_vectors.push(xi);
            } else {
                let mut xi = PnVector::zeros(rst.bursts());
                xi.source_bin = bin;
                xi.rx_id = rx_id;
                xi.tx_id = tx.id;
                pn_vectors.push(xi);
            }
        }
        Some(out)
    } else {
        None
    };
    let post = compensated.as_ref().map(|c| doppler_dft(c, window));

    let paths = enumerate_paths(scenario, rx_id)?;
    let chip_s = scenario.waveform().chip_s;
    let len = scenario.code_length();
    let path_bins: Vec<usize> = paths
        .iter()
        .map(|p| {
            (p.delay_bins(chip_s) + scenario.node(p.tx_id).map(|n| n.code_shift()).unwrap_or(0))
                % len
        })
        .collect();
    let rows = rst.range_bins();
    let exclusion: Vec<(usize, usize)> = path_bins
        .iter()
        .filter(|&&b| b < rows)
        .map(|&b| (b, 1))
        .collect();

    let mut path_metrics = Vec::new();
    for (p, &bin) in paths.iter().zip(&path_bins) {
        if bin >= rows {
            continue;
        }
        path_metrics.push(PathMetric {
            kind: p.kind.name(),
            tx_id: p.tx_id,
            target: p.target,
            bin,
            power_dbm: p.power_dbm,
            ridge_pre_db: ridge_power(&pre, bin)?,
            ridge_post_db: post.as_ref().map(|m| ridge_power(m, bin)).transpose()?,
        });
    }

    let mono = paths.iter().find(|p| p.kind == PathKind::Mono);
    let los = paths.iter().find(|p| p.kind == PathKind::Los);
    let simulated = match (mono, los) {
        (Some(a), Some(b)) => Some(amplitude_to_db(b.amplitude / a.amplitude)),
        _ => None,
    };
    let link_budget = link_budget_ratio(scenario, rx_id)?;

    let metrics = ReceiverMetrics {
        rx_id,
        los_bins,
        noise_floor_pre_db: noise_floor(&pre, &exclusion)?,
        noise_floor_post_db: post
            .as_ref()
            .map(|m| noise_floor(m, &exclusion))
            .transpose()?,
        paths: path_metrics,
        simulated_los_to_mono_db: simulated,
        link_budget_los_to_mono_db: link_budget,
    };
    Ok(ReceiverOutput {
        frame,
        rst,
        compensated,
        pre,
        post,
        pn_vectors,
        metrics,
    })
}

/// Closed-form LOS/mono ratio at `rx_id` for the first target and the first
/// remote radar, using the receiver's boresight and 90° gains.
pub fn link_budget_ratio(scenario: &Scenario, rx_id: usize) -> Result<Option<f64>> {
    let rx = scenario.node(rx_id)?;
    let (Some(target), Some(remote)) = (
        scenario.targets().first(),
        scenario.nodes().iter().find(|n| n.id != rx_id),
    ) else {
        return Ok(None);
    };
    let ratio = los_to_mono_ratio(
        db_to_power(rx.antenna.at_90_db()),
        db_to_power(rx.antenna.boresight_db()),
        (target.position - rx.position).norm(),
        (remote.position - rx.position).norm(),
        db_to_power(target.rcs_dbsm),
    )?;
    Ok(Some(ratio))
}

/// Builds the scenario and processes every configured receiver on a pool of
/// `threads` workers (`None` uses the global pool).
pub fn simulate(
    cfg: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<(ExperimentReport, Vec<ReceiverOutput>)> {
    let scenario = cfg.build_scenario()?;
    let receivers = cfg.receivers();
    for &rx in &receivers {
        scenario.node(rx)?;
    }
    let work = || -> Result<Vec<ReceiverOutput>> {
        receivers
            .par_iter()
            .map(|&rx| {
                process_receiver(
                    &scenario,
                    rx,
                    cfg.pipeline.window,
                    cfg.pipeline.compensation,
                )
            })
            .collect()
    };
    let outputs = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let report = ExperimentReport {
        master_seed: cfg.master_seed,
        pn_enabled: cfg.pn.enabled,
        pn_mode: cfg.pn.mode.name(),
        compensation: cfg.pipeline.compensation,
        window: cfg.pipeline.window.name(),
        code_length: scenario.code_length(),
        bursts: scenario.waveform().bursts,
        radars: scenario.radar_count(),
        receivers: outputs.iter().map(|o| o.metrics.clone()).collect(),
    };
    Ok((report, outputs))
}

/// Simulates and writes all artifacts into `cfg.outputs.dir`.
pub fn run(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentReport> {
    let (report, outputs) = simulate(cfg, threads)?;
    let dir = &cfg.outputs.dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for out in &outputs {
        write_receiver(cfg, dir, out)?;
    }
    let path = dir.join("metrics.json");
    fs::write(&path, report.to_json() + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(report)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_with(
    path: PathBuf,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let mut w = create(&path)?;
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&path, e))
}

fn write_map(cfg: &ExperimentConfig, dir: &Path, stem: &str, map: &RangeDopplerMap) -> Result<()> {
    if cfg.outputs.csv {
        write_with(dir.join(format!("{stem}.csv")), |w| {
            write_db_csv(w, &map.values)
        })?;
    }
    if cfg.outputs.binary {
        write_with(dir.join(format!("{stem}.bin")), |w| {
            write_matrix_binary(w, &map.values)
        })?;
    }
    if cfg.outputs.heatmap {
        save_heatmap(&dir.join(format!("{stem}.png")), &map.values)?;
    }
    Ok(())
}

fn write_receiver(cfg: &ExperimentConfig, dir: &Path, out: &ReceiverOutput) -> Result<()> {
    let rx = out.metrics.rx_id;
    write_with(dir.join(format!("rx{rx}_range_profile.csv")), |w| {
        write_range_profile(w, &out.pre)
    })?;
    write_map(cfg, dir, &format!("rx{rx}_rd_pre"), &out.pre)?;
    if let Some(post) = &out.post {
        write_map(cfg, dir, &format!("rx{rx}_rd_post"), post)?;
    }
    if cfg.outputs.pn_vector {
        for xi in &out.pn_vectors {
            write_with(dir.join(format!("rx{rx}_xi_from{}.csv", xi.tx_id)), |w| {
                xi.write_csv(w)
            })?;
        }
    }
    if cfg.outputs.raw_frames {
        save_raw_frame(&dir.join(format!("rx{rx}_raw.bin")), &out.frame)?;
    }
    Ok(())
}

/// Zero-Doppler slice of a map, in dB relative to the map peak.
pub fn write_range_profile<W: Write>(mut w: W, map: &RangeDopplerMap) -> std::io::Result<()> {
    let peak = map.values.peak_power();
    let dc = map.dc_bin();
    writeln!(w, "bin,delay_ns,level_db")?;
    for p in 0..map.values.rows() {
        let v = map.values.get(p, dc).norm_sqr();
        let db = if peak > 0.0 {
            power_to_db(v / peak)
        } else {
            power_to_db(0.0)
        };
        writeln!(w, "{p},{:.3},{db:.4}", p as f64 * map.chip_s * 1e9)?;
    }
    Ok(())
}

/// Mask used when no file is configured, as text.
pub fn default_mask_text() -> String {
    PsdMask::default_pll().format()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn small_config(extra: &str) -> ExperimentConfig {
        let text = format!(
            "
[waveform]
code_length = 64
bursts = 16

[node]
id = 1
x_m = -0.5
y_m = 0
tx_power_dbm = 10
gain_boresight_db = 10
gain_90_db = -7

[node]
id = 2
x_m = 0.5
y_m = 0
tx_power_dbm = 10
gain_boresight_db = 10
gain_90_db = -7

[target]
x_m = 0
y_m = 2
rcs_dbsm = 10

[seeds]
master = 11
{extra}"
        );
        ExperimentConfig::parse(&text, Path::new("/nonexistent")).unwrap()
    }

    #[test]
    fn exit_codes_are_distinct() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(
            exit_code(&Error::LosNotFound { start: 0, end: 1 }),
            EXIT_LOS_NOT_FOUND
        );
        assert_eq!(
            exit_code(&Error::io("x", std::io::Error::other("boom"))),
            EXIT_IO
        );
        assert_eq!(exit_code(&Error::WindowedMap), EXIT_OTHER);
    }

    #[test]
    fn validate_reference_like_config() {
        let diags = validate(&small_config(""));
        assert!(
            diags.iter().all(|d| d.severity != Severity::Error),
            "{diags:?}"
        );
        assert!(diags
            .iter()
            .any(|d| d.code == "los_bin" && d.message.contains("bin 19")));
        let json = diagnostics_json(&diags);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["ok"], true);
    }

    #[test]
    fn validate_flags_problems() {
        let mut cfg = small_config("");
        cfg.code = crate::config::CodeSpec::P3 { length: 66 };
        assert!(validate(&cfg).iter().any(|d| d.code == "divisibility"));

        let mut cfg = small_config("");
        cfg.targets.clear();
        assert!(validate(&cfg)
            .iter()
            .any(|d| d.code == "no_targets" && d.severity == Severity::Warning));

        let mut cfg = small_config("");
        cfg.targets[0].position.y = 40.0;
        assert!(validate(&cfg).iter().any(|d| d.code == "section_overflow"));

        let mut cfg = small_config("");
        cfg.pn.mask_file = Some("/nonexistent/mask.txt".into());
        let diags = validate(&cfg);
        assert!(diags.iter().any(|d| d.code == "mask"));
        let v: serde_json::Value = serde_json::from_str(&diagnostics_json(&diags)).unwrap();
        assert_eq!(v["ok"], false);
    }

    #[test]
    fn no_pn_makes_compensation_identity() {
        let mut cfg = small_config("");
        cfg.pn.enabled = false;
        let (report, outputs) = simulate(&cfg, Some(1)).unwrap();
        for out in &outputs {
            assert_eq!(out.pre, out.post.clone().unwrap());
        }
        assert_eq!(report.receivers[0].los_bins, vec![(2, 16 + 3)]);
    }

    #[test]
    fn pn_run_reports_ridges_and_link_budget() {
        let (report, outputs) = simulate(&small_config(""), None).unwrap();
        assert_eq!(outputs.len(), 2);
        let rx1 = &report.receivers[0];
        let lb = rx1.link_budget_los_to_mono_db.unwrap();
        let sim = rx1.simulated_los_to_mono_db.unwrap();
        assert!(lb.is_finite() && sim.is_finite());
        let los = rx1.paths.iter().find(|p| p.kind == "los").unwrap();
        assert_eq!(los.bin, 19);
        assert!(los.ridge_post_db.unwrap() < los.ridge_pre_db);
    }
}
