//! Experiment configuration.
//!
//! Line-oriented `key = value` pairs under `[section]` headers; `#` starts a
//! comment. `[node]` and `[target]` may repeat. Key suffixes carry the unit
//! (`_ghz`, `_ns`, `_m`, `_dbm`, ...) and are converted to SI here, so the
//! rest of the crate never sees them.
//!
//! ```text
//! [waveform]
//! carrier_ghz = 79
//! chip_ns = 1
//! bursts = 256
//! code = p3            # p3 | apas | file
//! code_length = 504
//!
//! [pn]
//! enabled = true
//! mode = exact         # exact | linearized
//! mask_file = default_pll.mask
//! f_max_mhz = 100
//!
//! [seeds]
//! master = 2024
//!
//! [node]
//! id = 1
//! x_m = -0.5
//! y_m = 0
//! boresight_deg = 90
//! tx_power_dbm = 10
//! gain_boresight_db = 10
//! gain_90_db = -7
//!
//! [target]
//! x_m = 0
//! y_m = 4.975
//! rcs_dbsm = 10
//!
//! [pipeline]
//! compensation = true
//! window = none
//!
//! [outputs]
//! dir = out
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::codes::{generate_p3, read_code_file, search_apas, CodeSequence};
use crate::dsp::DopplerWindow;
use crate::error::{Error, Result};
use crate::phasenoise::{PnMode, PsdMask};
use crate::scene::{AntennaPattern, RadarNode, Scenario, Target, Vec2, Waveform};

#[derive(Debug, Clone, PartialEq)]
pub enum CodeSpec {
    P3 {
        length: usize,
    },
    /// First canonical sequence of the exhaustive search.
    Apas {
        length: usize,
    },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: usize,
    pub position: Vec2,
    pub boresight_deg: f64,
    pub tx_power_dbm: f64,
    pub antenna: AntennaPattern,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PnSettings {
    pub enabled: bool,
    pub mode: PnMode,
    /// `None` selects [`PsdMask::default_pll`].
    pub mask_file: Option<PathBuf>,
    pub f_max_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSettings {
    pub compensation: bool,
    pub window: DopplerWindow,
    pub thermal_noise_dbm: Option<f64>,
    /// Receiving radars to process; empty means all.
    pub receivers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub csv: bool,
    pub binary: bool,
    pub heatmap: bool,
    pub raw_frames: bool,
    pub pn_vector: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Directory that relative paths resolve against.
    pub base_dir: PathBuf,
    pub waveform: Waveform,
    pub code: CodeSpec,
    pub nodes: Vec<NodeSpec>,
    pub targets: Vec<Target>,
    pub pn: PnSettings,
    pub master_seed: u64,
    pub noise_seed: u64,
    pub pipeline: PipelineSettings,
    pub outputs: OutputSettings,
}

struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, (String, usize)>,
}

impl Section {
    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::Config(format!("[{}] at line {}: {msg}", self.name, self.line))
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("line {line}: cannot parse {key} = {v}"))),
        }
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.parse(key)?;
        match v {
            Some(x) if !x.is_finite() => Err(self.err(format!("{key} must be finite"))),
            other => Ok(other),
        }
    }

    fn required(&mut self, key: &str) -> Result<f64> {
        self.number(key)?
            .ok_or_else(|| self.err(format!("missing {key}")))
    }

    fn flag(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key) {
            None => Ok(default),
            Some((v, line)) => match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(Error::Config(format!(
                    "line {line}: {key} expects a boolean, got {v}"
                ))),
            },
        }
    }

    fn finish(self) -> Result<()> {
        match self.entries.iter().min_by_key(|(_, (_, line))| *line) {
            Some((key, (_, line))) => Err(Error::Config(format!(
                "line {line}: unknown key {key} in [{}]",
                self.name
            ))),
            None => Ok(()),
        }
    }
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            sections.push(Section {
                name: name.trim().to_ascii_lowercase(),
                line: line_no,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {line_no}: expected key = value")))?;
        let section = sections
            .last_mut()
            .ok_or_else(|| Error::Config(format!("line {line_no}: key outside any [section]")))?;
        let key = key.trim().to_ascii_lowercase();
        if section.entries.contains_key(&key) {
            return Err(Error::Config(format!(
                "line {line_no}: duplicate key {key}"
            )));
        }
        section
            .entries
            .insert(key, (value.trim().to_string(), line_no));
    }
    Ok(sections)
}

fn parse_pattern(spec: &str) -> Result<AntennaPattern> {
    let points = spec
        .split(',')
        .map(|pair| {
            let (a, g) = pair.split_once(':').ok_or_else(|| {
                Error::Config(format!("pattern point {pair:?} is not angle:gain"))
            })?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number in pattern point {pair:?}")))
            };
            Ok((parse(a)?, parse(g)?))
        })
        .collect::<Result<Vec<_>>>()?;
    AntennaPattern::tabulated(points)
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut waveform = Waveform::reference();
        let mut code = CodeSpec::P3 { length: 504 };
        let mut nodes = Vec::new();
        let mut targets = Vec::new();
        let mut pn = PnSettings {
            enabled: true,
            mode: PnMode::Exact,
            mask_file: None,
            f_max_hz: 100e6,
        };
        let mut master_seed = 0u64;
        let mut noise_seed = 0u64;
        let mut pipeline = PipelineSettings {
            compensation: true,
            window: DopplerWindow::None,
            thermal_noise_dbm: None,
            receivers: Vec::new(),
        };
        let mut outputs = OutputSettings {
            dir: PathBuf::from("out"),
            csv: true,
            binary: true,
            heatmap: true,
            raw_frames: false,
            pn_vector: true,
        };
        let mut seen = Vec::new();

        for mut s in split_sections(text)? {
            let single = !matches!(s.name.as_str(), "node" | "target");
            if single && seen.contains(&s.name) {
                return Err(s.err("section given twice"));
            }
            seen.push(s.name.clone());
            match s.name.as_str() {
                "waveform" => {
                    if let Some(g) = s.number("carrier_ghz")? {
                        waveform.carrier_hz = g * 1e9;
                    }
                    if let Some(ns) = s.number("chip_ns")? {
                        waveform.chip_s = ns * 1e-9;
                    }
                    if let Some(n) = s.parse("bursts")? {
                        waveform.bursts = n;
                    }
                    let kind = s.take("code").map(|(v, _)| v.to_ascii_lowercase());
                    let length: Option<usize> = s.parse("code_length")?;
                    let file = s.take("code_file").map(|(v, _)| base_dir.join(v));
                    code = match (kind.as_deref(), file) {
                        (None | Some("p3"), None) => CodeSpec::P3 {
                            length: length.unwrap_or(504),
                        },
                        (Some("apas"), None) => CodeSpec::Apas {
                            length: length.ok_or_else(|| s.err("apas needs code_length"))?,
                        },
                        (None | Some("file"), Some(path)) => CodeSpec::File(path),
                        (Some("file"), None) => return Err(s.err("code = file needs code_file")),
                        (Some(other), _) => return Err(s.err(format!("unknown code {other}"))),
                    };
                }
                "pn" => {
                    pn.enabled = s.flag("enabled", pn.enabled)?;
                    if let Some((m, line)) = s.take("mode") {
                        pn.mode = match m.to_ascii_lowercase().as_str() {
                            "exact" => PnMode::Exact,
                            "linearized" | "linear" => PnMode::Linearized,
                            _ => {
                                return Err(Error::Config(format!(
                                    "line {line}: unknown pn mode {m}"
                                )))
                            }
                        };
                    }
                    pn.mask_file = s.take("mask_file").map(|(v, _)| base_dir.join(v));
                    if let Some(f) = s.number("f_max_mhz")? {
                        pn.f_max_hz = f * 1e6;
                    }
                }
                "seeds" => {
                    if let Some(v) = s.parse("master")? {
                        master_seed = v;
                    }
                    if let Some(v) = s.parse("noise")? {
                        noise_seed = v;
                    }
                }
                "node" => {
                    let id = s.parse::<usize>("id")?.ok_or_else(|| s.err("missing id"))?;
                    let position = Vec2::new(s.required("x_m")?, s.required("y_m")?);
                    let boresight_deg = s.number("boresight_deg")?.unwrap_or(90.0);
                    let tx_power_dbm = s.required("tx_power_dbm")?;
                    let antenna = match s.take("pattern_db") {
                        Some((spec, _)) => parse_pattern(&spec)?,
                        None => AntennaPattern::log_linear(
                            s.required("gain_boresight_db")?,
                            s.required("gain_90_db")?,
                        )?,
                    };
                    nodes.push(NodeSpec {
                        id,
                        position,
                        boresight_deg,
                        tx_power_dbm,
                        antenna,
                    });
                }
                "target" => {
                    targets.push(Target {
                        position: Vec2::new(s.required("x_m")?, s.required("y_m")?),
                        velocity: Vec2::new(
                            s.number("vx_mps")?.unwrap_or(0.0),
                            s.number("vy_mps")?.unwrap_or(0.0),
                        ),
                        rcs_dbsm: s.required("rcs_dbsm")?,
                    });
                }
                "pipeline" => {
                    pipeline.compensation = s.flag("compensation", pipeline.compensation)?;
                    if let Some((w, line)) = s.take("window") {
                        pipeline.window = parse_window(&w).ok_or_else(|| {
                            Error::Config(format!("line {line}: unknown window {w}"))
                        })?;
                    }
                    pipeline.thermal_noise_dbm = s.number("thermal_noise_dbm")?;
                    if let Some((list, line)) = s.take("receivers") {
                        if list.trim() != "all" {
                            pipeline.receivers = list
                                .split(',')
                                .map(|v| v.trim().parse())
                                .collect::<std::result::Result<_, _>>()
                                .map_err(|_| {
                                    Error::Config(format!("line {line}: bad receivers list"))
                                })?;
                        }
                    }
                }
                "outputs" => {
                    if let Some((d, _)) = s.take("dir") {
                        outputs.dir = base_dir.join(d);
                    } else {
                        outputs.dir = base_dir.join(&outputs.dir);
                    }
                    outputs.csv = s.flag("csv", outputs.csv)?;
                    outputs.binary = s.flag("binary", outputs.binary)?;
                    outputs.heatmap = s.flag("heatmap", outputs.heatmap)?;
                    outputs.raw_frames = s.flag("raw_frames", outputs.raw_frames)?;
                    outputs.pn_vector = s.flag("pn_vector", outputs.pn_vector)?;
                }
                other => return Err(s.err(format!("unknown section {other}"))),
            }
            s.finish()?;
        }
        if !seen.iter().any(|n| n == "outputs") {
            outputs.dir = base_dir.join(&outputs.dir);
        }
        if nodes.is_empty() {
            return Err(Error::Config("no [node] sections".into()));
        }
        Ok(ExperimentConfig {
            base_dir: base_dir.to_path_buf(),
            waveform,
            code,
            nodes,
            targets,
            pn,
            master_seed,
            noise_seed,
            pipeline,
            outputs,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn load_code(&self) -> Result<CodeSequence> {
        match &self.code {
            CodeSpec::P3 { length } => Ok(generate_p3(*length)),
            CodeSpec::Apas { length } => {
                search_apas(*length)?.into_iter().next().ok_or_else(|| {
                    Error::BadCode(format!("no almost perfect sequence of length {length}"))
                })
            }
            CodeSpec::File(path) => read_code_file(path),
        }
    }

    /// Length of the configured code without generating it, when known.
    pub fn code_length(&self) -> Option<usize> {
        match &self.code {
            CodeSpec::P3 { length } | CodeSpec::Apas { length } => Some(*length),
            CodeSpec::File(_) => None,
        }
    }

    pub fn load_mask(&self) -> Result<PsdMask> {
        match &self.pn.mask_file {
            Some(path) => PsdMask::read(path),
            None => Ok(PsdMask::default_pll()),
        }
    }

    /// Builds the scenario, drawing PLL realizations when PN is enabled.
    pub fn build_scenario(&self) -> Result<Scenario> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let b = n.boresight_deg.to_radians();
                RadarNode::new(
                    n.id,
                    n.position,
                    Vec2::new(b.cos(), b.sin()),
                    n.tx_power_dbm,
                    n.antenna.clone(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let mut scenario = Scenario::new(
            nodes,
            self.targets.clone(),
            self.waveform,
            self.load_code()?,
        )?;
        scenario.pn_mode = self.pn.mode;
        scenario.thermal_noise_dbm = self.pipeline.thermal_noise_dbm;
        scenario.noise_seed = self.noise_seed;
        if self.pn.enabled {
            scenario.attach_phase_noise(&self.load_mask()?, self.pn.f_max_hz, self.master_seed)?;
        }
        Ok(scenario)
    }

    /// Receivers to process, ascending.
    pub fn receivers(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = if self.pipeline.receivers.is_empty() {
            self.nodes.iter().map(|n| n.id).collect()
        } else {
            self.pipeline.receivers.clone()
        };
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

pub fn parse_window(name: &str) -> Option<DopplerWindow> {
    match name.trim().to_ascii_lowercase().as_str() {
        "none" | "rect" | "rectangular" => Some(DopplerWindow::None),
        "hann" | "hanning" => Some(DopplerWindow::Hann),
        _ => None,
    }
}
