//! Python bindings for the simulator.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pmcw_core::codes::{self, CodeFamily, CodeSequence};
use pmcw_core::compensation;
use pmcw_core::config::{parse_window, ExperimentConfig};
use pmcw_core::dsp::RangeDopplerMap;
use pmcw_core::experiment;
use pmcw_core::phasenoise::{self, PhaseNoiseProcess, PsdMask, PsdWindow};
use pmcw_core::scene;
use pmcw_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Image(_) => PyIOError::new_err(e.to_string()),
        Error::LosNotFound { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn sequence(chips: Vec<Complex64>) -> PyResult<CodeSequence> {
    CodeSequence::new(chips, CodeFamily::Imported).map_err(py_err)
}

/// P3 polyphase code of the given length.
#[pyfunction]
fn generate_p3(length: usize) -> PyResult<Vec<Complex64>> {
    if length == 0 {
        return Err(PyValueError::new_err("length must be positive"));
    }
    Ok(codes::generate_p3(length).chips().to_vec())
}

/// All almost perfect binary sequences of `length`, one per class, as ±1.
#[pyfunction]
fn search_apas(length: usize) -> PyResult<Vec<Vec<i8>>> {
    let found = codes::search_apas(length).map_err(py_err)?;
    Ok(found
        .iter()
        .map(|s| {
            s.chips()
                .iter()
                .map(|c| if c.re > 0.0 { 1 } else { -1 })
                .collect()
        })
        .collect())
}

/// `(is_almost_perfect, max_sidelobe)` for a binary chip sequence.
#[pyfunction]
#[pyo3(signature = (chips, tolerance=1e-9))]
fn verify_almost_perfect(chips: Vec<Complex64>, tolerance: f64) -> PyResult<(bool, f64)> {
    let report = codes::verify_almost_perfect(&sequence(chips)?, tolerance).map_err(py_err)?;
    Ok((report.is_almost_perfect, report.max_sidelobe))
}

#[pyfunction]
fn periodic_autocorrelation(chips: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    Ok(codes::periodic_autocorrelation(&sequence(chips)?))
}

/// One PLL phase-noise realization.
#[pyclass(name = "PhaseNoise", frozen)]
struct PyPhaseNoise {
    inner: PhaseNoiseProcess,
}

#[pymethods]
impl PyPhaseNoise {
    /// Draws a realization over `duration` seconds. `mask` is a list of
    /// `(freq_hz, dbc_per_hz)` points; the built-in PLL mask when omitted.
    #[new]
    #[pyo3(signature = (duration, f_max=100e6, seed=0, mask=None))]
    fn new(duration: f64, f_max: f64, seed: u64, mask: Option<Vec<(f64, f64)>>) -> PyResult<Self> {
        let mask = match mask {
            Some(points) => PsdMask::new(points).map_err(py_err)?,
            None => PsdMask::default_pll(),
        };
        let inner = phasenoise::synthesize(&mask, duration, f_max, seed).map_err(py_err)?;
        Ok(PyPhaseNoise { inner })
    }

    /// Single cosine line `amplitude·cos(2π·harmonic/duration·t + phase)`.
    #[staticmethod]
    fn single_line(duration: f64, harmonic: usize, amplitude: f64, phase: f64) -> PyResult<Self> {
        let line = phasenoise::SpectralLine {
            harmonic,
            amplitude,
            phase,
        };
        let inner = PhaseNoiseProcess::from_lines(1.0 / duration, vec![line]).map_err(py_err)?;
        Ok(PyPhaseNoise { inner })
    }

    fn evaluate(&self, times: Vec<f64>) -> Vec<f64> {
        self.inner.evaluate(&times)
    }

    fn evaluate_uniform(&self, t0: f64, dt: f64, n: usize) -> Vec<f64> {
        self.inner.evaluate_uniform(t0, dt, n)
    }

    #[getter]
    fn variance(&self) -> f64 {
        self.inner.variance()
    }

    #[getter]
    fn line_count(&self) -> usize {
        self.inner.lines().len()
    }

    #[getter]
    fn delta_f(&self) -> f64 {
        self.inner.delta_f()
    }
}

/// `(freqs_hz, levels_dbc_hz)` of a phase record.
#[pyfunction]
#[pyo3(signature = (samples, sample_rate, segments=1, window="rect"))]
fn estimate_psd(
    samples: Vec<f64>,
    sample_rate: f64,
    segments: usize,
    window: &str,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let window = match window {
        "rect" => PsdWindow::Rectangular,
        "hann" => PsdWindow::Hann,
        other => return Err(PyValueError::new_err(format!("unknown window {other}"))),
    };
    let est = phasenoise::estimate_psd(&samples, sample_rate, segments, window).map_err(py_err)?;
    let levels = est.levels_db();
    Ok((est.freqs, levels))
}

/// `(factor, effective)` of the residual after LOS compensation.
#[pyfunction]
fn predicted_attenuation(f_hz: f64, delta_tau_s: f64) -> (f64, bool) {
    let a = compensation::predicted_attenuation(f_hz, delta_tau_s);
    (a.factor, a.effective)
}

#[pyfunction]
fn effective_bandwidth(delta_tau_s: f64) -> f64 {
    compensation::effective_bandwidth(delta_tau_s)
}

/// Closed-form LOS to mono-static power ratio (linear).
#[pyfunction]
fn los_to_mono_ratio(g_90: f64, g_t: f64, r_mono: f64, r_los: f64, rcs: f64) -> PyResult<f64> {
    scene::los_to_mono_ratio(g_90, g_t, r_mono, r_los, rcs).map_err(py_err)
}

fn map_db(map: &RangeDopplerMap) -> Vec<Vec<f64>> {
    let cols = map.values.cols();
    map.values
        .normalized_db()
        .chunks(cols)
        .map(<[f64]>::to_vec)
        .collect()
}

/// Processed output of one receiver.
#[pyclass(name = "Receiver", frozen)]
struct PyReceiver {
    #[pyo3(get)]
    rx_id: usize,
    #[pyo3(get)]
    pre_db: Vec<Vec<f64>>,
    #[pyo3(get)]
    post_db: Option<Vec<Vec<f64>>>,
    /// `(tx_id, los_bin, xi)` per remote radar.
    #[pyo3(get)]
    pn_vectors: Vec<(usize, usize, Vec<f64>)>,
    #[pyo3(get)]
    metrics_json: String,
}

fn load_config(
    path: PathBuf,
    seed: Option<u64>,
    no_pn: bool,
    no_compensation: bool,
    window: Option<&str>,
) -> PyResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&path).map_err(py_err)?;
    if let Some(seed) = seed {
        cfg.master_seed = seed;
    }
    if no_pn {
        cfg.pn.enabled = false;
    }
    if no_compensation {
        cfg.pipeline.compensation = false;
    }
    if let Some(w) = window {
        cfg.pipeline.window =
            parse_window(w).ok_or_else(|| PyValueError::new_err(format!("unknown window {w}")))?;
    }
    Ok(cfg)
}

/// Simulates every receiver of a config file in memory.
#[pyfunction]
#[pyo3(signature = (config, seed=None, no_pn=false, no_compensation=false, window=None, threads=None))]
fn simulate(
    py: Python<'_>,
    config: PathBuf,
    seed: Option<u64>,
    no_pn: bool,
    no_compensation: bool,
    window: Option<&str>,
    threads: Option<usize>,
) -> PyResult<Vec<PyReceiver>> {
    let cfg = load_config(config, seed, no_pn, no_compensation, window)?;
    let (_, outputs) = py
        .detach(|| experiment::simulate(&cfg, threads))
        .map_err(py_err)?;
    Ok(outputs
        .into_iter()
        .map(|o| PyReceiver {
            rx_id: o.metrics.rx_id,
            pre_db: map_db(&o.pre),
            post_db: o.post.as_ref().map(map_db),
            pn_vectors: o
                .pn_vectors
                .into_iter()
                .map(|v| (v.tx_id, v.source_bin, v.xi))
                .collect(),
            metrics_json: o.metrics.to_json(),
        })
        .collect())
}

/// Runs a config file, writes its artifacts and returns the metrics JSON.
#[pyfunction]
#[pyo3(signature = (config, out_dir=None, seed=None, no_pn=false, no_compensation=false, window=None, threads=None))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    config: PathBuf,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    no_pn: bool,
    no_compensation: bool,
    window: Option<&str>,
    threads: Option<usize>,
) -> PyResult<String> {
    let mut cfg = load_config(config, seed, no_pn, no_compensation, window)?;
    if let Some(dir) = out_dir {
        cfg.outputs.dir = dir;
    }
    let report = py
        .detach(|| experiment::run(&cfg, threads))
        .map_err(py_err)?;
    Ok(report.to_json())
}

/// JSON diagnostics for a config file.
#[pyfunction]
fn validate(config: PathBuf) -> PyResult<String> {
    let cfg = ExperimentConfig::load(&config).map_err(py_err)?;
    Ok(experiment::diagnostics_json(&experiment::validate(&cfg)))
}

#[pymodule]
fn pmcw(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(generate_p3, m)?)?;
    m.add_function(wrap_pyfunction!(search_apas, m)?)?;
    m.add_function(wrap_pyfunction!(verify_almost_perfect, m)?)?;
    m.add_function(wrap_pyfunction!(periodic_autocorrelation, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_psd, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_attenuation, m)?)?;
    m.add_function(wrap_pyfunction!(effective_bandwidth, m)?)?;
    m.add_function(wrap_pyfunction!(los_to_mono_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_class::<PyPhaseNoise>()?;
    m.add_class::<PyReceiver>()?;
    Ok(())
}
