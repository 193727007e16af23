//! PLL phase noise as a sum of spectral lines.
//!
//! A realization is `φ(t) = Σ_k α_k cos(2π k Δf t + θ_k)` with `Δf` the inverse
//! of the simulated duration, `θ_k` uniform and `α_k` set from a PSD mask.
//! Because the process is an explicit trigonometric sum it can be evaluated at
//! any instant, which gives exact delayed copies `φ(t - τ)`.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::units::{db_to_power, power_to_db, DB_FLOOR};

/// Lines with amplitude below this are dropped at synthesis.
pub const PRUNE_AMPLITUDE: f64 = 1e-10;

/// Piecewise-linear PSD mask in dB over log-frequency, clamped at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdMask {
    points: Vec<(f64, f64)>,
}

impl PsdMask {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::BadMask("need at least two points".into()));
        }
        for (i, &(f, level)) in points.iter().enumerate() {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::BadMask(format!("frequency {f} must be positive")));
            }
            if !level.is_finite() {
                return Err(Error::BadMask(format!("level at {f} Hz is not finite")));
            }
            if i > 0 && f <= points[i - 1].0 {
                return Err(Error::BadMask(
                    "frequencies must be strictly increasing".into(),
                ));
            }
        }
        Ok(PsdMask { points })
    }

    /// A 79 GHz PLL-like profile: -70 dBc/Hz at 10 kHz falling to -120 dBc/Hz
    /// at 100 MHz.
    pub fn default_pll() -> Self {
        PsdMask {
            points: vec![
                (1e4, -70.0),
                (1e5, -80.0),
                (1e6, -85.0),
                (1e7, -110.0),
                (1e8, -120.0),
            ],
        }
    }

    /// Flat mask at `level` dBc/Hz.
    pub fn flat(level: f64) -> Self {
        PsdMask {
            points: vec![(1.0, level), (2.0, level)],
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn level_at(&self, freq: f64) -> f64 {
        let pts = &self.points;
        let (f0, l0) = pts[0];
        let (fl, ll) = pts[pts.len() - 1];
        if freq <= f0 {
            return l0;
        }
        if freq >= fl {
            return ll;
        }
        let i = pts.partition_point(|&(f, _)| f <= freq);
        let (fa, la) = pts[i - 1];
        let (fb, lb) = pts[i];
        let w = (freq / fa).ln() / (fb / fa).ln();
        la + (lb - la) * w
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse_two_columns(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::BadMask(m) => Error::BadMask(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn format(&self) -> String {
        format_two_columns("freq_hz level_dbc_hz", &self.points)
    }
}

/// One line of a phase-noise realization, at `k·Δf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub harmonic: usize,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseNoiseProcess {
    lines: Vec<SpectralLine>,
    delta_f: f64,
    k_max: usize,
    seed: Option<u64>,
    pruned: usize,
}

/// Draws a realization whose one-sided PSD at each `f_k` equals the mask,
/// `α_k = sqrt(2·10^{L(f_k)/10}·Δf)`.
///
/// All `k_max` phases are drawn before pruning so the random stream does not
/// depend on the mask level.
pub fn synthesize(
    mask: &PsdMask,
    total_duration: f64,
    f_max: f64,
    seed: u64,
) -> Result<PhaseNoiseProcess> {
    if !(total_duration > 0.0 && total_duration.is_finite()) {
        return Err(Error::BadDuration(total_duration));
    }
    let delta_f = 1.0 / total_duration;
    if !(f_max > delta_f && f_max.is_finite()) {
        return Err(Error::BadBand { f_max, delta_f });
    }
    let k_max = (f_max / delta_f * (1.0 + 1e-12)).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::with_capacity(k_max);
    let mut pruned = 0;
    for k in 1..=k_max {
        let mut phase = rng.random::<f64>() * TAU;
        if phase >= TAU {
            phase -= TAU;
        }
        let level = mask.level_at(k as f64 * delta_f);
        let amplitude = (2.0 * db_to_power(level) * delta_f).sqrt();
        if amplitude < PRUNE_AMPLITUDE {
            pruned += 1;
            continue;
        }
        lines.push(SpectralLine {
            harmonic: k,
            amplitude,
            phase,
        });
    }
    Ok(PhaseNoiseProcess {
        lines,
        delta_f,
        k_max,
        seed: Some(seed),
        pruned,
    })
}

impl PhaseNoiseProcess {
    /// A process from explicit lines, e.g. a single tone for analysis.
    pub fn from_lines(delta_f: f64, lines: Vec<SpectralLine>) -> Result<Self> {
        if !(delta_f > 0.0 && delta_f.is_finite()) {
            return Err(Error::BadDuration(1.0 / delta_f));
        }
        for line in &lines {
            if line.harmonic == 0
                || line.amplitude.is_nan()
                || line.amplitude < 0.0
                || !line.phase.is_finite()
            {
                return Err(Error::BadMask(format!("invalid spectral line {line:?}")));
            }
        }
        let k_max = lines.iter().map(|l| l.harmonic).max().unwrap_or(0);
        let lines = lines
            .into_iter()
            .map(|l| SpectralLine {
                phase: l.phase.rem_euclid(TAU),
                ..l
            })
            .collect();
        Ok(PhaseNoiseProcess {
            lines,
            delta_f,
            k_max,
            seed: None,
            pruned: 0,
        })
    }

    /// Zero process (no lines).
    pub fn silent(delta_f: f64) -> Self {
        PhaseNoiseProcess {
            lines: Vec::new(),
            delta_f,
            k_max: 0,
            seed: None,
            pruned: 0,
        }
    }

    pub fn lines(&self) -> &[SpectralLine] {
        &self.lines
    }

    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn pruned(&self) -> usize {
        self.pruned
    }

    /// Period of the realization, `1/Δf`.
    pub fn duration(&self) -> f64 {
        1.0 / self.delta_f
    }

    pub fn line_frequency(&self, line: &SpectralLine) -> f64 {
        line.harmonic as f64 * self.delta_f
    }

    /// Mean-square phase, `Σ α_k² / 2`.
    pub fn variance(&self) -> f64 {
        self.lines
            .iter()
            .map(|l| 0.5 * l.amplitude * l.amplitude)
            .sum()
    }

    /// Exact trigonometric sum at each instant.
    pub fn evaluate(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&t| self.evaluate_at(t)).collect()
    }

    pub fn evaluate_at(&self, t: f64) -> f64 {
        self.lines
            .iter()
            .map(|l| l.amplitude * (TAU * (l.harmonic as f64 * self.delta_f) * t + l.phase).cos())
            .sum()
    }

    /// The same process observed `tau` seconds later: `φ_τ(t) = φ(t - τ)`.
    pub fn delayed(&self, tau: f64) -> Self {
        let lines = self
            .lines
            .iter()
            .map(|l| SpectralLine {
                phase: (l.phase - TAU * self.line_frequency(l) * tau).rem_euclid(TAU),
                ..*l
            })
            .collect();
        PhaseNoiseProcess {
            lines,
            ..self.clone()
        }
    }

    /// Evaluates on the grid `t0 + i·dt`, `i = 0..n`.
    ///
    /// When `1/(Δf·dt)` is an integer `P` the grid phases are `2π k i / P`, so
    /// the sum is one inverse DFT of length `P` with the start offset folded
    /// into the line phases. This is the same sum as [`Self::evaluate`], not a
    /// resampled approximation. Other grids use the direct sum.
    pub fn evaluate_uniform(&self, t0: f64, dt: f64, n: usize) -> Vec<f64> {
        if self.lines.is_empty() {
            return vec![0.0; n];
        }
        let ratio = 1.0 / (self.delta_f * dt);
        let period = ratio.round();
        let commensurate = period >= 2.0 && (ratio - period).abs() <= 1e-9 * ratio;
        let direct_cost = self.lines.len() as f64 * n as f64;
        let fft_cost = 4.0 * period * period.log2().max(1.0);
        if !commensurate || fft_cost > direct_cost {
            return (0..n)
                .map(|i| self.evaluate_at(t0 + i as f64 * dt))
                .collect();
        }
        let period = period as usize;
        let mut spectrum = vec![Complex64::new(0.0, 0.0); period];
        for l in &self.lines {
            // fractional cycles of the start offset, reduced before scaling by 2π
            let offset = (l.harmonic as f64 * self.delta_f * t0).rem_euclid(1.0);
            spectrum[l.harmonic % period] +=
                Complex64::from_polar(l.amplitude, l.phase + TAU * offset);
        }
        FftPlanner::new()
            .plan_fft_inverse(period)
            .process(&mut spectrum);
        (0..n).map(|i| spectrum[i % period].re).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PnMode {
    #[default]
    Exact,
    Linearized,
}

impl PnMode {
    pub fn name(self) -> &'static str {
        match self {
            PnMode::Exact => "exact",
            PnMode::Linearized => "linearized",
        }
    }
}

/// `e^{jφ}` (exact) or `1 + jφ` (linearized).
pub fn modulate(phi: f64, mode: PnMode) -> Complex64 {
    match mode {
        PnMode::Exact => Complex64::from_polar(1.0, phi),
        PnMode::Linearized => Complex64::new(1.0, phi),
    }
}

pub fn modulation(phi: &[f64], mode: PnMode) -> Vec<Complex64> {
    phi.iter().map(|&p| modulate(p, mode)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsdWindow {
    #[default]
    Rectangular,
    Hann,
}

/// One-sided PSD estimate in dB(rad²/Hz), which under the synthesis
/// convention reads directly in dBc/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub freqs: Vec<f64>,
    /// Linear one-sided density per bin.
    pub density: Vec<f64>,
}

impl PsdEstimate {
    pub fn levels_db(&self) -> Vec<f64> {
        self.density.iter().map(|&d| power_to_db(d)).collect()
    }

    pub fn bin_width(&self) -> f64 {
        if self.freqs.len() >= 2 {
            self.freqs[1] - self.freqs[0]
        } else {
            self.freqs.first().copied().unwrap_or(0.0)
        }
    }

    /// Linear average of estimates on the same frequency grid.
    pub fn average(estimates: &[PsdEstimate]) -> Option<PsdEstimate> {
        let first = estimates.first()?;
        let mut density = vec![0.0; first.density.len()];
        for e in estimates {
            if e.freqs != first.freqs {
                return None;
            }
            for (acc, d) in density.iter_mut().zip(&e.density) {
                *acc += d;
            }
        }
        let scale = 1.0 / estimates.len() as f64;
        density.iter_mut().for_each(|d| *d *= scale);
        Some(PsdEstimate {
            freqs: first.freqs.clone(),
            density,
        })
    }

    pub fn format(&self) -> String {
        let rows: Vec<(f64, f64)> = self.freqs.iter().copied().zip(self.levels_db()).collect();
        format_two_columns("freq_hz level_dbc_hz", &rows)
    }
}

/// Averaged periodogram over `n_segments` non-overlapping segments.
///
/// Bins run from `fs/len` to `fs/2`; DC is dropped. The one-sided density
/// doubles every bin except Nyquist.
pub fn estimate_psd(
    samples: &[f64],
    sample_rate: f64,
    n_segments: usize,
    window: PsdWindow,
) -> Result<PsdEstimate> {
    let needed = 2 * n_segments.max(1);
    if n_segments == 0 || samples.len() < needed {
        return Err(Error::TooFewSamples {
            needed,
            got: samples.len(),
        });
    }
    let seg_len = samples.len() / n_segments;
    let taper: Vec<f64> = match window {
        PsdWindow::Rectangular => vec![1.0; seg_len],
        PsdWindow::Hann => (0..seg_len)
            .map(|i| (PI * i as f64 / seg_len as f64).sin().powi(2))
            .collect(),
    };
    let energy: f64 = taper.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(seg_len);
    let n_bins = seg_len / 2;
    let mut density = vec![0.0; n_bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); seg_len];
    for seg in samples.chunks_exact(seg_len).take(n_segments) {
        for ((b, &x), &w) in buf.iter_mut().zip(seg).zip(&taper) {
            *b = Complex64::new(x * w, 0.0);
        }
        fft.process(&mut buf);
        for (j, d) in density.iter_mut().enumerate() {
            let bin = j + 1;
            let sides = if 2 * bin == seg_len { 1.0 } else { 2.0 };
            *d += sides * buf[bin].norm_sqr() / (sample_rate * energy);
        }
    }
    let scale = 1.0 / n_segments as f64;
    density.iter_mut().for_each(|d| *d *= scale);
    let freqs = (1..=n_bins)
        .map(|j| j as f64 * sample_rate / seg_len as f64)
        .collect();
    Ok(PsdEstimate { freqs, density })
}

fn parse_two_columns(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split_whitespace().map(str::parse::<f64>);
        match (cols.next(), cols.next(), cols.next()) {
            (Some(Ok(a)), Some(Ok(b)), None) => rows.push((a, b)),
            _ => {
                return Err(Error::BadMask(format!(
                    "line {}: expected '<freq_hz> <level_dbc_hz>'",
                    lineno + 1
                )))
            }
        }
    }
    Ok(rows)
}

fn format_two_columns(header: &str, rows: &[(f64, f64)]) -> String {
    let mut out = format!("# {header}\n");
    for (a, b) in rows {
        let b = if b.is_finite() { *b } else { DB_FLOOR };
        let _ = writeln!(out, "{a} {b}");
    }
    out
}
