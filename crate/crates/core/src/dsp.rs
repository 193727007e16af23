//! Range and Doppler processing.
//!
//! Range processing is a periodic correlation of each burst against the
//! unshifted code. Index convention:
//!
//! ```text
//! R(p, n) = Σ_l  frame[n·L + (l + p) mod L] · conj(code[l])
//!
//!   echo delayed by d chips:  frame[i] = code[(i - d) mod L]
//!   => R(p, n) peaks at p = d          (own transmission)
//!   => R(p, n) peaks at p = d + s      (remote radar shifted by s chips)
//! ```
//!
//! Only rows `p < L/2` are kept. With `M` radars they split into `M` sections
//! of `L/(2M)` bins, section `m-1` holding the returns transmitted by radar `m`.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::codes::CodeSequence;
use crate::error::{Error, Result};
use crate::txrx::BasebandFrame;
use crate::units::{power_to_db, DB_FLOOR};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn peak_power(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max)
    }

    /// Mean `|v|²` over one row.
    pub fn row_power(&self, r: usize) -> f64 {
        self.row(r).iter().map(|v| v.norm_sqr()).sum::<f64>() / self.cols as f64
    }

    /// `10·log10(|v|² / peak)` for every cell, clamped at [`DB_FLOOR`].
    pub fn normalized_db(&self) -> Vec<f64> {
        let peak = self.peak_power();
        self.data
            .iter()
            .map(|v| {
                if peak > 0.0 {
                    power_to_db(v.norm_sqr() / peak)
                } else {
                    DB_FLOOR
                }
            })
            .collect()
    }
}

/// Rows `p = 0..L/2` (range bins), columns `n = 0..N` (bursts).
#[derive(Debug, Clone, PartialEq)]
pub struct RangeSlowTimeMatrix {
    pub values: ComplexMatrix,
    pub code_length: usize,
    pub sections: usize,
    pub chip_s: f64,
}

impl RangeSlowTimeMatrix {
    pub fn bursts(&self) -> usize {
        self.values.cols()
    }

    pub fn range_bins(&self) -> usize {
        self.values.rows()
    }

    pub fn burst_s(&self) -> f64 {
        self.code_length as f64 * self.chip_s
    }

    pub fn section_len(&self) -> usize {
        self.code_length / (2 * self.sections)
    }

    /// Bins of section `s` (0-based, i.e. radar `s + 1`).
    pub fn section(&self, s: usize) -> Range<usize> {
        let len = self.section_len();
        s * len..(s + 1) * len
    }

    pub fn section_of(&self, bin: usize) -> usize {
        bin / self.section_len().max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DopplerWindow {
    #[default]
    None,
    Hann,
}

impl DopplerWindow {
    pub fn name(self) -> &'static str {
        match self {
            DopplerWindow::None => "none",
            DopplerWindow::Hann => "hann",
        }
    }

    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            DopplerWindow::None => vec![1.0; n],
            DopplerWindow::Hann => (0..n)
                .map(|i| (PI * i as f64 / n as f64).sin().powi(2))
                .collect(),
        }
    }
}

/// Range-Doppler map with the Doppler axis center-shifted: column `d` holds
/// spectral frequency `(d - N/2) / (N·T)`.
///
/// The received slow-time rotation is `e^{-j2π f_D n T}`, so a target with
/// Doppler `f_D` sits at spectral frequency `-f_D`. [`Self::target_doppler`]
/// applies that relabeling.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    pub values: ComplexMatrix,
    pub window: DopplerWindow,
    pub code_length: usize,
    pub sections: usize,
    pub chip_s: f64,
}

impl RangeDopplerMap {
    pub fn doppler_bins(&self) -> usize {
        self.values.cols()
    }

    pub fn burst_s(&self) -> f64 {
        self.code_length as f64 * self.chip_s
    }

    /// Column holding 0 Hz.
    pub fn dc_bin(&self) -> usize {
        self.doppler_bins() / 2
    }

    pub fn frequency(&self, d: usize) -> f64 {
        let n = self.doppler_bins();
        (d as f64 - (n / 2) as f64) / (n as f64 * self.burst_s())
    }

    pub fn target_doppler(&self, d: usize) -> f64 {
        -self.frequency(d)
    }

    /// Column nearest to spectral frequency `f` (aliased into the axis).
    pub fn bin_for_frequency(&self, f: f64) -> usize {
        let n = self.doppler_bins() as i64;
        let k = (f * n as f64 * self.burst_s()).round() as i64;
        (k + n / 2).rem_euclid(n) as usize
    }

    pub fn bin_for_target_doppler(&self, f_d: f64) -> usize {
        self.bin_for_frequency(-f_d)
    }
}

/// Periodic correlation of every burst with `reference`, keeping the lower
/// `L/2` range bins. Computed per burst as `IDFT(X · conj(B))`.
pub fn periodic_correlate(
    frame: &BasebandFrame,
    reference: &CodeSequence,
    sections: usize,
) -> Result<RangeSlowTimeMatrix> {
    let len = reference.len();
    if frame.code_length != len {
        return Err(Error::LengthMismatch {
            expected: len,
            got: frame.code_length,
        });
    }
    let bursts = frame.bursts;
    if frame.samples.len() != len * bursts {
        return Err(Error::LengthMismatch {
            expected: len * bursts,
            got: frame.samples.len(),
        });
    }
    if sections == 0 || !len.is_multiple_of(2 * sections) {
        return Err(Error::IndivisibleCode {
            code_length: len,
            divisor: 2 * sections.max(1),
        });
    }
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(len);
    let inverse = planner.plan_fft_inverse(len);
    let mut ref_spec = reference.chips().to_vec();
    forward.process(&mut ref_spec);
    ref_spec.iter_mut().for_each(|c| *c = c.conj() / len as f64);

    let rows = len / 2;
    let profiles: Vec<Vec<Complex64>> = (0..bursts)
        .into_par_iter()
        .map(|n| {
            let mut buf = frame.burst(n).to_vec();
            forward.process(&mut buf);
            for (b, r) in buf.iter_mut().zip(&ref_spec) {
                *b *= r;
            }
            inverse.process(&mut buf);
            buf.truncate(rows);
            buf
        })
        .collect();

    let mut values = ComplexMatrix::zeros(rows, bursts);
    for (n, profile) in profiles.iter().enumerate() {
        for (p, v) in profile.iter().enumerate() {
            values.data[p * bursts + n] = *v;
        }
    }
    Ok(RangeSlowTimeMatrix {
        values,
        code_length: len,
        sections,
        chip_s: frame.chip_s,
    })
}

/// Length-N DFT along slow time for every range bin, center-shifted.
pub fn doppler_dft(rst: &RangeSlowTimeMatrix, window: DopplerWindow) -> RangeDopplerMap {
    let n = rst.bursts();
    let taper = window.coefficients(n);
    let fft = FftPlanner::new().plan_fft_forward(n);
    let rows: Vec<Vec<Complex64>> = (0..rst.range_bins())
        .into_par_iter()
        .map(|p| {
            let mut buf: Vec<Complex64> = rst
                .values
                .row(p)
                .iter()
                .zip(&taper)
                .map(|(v, w)| v * w)
                .collect();
            fft.process(&mut buf);
            buf.rotate_right(n / 2);
            buf
        })
        .collect();
    RangeDopplerMap {
        values: ComplexMatrix {
            rows: rows.len(),
            cols: n,
            data: rows.concat(),
        },
        window,
        code_length: rst.code_length,
        sections: rst.sections,
        chip_s: rst.chip_s,
    }
}

/// Exact inverse of [`doppler_dft`] for an unwindowed map.
pub fn doppler_idft(rdm: &RangeDopplerMap) -> Result<RangeSlowTimeMatrix> {
    if rdm.window != DopplerWindow::None {
        return Err(Error::WindowedMap);
    }
    let n = rdm.doppler_bins();
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let scale = 1.0 / n as f64;
    let mut values = rdm.values.clone();
    for p in 0..values.rows() {
        let row = values.row_mut(p);
        row.rotate_left(n / 2);
        ifft.process(row);
        row.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(RangeSlowTimeMatrix {
        values,
        code_length: rdm.code_length,
        sections: rdm.sections,
        chip_s: rdm.chip_s,
    })
}

/// Median cell power outside the excluded rows, relative to the map peak, dB.
///
/// Each exclusion `(bin, radius)` removes rows `bin - radius ..= bin + radius`.
pub fn noise_floor(map: &RangeDopplerMap, exclusion: &[(usize, usize)]) -> Result<f64> {
    let m = &map.values;
    let excluded = |p: usize| {
        exclusion
            .iter()
            .any(|&(bin, radius)| p + radius >= bin && p <= bin + radius)
    };
    let mut cells: Vec<f64> = (0..m.rows())
        .filter(|&p| !excluded(p))
        .flat_map(|p| m.row(p).iter().map(|v| v.norm_sqr()))
        .collect();
    let total = m.rows() * m.cols();
    if cells.is_empty() || 4 * cells.len() < total {
        return Err(Error::OverExcluded {
            kept: cells.len(),
            total,
        });
    }
    let peak = m.peak_power();
    if peak <= 0.0 {
        return Ok(DB_FLOOR);
    }
    Ok(power_to_db(median(&mut cells) / peak))
}

fn median(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (_, &mut upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Mean power along one range row, excluding the row's peak Doppler bin and
/// its two neighbours, relative to the map peak, dB.
pub fn ridge_power(map: &RangeDopplerMap, range_bin: usize) -> Result<f64> {
    let m = &map.values;
    if range_bin >= m.rows() {
        return Err(Error::BadBin {
            bin: range_bin,
            rows: m.rows(),
        });
    }
    let n = m.cols();
    let row = m.row(range_bin);
    let peak_col = argmax(row.iter().map(|v| v.norm_sqr()));
    let near_peak = |d: usize| {
        let dist = (d + n - peak_col) % n;
        dist <= 1 || dist == n - 1
    };
    let kept: Vec<f64> = (0..n)
        .filter(|&d| !near_peak(d))
        .map(|d| row[d].norm_sqr())
        .collect();
    let peak = m.peak_power();
    if kept.is_empty() || peak <= 0.0 {
        return Ok(DB_FLOOR);
    }
    Ok(power_to_db(
        kept.iter().sum::<f64>() / kept.len() as f64 / peak,
    ))
}

/// Peak-to-sidelobe level of one burst's range profile: the largest bin
/// other than the peak, relative to the peak, dB.
pub fn range_sidelobe_level(rst: &RangeSlowTimeMatrix, burst: usize) -> f64 {
    let powers: Vec<f64> = rst
        .values
        .column(burst)
        .iter()
        .map(|v| v.norm_sqr())
        .collect();
    let peak_bin = argmax(powers.iter().copied());
    let peak = powers[peak_bin];
    let side = powers
        .iter()
        .enumerate()
        .filter(|&(p, _)| p != peak_bin)
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    if peak > 0.0 {
        power_to_db(side / peak)
    } else {
        DB_FLOOR
    }
}

/// Total energy in `bins` relative to the peak cell of the whole matrix, dB.
pub fn band_energy(values: &ComplexMatrix, bins: Range<usize>) -> f64 {
    let energy: f64 = bins
        .flat_map(|p| values.row(p).iter().map(|v| v.norm_sqr()))
        .sum();
    let peak = values.peak_power();
    if peak > 0.0 {
        power_to_db(energy / peak)
    } else {
        DB_FLOOR
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    values
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
        .0
}
