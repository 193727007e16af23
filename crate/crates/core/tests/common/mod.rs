#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use pmcw_core::codes::{generate_p3, CodeSequence};
use pmcw_core::dsp::{
    doppler_dft, periodic_correlate, DopplerWindow, RangeDopplerMap, RangeSlowTimeMatrix,
};
use pmcw_core::phasenoise::{PhaseNoiseProcess, PsdMask, SpectralLine};
use pmcw_core::scene::{AntennaPattern, RadarNode, Scenario, Target, Vec2, Waveform};
use pmcw_core::txrx::BasebandFrame;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Target on the bisector, 5 m from both radars.
pub const REFERENCE_TARGET_Y: f64 = 4.974_937_185_533_1;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn reference_config() -> PathBuf {
    repo_root().join("configs/reference.cfg")
}

pub fn antenna() -> AntennaPattern {
    AntennaPattern::log_linear(10.0, -7.0).unwrap()
}

/// Radars at (±0.5, 0) looking along +y, one static target at (0, y).
pub fn pair_scenario(code: CodeSequence, waveform: Waveform, target_y: f64) -> Scenario {
    let up = Vec2::new(0.0, 1.0);
    let nodes = vec![
        RadarNode::new(1, Vec2::new(-0.5, 0.0), up, 10.0, antenna()).unwrap(),
        RadarNode::new(2, Vec2::new(0.5, 0.0), up, 10.0, antenna()).unwrap(),
    ];
    let target = Target {
        position: Vec2::new(0.0, target_y),
        velocity: Vec2::default(),
        rcs_dbsm: 10.0,
    };
    Scenario::new(nodes, vec![target], waveform, code).unwrap()
}

pub fn reference_scenario() -> Scenario {
    pair_scenario(generate_p3(504), Waveform::reference(), REFERENCE_TARGET_Y)
}

/// Reference scenario with the default mask drawn from `seed`.
pub fn reference_with_pn(seed: u64) -> Scenario {
    let mut s = reference_scenario();
    s.attach_phase_noise(&PsdMask::default_pll(), 100e6, seed)
        .unwrap();
    s
}

/// Target height on the bisector that makes the bistatic path `delta_tau`
/// longer than the 1 m LOS path.
pub fn bisector_y_for_delta_tau(delta_tau: f64) -> f64 {
    let tau_bi = 1.0 / SPEED_OF_LIGHT + delta_tau;
    let half = 0.5 * tau_bi * SPEED_OF_LIGHT;
    (half * half - 0.25).sqrt()
}

/// Single cosine line `α cos(2π k Δf t + θ)` on a process of period `duration`.
pub fn single_line(
    duration: f64,
    harmonic: usize,
    amplitude: f64,
    phase: f64,
) -> PhaseNoiseProcess {
    PhaseNoiseProcess::from_lines(
        1.0 / duration,
        vec![SpectralLine {
            harmonic,
            amplitude,
            phase,
        }],
    )
    .unwrap()
}

pub fn range_doppler(
    frame: &BasebandFrame,
    code: &CodeSequence,
    sections: usize,
) -> (RangeSlowTimeMatrix, RangeDopplerMap) {
    let rst = periodic_correlate(frame, code, sections).unwrap();
    let rdm = doppler_dft(&rst, DopplerWindow::None);
    (rst, rdm)
}

/// `(|D(+f)| + |D(-f)|) / |D(0)|` on one row of an unwindowed map, with `f`
/// given as a harmonic of the Doppler bin spacing.
pub fn sideband_ratio(map: &RangeDopplerMap, row: usize, harmonic: usize) -> f64 {
    let n = map.doppler_bins();
    let dc = map.dc_bin();
    let plus = map.values.get(row, (dc + harmonic) % n).norm();
    let minus = map.values.get(row, (dc + n - harmonic % n) % n).norm();
    (plus + minus) / map.values.get(row, dc).norm()
}

/// Chip-averaging gain of a tone at `f` over one burst of `len` chips.
pub fn burst_average_gain(f: f64, chip_s: f64, len: usize) -> f64 {
    let t = len as f64 * chip_s;
    (PI * f * t).sin() / (len as f64 * (PI * f * chip_s).sin())
}

/// Direct `O(L²)` periodic correlation of one burst.
pub fn direct_correlation(burst: &[Complex64], reference: &[Complex64]) -> Vec<Complex64> {
    let len = reference.len();
    (0..len)
        .map(|p| {
            (0..len)
                .map(|l| burst[(l + p) % len] * reference[l].conj())
                .sum()
        })
        .collect()
}

pub fn frame_from_samples(samples: Vec<Complex64>, code_length: usize) -> BasebandFrame {
    let bursts = samples.len() / code_length;
    BasebandFrame {
        samples,
        rx_id: 1,
        chip_s: 1e-9,
        carrier_hz: 79e9,
        code_length,
        bursts,
    }
}
