//! Received baseband synthesis.
//!
//! One complex sample per chip. Each path contributes its delayed,
//! Doppler-rotated copy of the transmitter's (circularly shifted) code, times
//! the phase-noise factor `e^{j(φ_tx(t-τ) - φ_rx(t))}`. The mono path uses
//! the same PLL on both ends, so its phase noise is range-correlated; the
//! bi-static and LOS paths mix two independent PLLs.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::codes::{circular_shift, CodeSequence};
use crate::error::{Error, Result};
use crate::phasenoise::{modulate, PhaseNoiseProcess};
use crate::scene::{enumerate_paths, PropagationPath, Scenario};
use crate::units::db_to_power;

#[derive(Debug, Clone, PartialEq)]
pub struct BasebandFrame {
    pub samples: Vec<Complex64>,
    pub rx_id: usize,
    pub chip_s: f64,
    pub carrier_hz: f64,
    pub code_length: usize,
    pub bursts: usize,
}

impl BasebandFrame {
    pub fn sample_rate(&self) -> f64 {
        1.0 / self.chip_s
    }

    pub fn burst(&self, n: usize) -> &[Complex64] {
        &self.samples[n * self.code_length..(n + 1) * self.code_length]
    }
}

/// Periodic transmission of the code shifted by `shift` chips, `bursts` times.
pub fn tx_baseband(code: &CodeSequence, shift: usize, bursts: usize) -> Vec<Complex64> {
    let shifted = circular_shift(code, shift as i64);
    let chips = shifted.chips();
    (0..chips.len() * bursts)
        .map(|i| chips[i % chips.len()])
        .collect()
}

pub fn synthesize_rx(scenario: &Scenario, rx_id: usize) -> Result<BasebandFrame> {
    let paths = enumerate_paths(scenario, rx_id)?;
    synthesize_paths(scenario, rx_id, &paths)
}

/// Sums the given paths at receiver `rx_id`, in path order.
pub fn synthesize_paths(
    scenario: &Scenario,
    rx_id: usize,
    paths: &[PropagationPath],
) -> Result<BasebandFrame> {
    scenario.node(rx_id)?;
    let wf = scenario.waveform();
    let len = scenario.code_length();
    let total = scenario.frame_len();
    let chip_s = wf.chip_s;

    let rx_phase = if scenario.pn_enabled {
        let pll = pll_for(scenario, rx_id)?;
        Some(pll.evaluate_uniform(0.0, chip_s, total))
    } else {
        None
    };

    let mut tx_codes: HashMap<usize, CodeSequence> = HashMap::new();
    let mut samples = vec![Complex64::new(0.0, 0.0); total];
    for path in paths {
        let tx = scenario.node(path.tx_id)?;
        let code = tx_codes
            .entry(tx.id)
            .or_insert_with(|| circular_shift(scenario.code(), tx.code_shift() as i64));
        let chips = code.chips();
        let d = path.delay_bins(chip_s) % len;
        let tx_phase = match &rx_phase {
            Some(_) => {
                Some(pll_for(scenario, tx.id)?.evaluate_uniform(-path.delay_s, chip_s, total))
            }
            None => None,
        };
        let cycles_per_sample = path.doppler_hz * chip_s;
        for (i, s) in samples.iter_mut().enumerate() {
            // periodic extension: the sample before the first echo comes from
            // the previous period of the continuous transmission
            let chip = chips[(i + len - d) % len];
            let mut v = chip * path.amplitude;
            if cycles_per_sample != 0.0 {
                let cycles = (cycles_per_sample * i as f64).fract();
                v *= Complex64::from_polar(1.0, -TAU * cycles);
            }
            if let (Some(tp), Some(rp)) = (&tx_phase, &rx_phase) {
                v *= modulate(tp[i] - rp[i], scenario.pn_mode);
            }
            *s += v;
        }
    }

    if let Some(dbm) = scenario.thermal_noise_dbm {
        let sigma = (db_to_power(dbm) / 2.0).sqrt();
        let normal = Normal::new(0.0, sigma)
            .map_err(|e| Error::BadScenario(format!("thermal noise: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.noise_seed ^ ((rx_id as u64) << 32));
        for s in samples.iter_mut() {
            *s += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }

    Ok(BasebandFrame {
        samples,
        rx_id,
        chip_s,
        carrier_hz: wf.carrier_hz,
        code_length: len,
        bursts: wf.bursts,
    })
}

fn pll_for(scenario: &Scenario, id: usize) -> Result<&PhaseNoiseProcess> {
    let pll = scenario
        .node(id)?
        .pll()
        .ok_or_else(|| Error::BadScenario(format!("radar {id} has no PLL realization")))?;
    let needed = scenario.frame_duration();
    if pll.duration() < needed * (1.0 - 1e-9) {
        return Err(Error::PnDurationTooShort {
            available: pll.duration(),
            needed,
        });
    }
    Ok(pll)
}

/// Writes `PMCWRAW1 <N> <Lc> <Tc_seconds> <fc_hz>\n` followed by
/// little-endian interleaved f64 (re, im).
pub fn write_raw_frame(mut w: impl Write, frame: &BasebandFrame) -> std::io::Result<()> {
    writeln!(
        w,
        "PMCWRAW1 {} {} {:e} {:e}",
        frame.bursts, frame.code_length, frame.chip_s, frame.carrier_hz
    )?;
    let mut buf = Vec::with_capacity(frame.samples.len() * 16);
    for s in &frame.samples {
        buf.extend_from_slice(&s.re.to_le_bytes());
        buf.extend_from_slice(&s.im.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_raw_frame(r: impl Read, rx_id: usize) -> Result<BasebandFrame> {
    let mut reader = BufReader::new(r);
    let mut header = String::new();
    reader
        .read_line(&mut header)
        .map_err(|e| Error::io("<raw frame>", e))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let bad = || Error::Config(format!("bad raw frame header '{}'", header.trim()));
    if fields.len() != 5 || fields[0] != "PMCWRAW1" {
        return Err(bad());
    }
    let bursts: usize = fields[1].parse().map_err(|_| bad())?;
    let code_length: usize = fields[2].parse().map_err(|_| bad())?;
    let chip_s: f64 = fields[3].parse().map_err(|_| bad())?;
    let carrier_hz: f64 = fields[4].parse().map_err(|_| bad())?;
    let mut body = Vec::new();
    reader
        .read_to_end(&mut body)
        .map_err(|e| Error::io("<raw frame>", e))?;
    let expected = bursts * code_length;
    if body.len() != expected * 16 {
        return Err(Error::LengthMismatch {
            expected: expected * 16,
            got: body.len(),
        });
    }
    let samples = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok(BasebandFrame {
        samples,
        rx_id,
        chip_s,
        carrier_hz,
        code_length,
        bursts,
    })
}

pub fn save_raw_frame(path: &Path, frame: &BasebandFrame) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_raw_frame(&mut w, frame)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::generate_p3;
    use crate::phasenoise::{PnMode, SpectralLine};
    use crate::scene::{AntennaPattern, PathKind, RadarNode, Vec2, Waveform};

    fn scenario(bursts: usize, len: usize) -> Scenario {
        let ant = AntennaPattern::log_linear(10.0, -7.0).unwrap();
        let up = Vec2::new(0.0, 1.0);
        let nodes = vec![
            RadarNode::new(1, Vec2::new(-0.5, 0.0), up, 10.0, ant.clone()).unwrap(),
            RadarNode::new(2, Vec2::new(0.5, 0.0), up, 10.0, ant).unwrap(),
        ];
        let wf = Waveform {
            bursts,
            ..Waveform::reference()
        };
        Scenario::new(nodes, vec![], wf, generate_p3(len)).unwrap()
    }

    fn path(kind: PathKind, tx: usize, delay_s: f64) -> PropagationPath {
        PropagationPath {
            kind,
            tx_id: tx,
            rx_id: 1,
            target: None,
            delay_s,
            doppler_hz: 0.0,
            amplitude: 1.0,
            power_dbm: 0.0,
            aod_deg: 0.0,
            aoa_deg: 0.0,
        }
    }

    #[test]
    fn tx_baseband_is_periodic_and_shifted() {
        let code = generate_p3(504);
        let one = tx_baseband(&code, 0, 1);
        assert_eq!(one.as_slice(), code.chips());
        let two = tx_baseband(&code, 0, 2);
        assert_eq!(two[..504], two[504..]);
        let shifted = tx_baseband(&code, 126, 1);
        assert_eq!(shifted[0], code.chips()[378]);
    }

    #[test]
    fn unit_path_has_unit_energy() {
        let s = scenario(4, 16);
        let f = synthesize_paths(&s, 1, &[path(PathKind::Mono, 1, 5e-9)]).unwrap();
        let e = f.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() / f.samples.len() as f64;
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_delay_same_pll_cancels_exactly() {
        let mut s = scenario(4, 16);
        let pll = PhaseNoiseProcess::from_lines(
            1.0 / s.frame_duration(),
            vec![SpectralLine {
                harmonic: 3,
                amplitude: 0.2,
                phase: 1.0,
            }],
        )
        .unwrap();
        s.set_pll(1, pll.clone()).unwrap();
        s.set_pll(2, pll).unwrap();
        let p = [path(PathKind::Mono, 1, 0.0)];
        let clean = synthesize_paths(&s, 1, &p).unwrap();
        s.pn_enabled = true;
        let noisy = synthesize_paths(&s, 1, &p).unwrap();
        assert_eq!(clean.samples, noisy.samples);
        s.pn_mode = PnMode::Linearized;
        assert_eq!(synthesize_paths(&s, 1, &p).unwrap().samples, clean.samples);
    }

    #[test]
    fn short_pll_is_rejected() {
        let mut s = scenario(4, 16);
        let short = PhaseNoiseProcess::silent(2.0 / s.frame_duration());
        s.set_pll(1, short.clone()).unwrap();
        s.set_pll(2, short).unwrap();
        s.pn_enabled = true;
        let r = synthesize_paths(&s, 1, &[path(PathKind::Los, 2, 3e-9)]);
        assert!(matches!(r, Err(Error::PnDurationTooShort { .. })));
    }

    #[test]
    fn raw_frame_round_trip() {
        let s = scenario(2, 16);
        let f = synthesize_paths(&s, 1, &[path(PathKind::Los, 2, 3e-9)]).unwrap();
        let mut buf = Vec::new();
        write_raw_frame(&mut buf, &f).unwrap();
        assert!(buf.starts_with(b"PMCWRAW1 2 16 1e-9 7.9e10\n"));
        let back = read_raw_frame(buf.as_slice(), 1).unwrap();
        assert_eq!(back, f);
        assert!(read_raw_frame(&buf[..buf.len() - 1], 1).is_err());
    }

    #[test]
    fn thermal_noise_has_configured_power() {
        let mut s = scenario(64, 16);
        s.thermal_noise_dbm = Some(-10.0);
        s.noise_seed = 5;
        let f = synthesize_paths(&s, 1, &[]).unwrap();
        let p = f.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() / f.samples.len() as f64;
        assert!((p / 0.1 - 1.0).abs() < 0.1, "{p}");
    }
}
