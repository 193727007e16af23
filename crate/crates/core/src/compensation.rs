//! LOS-based slow-time phase-noise compensation.
//!
//! The LOS return from the remote radar carries the same uncorrelated phase
//! noise as the bistatic return, delayed by `τ_los` instead of `τ_bi`. Its
//! per-burst phase `ξ(n)` is read from the range-slow-time matrix and removed
//! from the whole remote section by multiplying with `e^{-jξ(n)}`. What is
//! left of a spectral line at `f_k` is scaled by `2|sin(π f_k (τ_bi - τ_los))|`.

use std::f64::consts::PI;
use std::io::Write;
use std::ops::Range;

use num_complex::Complex64;

use crate::dsp::RangeSlowTimeMatrix;
use crate::error::{Error, Result};

/// Detection gate for the LOS row, relative to the strongest row of the matrix.
pub const LOS_DETECTION_GATE_DB: f64 = -40.0;

/// Per-burst phase read from the LOS row.
#[derive(Debug, Clone, PartialEq)]
pub struct PnVector {
    /// Radians in `(-π, π]`, one per burst.
    pub xi: Vec<f64>,
    pub source_bin: usize,
    pub rx_id: usize,
    pub tx_id: usize,
}

impl PnVector {
    pub fn zeros(bursts: usize) -> Self {
        PnVector {
            xi: vec![0.0; bursts],
            source_bin: 0,
            rx_id: 0,
            tx_id: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// CSV with header `n,xi_radians`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,xi_radians")?;
        for (n, xi) in self.xi.iter().enumerate() {
            writeln!(w, "{n},{xi:.12e}")?;
        }
        Ok(())
    }
}

/// Finds the LOS bin in the remote radar's section.
///
/// The LOS is the shortest path from the remote transmitter, so it is the
/// first arrival in the section; the bistatic return of a strong target can
/// be louder. The rule is: first bin whose mean slow-time power clears
/// [`LOS_DETECTION_GATE_DB`] below the strongest row, then the local maximum
/// reached by climbing from there.
pub fn locate_los_bin(rst: &RangeSlowTimeMatrix, section: Range<usize>) -> Result<usize> {
    if section.is_empty() || section.end > rst.range_bins() {
        return Err(Error::EmptySection);
    }
    let powers: Vec<f64> = (0..rst.range_bins())
        .map(|p| rst.values.row_power(p))
        .collect();
    let peak = powers.iter().copied().fold(0.0, f64::max);
    let gate = peak * 10f64.powf(LOS_DETECTION_GATE_DB / 10.0);
    let not_found = Error::LosNotFound {
        start: section.start,
        end: section.end,
    };
    if peak <= 0.0 {
        return Err(not_found);
    }
    let mut bin = section
        .clone()
        .find(|&p| powers[p] >= gate)
        .ok_or(not_found)?;
    while bin + 1 < section.end && powers[bin + 1] > powers[bin] {
        bin += 1;
    }
    Ok(bin)
}

/// `ξ(n) = arg R(los_bin, n)`.
pub fn extract_pn_vector(
    rst: &RangeSlowTimeMatrix,
    los_bin: usize,
    rx_id: usize,
    tx_id: usize,
) -> Result<PnVector> {
    if los_bin >= rst.range_bins() {
        return Err(Error::BadBin {
            bin: los_bin,
            rows: rst.range_bins(),
        });
    }
    let xi = rst
        .values
        .row(los_bin)
        .iter()
        .map(|v| {
            let a = v.arg();
            if a <= -PI {
                PI
            } else {
                a
            }
        })
        .collect();
    Ok(PnVector {
        xi,
        source_bin: los_bin,
        rx_id,
        tx_id,
    })
}

/// Multiplies rows `bins` by `e^{-jξ(n)}`; all other rows are copied unchanged.
pub fn apply_compensation(
    rst: &RangeSlowTimeMatrix,
    xi: &PnVector,
    bins: Range<usize>,
) -> Result<RangeSlowTimeMatrix> {
    if xi.len() != rst.bursts() {
        return Err(Error::LengthMismatch {
            expected: rst.bursts(),
            got: xi.len(),
        });
    }
    if bins.end > rst.range_bins() {
        return Err(Error::BadBin {
            bin: bins.end.saturating_sub(1),
            rows: rst.range_bins(),
        });
    }
    let rotation: Vec<Complex64> = xi
        .xi
        .iter()
        .map(|&x| Complex64::from_polar(1.0, -x))
        .collect();
    let mut out = rst.clone();
    for p in bins {
        for (v, r) in out.values.row_mut(p).iter_mut().zip(&rotation) {
            *v *= r;
        }
    }
    Ok(out)
}

/// Residual scaling of one spectral line and whether it is below break-even.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attenuation {
    pub factor: f64,
    pub effective: bool,
}

// Products within this of 1/6 count as on the boundary.
const BOUNDARY_EPS: f64 = 1e-12;

fn sine_factor(f: f64, tau: f64) -> Attenuation {
    let x = (f * tau).abs();
    Attenuation {
        factor: 2.0 * (PI * x).sin().abs(),
        effective: x <= 1.0 / 6.0 + BOUNDARY_EPS,
    }
}

/// Residual factor `2|sin(π f_k Δτ)|` after LOS compensation, with
/// `Δτ = τ_bi - τ_los`.
pub fn predicted_attenuation(f_k: f64, delta_tau: f64) -> Attenuation {
    sine_factor(f_k, delta_tau)
}

/// Self-cancellation factor `2|sin(π f_k τ_M)|` of the mono-static path,
/// where the transmit and receive noise share one PLL.
pub fn mono_range_correlation_factor(f_k: f64, tau_m: f64) -> Attenuation {
    sine_factor(f_k, tau_m)
}

/// Highest frequency for which a delay difference still attenuates.
pub fn effective_bandwidth(delta_tau: f64) -> f64 {
    if delta_tau == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (6.0 * delta_tau.abs())
    }
}

/// CSV with header `f_hz,factor_linear,effective`.
pub fn write_attenuation_csv<W: Write>(
    mut w: W,
    freqs: &[f64],
    delta_tau: f64,
) -> std::io::Result<()> {
    writeln!(w, "f_hz,factor_linear,effective")?;
    for &f in freqs {
        let a = predicted_attenuation(f, delta_tau);
        writeln!(w, "{f:.6e},{:.12e},{}", a.factor, a.effective)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::ComplexMatrix;

    fn rst(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> RangeSlowTimeMatrix {
        let data = (0..rows)
            .flat_map(|p| (0..cols).map(move |n| (p, n)))
            .map(|(p, n)| f(p, n))
            .collect();
        RangeSlowTimeMatrix {
            values: ComplexMatrix::from_rows(rows, cols, data).unwrap(),
            code_length: 2 * rows,
            sections: 2,
            chip_s: 1e-9,
        }
    }

    #[test]
    fn attenuation_examples() {
        assert_eq!(predicted_attenuation(1e6, 0.0).factor, 0.0);
        let edge = predicted_attenuation(1.0 / 6.0, 1.0);
        assert!((edge.factor - 1.0).abs() < 1e-12 && edge.effective);
        let worst = predicted_attenuation(0.5e6, 1e-6);
        assert!((worst.factor - 2.0).abs() < 1e-12 && !worst.effective);
        assert_eq!(
            predicted_attenuation(1e6, -3e-8),
            predicted_attenuation(1e6, 3e-8)
        );
    }

    #[test]
    fn mono_factor_examples() {
        assert_eq!(mono_range_correlation_factor(1e6, 0.0).factor, 0.0);
        let tau = 33.356e-9;
        let limit = effective_bandwidth(tau);
        assert!((limit - 4.9966e6).abs() < 1e3);
        assert!(mono_range_correlation_factor(limit * 0.999, tau).effective);
        assert!(!mono_range_correlation_factor(limit * 1.001, tau).effective);
        let a = mono_range_correlation_factor(2e6, 1e-8).factor;
        let b = mono_range_correlation_factor(1e6, 2e-8).factor;
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn locate_picks_first_arrival_over_stronger_later_bin() {
        let m = rst(12, 4, |p, _| match p {
            1 => Complex64::new(10.0, 0.0),
            8 => Complex64::new(2.0, 0.0),
            9 => Complex64::new(3.0, 0.0),
            10 => Complex64::new(0.5, 0.0),
            11 => Complex64::new(9.0, 0.0),
            _ => Complex64::new(1e-4, 0.0),
        });
        assert_eq!(locate_los_bin(&m, 6..12).unwrap(), 9);
        assert!(matches!(locate_los_bin(&m, 6..6), Err(Error::EmptySection)));
        assert!(matches!(
            locate_los_bin(&m, 6..13),
            Err(Error::EmptySection)
        ));
        assert!(matches!(
            locate_los_bin(&m, 2..6),
            Err(Error::LosNotFound { start: 2, end: 6 })
        ));
    }

    #[test]
    fn boundary_bin_is_found() {
        let m = rst(12, 4, |p, _| {
            if p == 6 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert_eq!(locate_los_bin(&m, 6..12).unwrap(), 6);
    }

    #[test]
    fn extraction_reads_phase_and_wraps() {
        let psi = 0.7;
        let m = rst(4, 3, |_, n| {
            Complex64::from_polar(2.0, psi + n as f64 * 0.1)
        });
        let xi = extract_pn_vector(&m, 2, 1, 2).unwrap();
        for (n, x) in xi.xi.iter().enumerate() {
            assert!((x - (psi + n as f64 * 0.1)).abs() < 1e-12);
        }
        let neg_pi = rst(1, 1, |_, _| Complex64::new(-1.0, -0.0));
        assert_eq!(extract_pn_vector(&neg_pi, 0, 1, 2).unwrap().xi[0], PI);
        assert!(matches!(
            extract_pn_vector(&m, 4, 1, 2),
            Err(Error::BadBin { .. })
        ));
    }

    #[test]
    fn compensation_touches_only_selected_rows() {
        let m = rst(6, 5, |p, n| {
            Complex64::from_polar(1.0 + p as f64, 0.3 * n as f64 - 0.2 * p as f64)
        });
        let xi = extract_pn_vector(&m, 4, 1, 2).unwrap();
        let out = apply_compensation(&m, &xi, 3..6).unwrap();
        for p in 0..3 {
            assert_eq!(out.values.row(p), m.values.row(p));
        }
        for v in out.values.row(4) {
            assert!((v - Complex64::new(5.0, 0.0)).norm() < 1e-12);
        }
        let again = extract_pn_vector(&out, 4, 1, 2).unwrap();
        assert!(again.xi.iter().all(|x| x.abs() < 1e-12));
        let twice = apply_compensation(&out, &again, 3..6).unwrap();
        for (a, b) in twice.values.data().iter().zip(out.values.data()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!(
            apply_compensation(&m, &PnVector::zeros(5), 0..6).unwrap(),
            m
        );
        assert!(matches!(
            apply_compensation(&m, &PnVector::zeros(4), 3..6),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn csv_formats() {
        let mut buf = Vec::new();
        write_attenuation_csv(&mut buf, &[0.0, 1e6], 1e-8).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "f_hz,factor_linear,effective");
        assert!(lines[1].ends_with(",true"));
        assert_eq!(lines.len(), 3);

        let mut buf = Vec::new();
        PnVector {
            xi: vec![0.5, -0.25],
            source_bin: 129,
            rx_id: 1,
            tx_id: 2,
        }
        .write_csv(&mut buf)
        .unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("n,xi_radians\n0,5.0"));
    }
}
