//! Spreading code sequences and their periodic correlation properties.
//!
//! Two families are generated here: binary almost-perfect autocorrelation
//! sequences (APAS, found by exhaustive search for short lengths) and the
//! polyphase P3 code. Longer binary sequences are imported from a text file,
//! one chip per line.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Unit-modulus tolerance applied to imported and constructed chips.
const UNIT_TOLERANCE: f64 = 1e-9;

/// Largest length accepted by [`search_apas`].
pub const MAX_SEARCH_LENGTH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeFamily {
    ApasBinary,
    P3,
    Imported,
}

impl CodeFamily {
    pub fn name(self) -> &'static str {
        match self {
            CodeFamily::ApasBinary => "apas",
            CodeFamily::P3 => "p3",
            CodeFamily::Imported => "imported",
        }
    }
}

/// A unit-modulus chip sequence `b(l)`, `l = 0..L_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSequence {
    chips: Vec<Complex64>,
    family: CodeFamily,
}

impl CodeSequence {
    pub fn new(chips: Vec<Complex64>, family: CodeFamily) -> Result<Self> {
        if chips.is_empty() {
            return Err(Error::BadCode("empty chip vector".into()));
        }
        for (l, c) in chips.iter().enumerate() {
            if (c.norm() - 1.0).abs() > UNIT_TOLERANCE {
                return Err(Error::BadCode(format!(
                    "chip {l} has modulus {} (expected 1)",
                    c.norm()
                )));
            }
        }
        let seq = CodeSequence { chips, family };
        if family == CodeFamily::ApasBinary && !seq.is_binary() {
            return Err(Error::BadCode("APAS chips must be +1 or -1".into()));
        }
        Ok(seq)
    }

    /// Builds a binary sequence from signs (`true` = +1).
    pub fn from_signs(signs: &[bool], family: CodeFamily) -> Result<Self> {
        let chips = signs
            .iter()
            .map(|&s| Complex64::new(if s { 1.0 } else { -1.0 }, 0.0))
            .collect();
        Self::new(chips, family)
    }

    pub fn chips(&self) -> &[Complex64] {
        &self.chips
    }

    pub fn family(&self) -> CodeFamily {
        self.family
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    /// True when every chip is exactly +1 or -1.
    pub fn is_binary(&self) -> bool {
        self.chips
            .iter()
            .all(|c| c.im == 0.0 && (c.re == 1.0 || c.re == -1.0))
    }
}

/// Direct O(L²) periodic autocorrelation,
/// `out[p] = Σ_l b(l)·conj(b((l+p) mod L))`.
///
/// Lag 0 is set to `L` exactly; every chip is unit modulus.
pub fn periodic_autocorrelation(seq: &CodeSequence) -> Vec<Complex64> {
    let mut out = periodic_cross_correlation(seq.chips(), seq.chips());
    out[0] = Complex64::new(seq.len() as f64, 0.0);
    out
}

/// `out[p] = Σ_l a(l)·conj(b((l+p) mod L))` by direct summation.
pub fn periodic_cross_correlation(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.len(), b.len(), "cross-correlation needs equal lengths");
    let len = a.len();
    (0..len)
        .map(|p| {
            a.iter()
                .enumerate()
                .map(|(l, x)| x * b[(l + p) % len].conj())
                .sum()
        })
        .collect()
}

/// Periodic autocorrelation through the DFT: `IDFT(|DFT(b)|²)`, reindexed to
/// the same lag convention as [`periodic_autocorrelation`].
pub fn periodic_autocorrelation_fft(seq: &CodeSequence) -> Vec<Complex64> {
    let len = seq.len();
    let mut planner = FftPlanner::new();
    let mut spectrum = seq.chips().to_vec();
    planner.plan_fft_forward(len).process(&mut spectrum);
    // Σ_l b(l) conj(b(l+p)) is the conjugate of the usual circular
    // autocorrelation, whose spectrum is |B|² (real), so conjugation commutes.
    let mut acf: Vec<Complex64> = spectrum.iter().map(|x| x.norm_sqr().into()).collect();
    planner.plan_fft_inverse(len).process(&mut acf);
    let scale = 1.0 / len as f64;
    acf.iter().map(|x| (x * scale).conj()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApasReport {
    pub is_almost_perfect: bool,
    pub peak: Complex64,
    pub half_lag: Complex64,
    pub max_sidelobe: f64,
}

/// Checks the almost-perfect structure: peak `L` at lag 0, negative value at
/// lag `L/2`, and `|acf| <= tolerance` at every other lag.
pub fn verify_almost_perfect(seq: &CodeSequence, tolerance: f64) -> Result<ApasReport> {
    let len = seq.len();
    if !len.is_multiple_of(2) {
        return Err(Error::OddLength(len));
    }
    let acf = periodic_autocorrelation(seq);
    let half = len / 2;
    let max_sidelobe = acf
        .iter()
        .enumerate()
        .filter(|&(p, _)| p != 0 && p != half)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    let peak = acf[0];
    let half_lag = acf[half];
    let peak_ok = (peak.re - len as f64).abs() <= tolerance.max(1e-9 * len as f64);
    Ok(ApasReport {
        is_almost_perfect: peak_ok && max_sidelobe <= tolerance && half_lag.re < 0.0,
        peak,
        half_lag,
        max_sidelobe,
    })
}

/// Polyphase code with perfect periodic autocorrelation.
///
/// Even lengths use the P3 phase `π l² / L`. That phase is not periodic for odd
/// lengths, so odd lengths use `π l (l+1) / L`, which is perfect there.
pub fn generate_p3(len: usize) -> CodeSequence {
    assert!(len >= 1, "code length must be positive");
    let modulus = 2 * len as u128;
    let chips = (0..len as u128)
        .map(|l| {
            let numerator = if len.is_multiple_of(2) {
                l * l
            } else {
                l * (l + 1)
            };
            // phase = π·(n mod 2L)/L keeps the argument in [0, 2π)
            let phase = PI * (numerator % modulus) as f64 / len as f64;
            Complex64::from_polar(1.0, phase)
        })
        .collect();
    CodeSequence {
        chips,
        family: CodeFamily::P3,
    }
}

/// `out[l] = chips[(l - shift) mod L]`.
pub fn circular_shift(seq: &CodeSequence, shift: i64) -> CodeSequence {
    let len = seq.len();
    let s = shift.rem_euclid(len as i64) as usize;
    let chips = (0..len).map(|l| seq.chips[(l + len - s) % len]).collect();
    CodeSequence {
        chips,
        family: seq.family,
    }
}

/// Code shift for radar `m` (1-based) of `radar_count`: `L (m-1) / (2M)`.
pub fn radar_code_shift(m: usize, radar_count: usize, code_length: usize) -> Result<usize> {
    let divisor = 2 * radar_count;
    if radar_count == 0 || !code_length.is_multiple_of(divisor) {
        return Err(Error::IndivisibleCode {
            code_length,
            divisor,
        });
    }
    if m == 0 || m > radar_count {
        return Err(Error::BadScenario(format!(
            "radar index {m} outside 1..={radar_count}"
        )));
    }
    Ok(code_length * (m - 1) / divisor)
}

/// Exhaustive search for binary APAS of length `len`.
///
/// Results are deduplicated up to cyclic shift and negation; each class is
/// represented by its lexicographically smallest member (with -1 < +1), and
/// the list is sorted.
pub fn search_apas(len: usize) -> Result<Vec<CodeSequence>> {
    if !len.is_multiple_of(2) {
        return Err(Error::OddLength(len));
    }
    if len > MAX_SEARCH_LENGTH {
        return Err(Error::SearchTooLarge(len));
    }
    if len == 0 {
        return Ok(Vec::new());
    }
    let mask: u32 = (1u32 << len) - 1;
    let half = len / 2;
    let rotate = |x: u32, p: usize| ((x >> p) | (x << (len - p))) & mask;
    // bit l set means chip l = +1
    let acf = |x: u32, p: usize| len as i32 - 2 * (x ^ rotate(x, p)).count_ones() as i32;

    let mut classes: Vec<u32> = Vec::new();
    for x in 0..=mask {
        let ok = (1..len).all(|p| {
            let v = acf(x, p);
            if p == half {
                v < 0
            } else {
                v == 0
            }
        });
        if !ok {
            continue;
        }
        let canonical = (0..len)
            .flat_map(|p| {
                let r = if p == 0 { x } else { rotate(x, p) };
                [r, !r & mask]
            })
            .min_by_key(|&r| chip_order_key(r, len))
            .unwrap_or(x);
        if canonical == x {
            classes.push(x);
        }
    }
    classes.sort_by_key(|&x| chip_order_key(x, len));
    classes
        .into_iter()
        .map(|x| {
            let signs: Vec<bool> = (0..len).map(|l| (x >> l) & 1 == 1).collect();
            CodeSequence::from_signs(&signs, CodeFamily::ApasBinary)
        })
        .collect()
}

// Lexicographic key on chips in index order with -1 before +1.
fn chip_order_key(x: u32, len: usize) -> u32 {
    (0..len).fold(0u32, |acc, l| (acc << 1) | ((x >> l) & 1))
}

/// Parses the chip file format: `+1`/`-1` per line for binary codes,
/// `re,im` for polyphase chips, `#` starts a comment.
pub fn parse_code(text: &str, family: CodeFamily) -> Result<CodeSequence> {
    let mut chips = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::BadCode(format!("line {}: cannot parse '{line}'", lineno + 1));
        let chip = match line.split_once(',') {
            Some((re, im)) => Complex64::new(
                re.trim().parse().map_err(|_| bad())?,
                im.trim().parse().map_err(|_| bad())?,
            ),
            None => Complex64::new(line.parse().map_err(|_| bad())?, 0.0),
        };
        chips.push(chip);
    }
    CodeSequence::new(chips, family)
}

pub fn format_code(seq: &CodeSequence) -> String {
    let mut out = format!("# family={} length={}\n", seq.family().name(), seq.len());
    let binary = seq.is_binary();
    for c in seq.chips() {
        if binary {
            out.push_str(if c.re > 0.0 { "+1\n" } else { "-1\n" });
        } else {
            let _ = writeln!(out, "{},{}", c.re, c.im);
        }
    }
    out
}

pub fn read_code_file(path: &Path) -> Result<CodeSequence> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_code(&text, CodeFamily::Imported)
}

pub fn write_code_file(path: &Path, seq: &CodeSequence) -> Result<()> {
    std::fs::write(path, format_code(seq)).map_err(|e| Error::io(path, e))
}
