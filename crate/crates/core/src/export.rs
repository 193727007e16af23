//! Matrix artifacts: dB CSV, raw binary and PNG heatmap.
//!
//! Binary layout: ASCII header `PMCWMAT1 <rows> <cols>\n` followed by
//! row-major little-endian `f64` pairs `(re, im)`.

use std::io::{BufRead, Write};

use image::{Rgb, RgbImage};
use num_complex::Complex64;

use crate::dsp::ComplexMatrix;
use crate::error::{Error, Result};

/// Heatmap dB range; values outside are clamped to the end colors.
pub const HEATMAP_MIN_DB: f64 = -80.0;
pub const HEATMAP_MAX_DB: f64 = 0.0;

/// Viridis sampled at nine evenly spaced stops.
const COLORMAP: [[u8; 3]; 9] = [
    [68, 1, 84],
    [71, 44, 122],
    [59, 81, 139],
    [44, 113, 142],
    [33, 144, 141],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];

/// Peak-normalized dB, one matrix row per line, comma separated.
pub fn write_db_csv<W: Write>(mut w: W, m: &ComplexMatrix) -> std::io::Result<()> {
    let db = m.normalized_db();
    for r in 0..m.rows() {
        let line: Vec<String> = db[r * m.cols()..(r + 1) * m.cols()]
            .iter()
            .map(|v| format!("{v:.4}"))
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_matrix_binary<W: Write>(mut w: W, m: &ComplexMatrix) -> std::io::Result<()> {
    writeln!(w, "PMCWMAT1 {} {}", m.rows(), m.cols())?;
    let mut bytes = Vec::with_capacity(16 * m.data().len());
    for v in m.data() {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&bytes)
}

pub fn read_matrix_binary<R: BufRead>(mut r: R) -> Result<ComplexMatrix> {
    let bad = |msg: &str| Error::Config(format!("matrix file: {msg}"));
    let mut header = String::new();
    r.read_line(&mut header)
        .map_err(|e| Error::io("<matrix>", e))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "PMCWMAT1" {
        return Err(bad("missing PMCWMAT1 header"));
    }
    let rows: usize = fields[1].parse().map_err(|_| bad("bad row count"))?;
    let cols: usize = fields[2].parse().map_err(|_| bad("bad column count"))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| Error::io("<matrix>", e))?;
    if bytes.len() != 16 * rows * cols {
        return Err(Error::LengthMismatch {
            expected: 16 * rows * cols,
            got: bytes.len(),
        });
    }
    let data = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    ComplexMatrix::from_rows(rows, cols, data)
}

fn color(db: f64) -> Rgb<u8> {
    let t = ((db - HEATMAP_MIN_DB) / (HEATMAP_MAX_DB - HEATMAP_MIN_DB)).clamp(0.0, 1.0);
    let x = t * (COLORMAP.len() - 1) as f64;
    let i = (x.floor() as usize).min(COLORMAP.len() - 2);
    let frac = x - i as f64;
    let mix = |c: usize| {
        let a = COLORMAP[i][c] as f64;
        let b = COLORMAP[i + 1][c] as f64;
        (a + (b - a) * frac).round() as u8
    };
    Rgb([mix(0), mix(1), mix(2)])
}

/// Heatmap of peak-normalized dB. Columns run left to right, matrix row 0 is
/// the bottom image row.
pub fn render_heatmap(m: &ComplexMatrix) -> RgbImage {
    let db = m.normalized_db();
    let (rows, cols) = (m.rows() as u32, m.cols() as u32);
    RgbImage::from_fn(cols, rows, |x, y| {
        let r = (rows - 1 - y) as usize;
        color(db[r * m.cols() + x as usize])
    })
}

pub fn save_heatmap(path: &std::path::Path, m: &ComplexMatrix) -> Result<()> {
    render_heatmap(m).save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}
