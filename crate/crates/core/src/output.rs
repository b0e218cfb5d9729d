//! Serialization of analysis results: CSV tables and 8-bit grayscale
//! rasters (binary PGM).
//!
//! Floats are printed with `{:e}`, the shortest form that parses back to
//! the identical f64, so a CSV re-read reproduces the arrays exactly.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::analysis::{DispersionMap, SpatialSpectrum, SpectrumResult};

/// Columns: freq_hz, amplitude.
pub fn write_spectrum_csv(path: &Path, result: &SpectrumResult) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "freq_hz,amplitude")?;
    for (freq, amp) in result.freqs.iter().zip(&result.amplitude) {
        writeln!(w, "{freq:e},{amp:e}")?;
    }
    w.flush()
}

/// Long format, one row per (x, frequency) pair. Columns: x_m, freq_hz,
/// power.
pub fn write_spatial_csv(path: &Path, result: &SpatialSpectrum) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x_m,freq_hz,power")?;
    for (xi, x) in result.x_positions.iter().enumerate() {
        for (fi, freq) in result.freqs.iter().enumerate() {
            writeln!(w, "{x:e},{freq:e},{:e}", result.at(xi, fi))?;
        }
    }
    w.flush()
}

/// Long format, one row per (frequency, wave number) pair. Columns:
/// k_rad_per_m, freq_hz, magnitude.
pub fn write_dispersion_csv(path: &Path, result: &DispersionMap) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "k_rad_per_m,freq_hz,magnitude")?;
    for (fi, freq) in result.f_axis.iter().enumerate() {
        for (ki, k) in result.k_axis.iter().enumerate() {
            writeln!(w, "{k:e},{freq:e},{:e}", result.at(fi, ki))?;
        }
    }
    w.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    /// log10(1 + x) before scaling; spreads small values over more gray
    /// levels when the data spans several decades.
    Log,
}

impl std::str::FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Scale, String> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            other => Err(format!("unknown scale {other:?} (expected linear or log)")),
        }
    }
}

/// 8-bit grayscale image. Pixels are stored top row first, ready for PGM
/// output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayRaster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayRaster {
    /// Pixel at image column `col` and image row `row`, row 0 at the top.
    pub fn at(&self, col: usize, row: usize) -> u8 {
        self.pixels[row * self.width + col]
    }
}

/// Renders a row-major matrix as a grayscale raster with matrix row 0 at
/// the BOTTOM of the image, so an axis that grows with the row index
/// points upward. Values are min-max scaled to 0..=255 after the optional
/// log transform; a constant matrix (min == max) renders all black.
///
/// `rows * cols` must equal `matrix.len()` and both must be nonzero.
pub fn render_colormap(matrix: &[f64], rows: usize, cols: usize, scale: Scale) -> GrayRaster {
    assert!(rows > 0 && cols > 0, "empty matrix");
    assert_eq!(matrix.len(), rows * cols, "matrix shape mismatch");
    let transform = |v: f64| match scale {
        Scale::Linear => v,
        Scale::Log => (1.0 + v).log10(),
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in matrix {
        let t = transform(v);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    let span = hi - lo;
    let mut pixels = vec![0u8; rows * cols];
    if span > 0.0 {
        for r in 0..rows {
            let image_row = rows - 1 - r;
            for c in 0..cols {
                let t = transform(matrix[r * cols + c]);
                let level = ((t - lo) / span * 255.0).round();
                pixels[image_row * cols + c] = level.clamp(0.0, 255.0) as u8;
            }
        }
    }
    GrayRaster { width: cols, height: rows, pixels }
}

/// Binary (P5) PGM with maxval 255.
pub fn write_pgm(path: &Path, raster: &GrayRaster) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{} {}\n255\n", raster.width, raster.height)?;
    w.write_all(&raster.pixels)?;
    w.flush()
}
