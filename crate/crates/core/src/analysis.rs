//! The three Fourier analyses over a [`SpaceTimeMatrix`]: averaged frequency
//! spectrum, spatially resolved power map, and spin-wave dispersion map.
//!
//! Axis conventions, fixed so golden outputs stay stable:
//! - time transforms are one-sided with floor(N/2)+1 bins, freqs[i] = i/(N*dt)
//! - the dispersion k axis is fftshifted; for even N_x, index N_x/2 maps to
//!   the most negative k
//! - positive k means phase fronts moving toward +x: a wave
//!   cos(2*pi*f0*t - k0*x) peaks at (+k0, +f0)

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::ingest::SpaceTimeMatrix;
use crate::window::Window2D;

/// Row-averaged one-sided amplitude spectrum, max-normalized.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Frequencies in Hz, DC first.
    pub freqs: Vec<f64>,
    /// Unitless amplitudes, max 1 (all zero for an all-zero input).
    pub amplitude: Vec<f64>,
}

/// Per-x one-sided spectra: where along the waveguide each frequency lives.
#[derive(Debug, Clone)]
pub struct SpatialSpectrum {
    /// Cell-center x coordinates in meters, one per row of `power`.
    pub x_positions: Vec<f64>,
    /// Frequencies in Hz, one per column of `power`.
    pub freqs: Vec<f64>,
    /// Row-major |x| rows by |freqs| cols, not normalized across x.
    pub power: Vec<f64>,
}

impl SpatialSpectrum {
    pub fn at(&self, xi: usize, fi: usize) -> f64 {
        self.power[xi * self.freqs.len() + fi]
    }
}

/// Two-dimensional transform magnitude over (k, f).
#[derive(Debug, Clone)]
pub struct DispersionMap {
    /// Wavenumbers in rad/m, fftshifted so k = 0 is centered.
    pub k_axis: Vec<f64>,
    /// Non-negative frequencies in Hz.
    pub f_axis: Vec<f64>,
    /// Row-major |f_axis| rows by |k_axis| cols.
    pub magnitude: Vec<f64>,
}

impl DispersionMap {
    pub fn at(&self, fi: usize, ki: usize) -> f64 {
        self.magnitude[fi * self.k_axis.len() + ki]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisError {
    DegenerateTime { cols: usize },
    DegenerateSpace { sx: usize },
    ShapeMismatch { expected: (usize, usize), got: (usize, usize) },
    BadPad { requested: usize, cols: usize },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::DegenerateTime { cols } => write!(
                f,
                "DegenerateTime: time transforms need at least 2 snapshots, got {cols}"
            ),
            AnalysisError::DegenerateSpace { sx } => write!(
                f,
                "DegenerateSpace: the dispersion transform needs at least 2 cells along x, got {sx}"
            ),
            AnalysisError::ShapeMismatch { expected, got } => write!(
                f,
                "ShapeMismatch: window is {}x{} but the averaged (x, t) array is {}x{}",
                got.0, got.1, expected.0, expected.1
            ),
            AnalysisError::BadPad { requested, cols } => write!(
                f,
                "pad length {requested} is smaller than the {cols} snapshots present"
            ),
        }
    }
}

impl std::error::Error for AnalysisError {}

/// Number of one-sided frequency bins for an N-point transform.
fn half_len(n: usize) -> usize {
    n / 2 + 1
}

fn freq_axis(n: usize, dt: f64) -> Vec<f64> {
    (0..half_len(n)).map(|i| i as f64 / (n as f64 * dt)).collect()
}

fn plan_forward(n: usize) -> (Arc<dyn Fft<f64>>, Vec<Complex64>) {
    let fft = FftPlanner::new().plan_fft_forward(n);
    let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    (fft, scratch)
}

/// Subtracts each row's time-mean in place, removing the static component
/// that otherwise dominates the DC bin.
pub fn detrend_mean(m: &mut SpaceTimeMatrix) {
    let cols = m.cols;
    if cols == 0 {
        return;
    }
    for row in m.data.chunks_exact_mut(cols) {
        let mean = row.iter().sum::<f64>() / cols as f64;
        for v in row {
            *v -= mean;
        }
    }
}

/// Returns a copy zero-padded along time to `padded_cols` columns.
pub fn pad_time(m: &SpaceTimeMatrix, padded_cols: usize) -> Result<SpaceTimeMatrix, AnalysisError> {
    if padded_cols < m.cols {
        return Err(AnalysisError::BadPad { requested: padded_cols, cols: m.cols });
    }
    let mut data = vec![0.0f64; m.rows * padded_cols];
    for r in 0..m.rows {
        data[r * padded_cols..r * padded_cols + m.cols].copy_from_slice(m.row(r));
    }
    Ok(SpaceTimeMatrix { cols: padded_cols, data, ..m.clone() })
}

/// Per-cell time DFT magnitudes, averaged across all cells, one-sided and
/// normalized to peak 1.
pub fn fft_spectrum(m: &SpaceTimeMatrix) -> Result<SpectrumResult, AnalysisError> {
    if m.cols < 2 {
        return Err(AnalysisError::DegenerateTime { cols: m.cols });
    }
    let nt = m.cols;
    let half = half_len(nt);
    let (fft, mut scratch) = plan_forward(nt);
    let mut buf = vec![Complex64::new(0.0, 0.0); nt];
    let mut acc = vec![0.0f64; half];
    for r in 0..m.rows {
        for (slot, v) in buf.iter_mut().zip(m.row(r)) {
            *slot = Complex64::new(*v, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (a, c) in acc.iter_mut().zip(&buf[..half]) {
            *a += c.norm();
        }
    }
    let rows = m.rows as f64;
    for a in &mut acc {
        *a /= rows;
    }
    let peak = acc.iter().cloned().fold(0.0f64, f64::max);
    if peak > 0.0 {
        for a in &mut acc {
            *a /= peak;
        }
    }
    Ok(SpectrumResult { freqs: freq_axis(nt, m.dt), amplitude: acc })
}

/// Arithmetic mean over the (y, z) cross-section at each x, producing one
/// time series per x position (row-major sx by cols).
fn average_cross_section(m: &SpaceTimeMatrix) -> Vec<f64> {
    let (sx, sy, sz) = m.sel_shape;
    let nt = m.cols;
    let mut avg = vec![0.0f64; sx * nt];
    for r in 0..m.rows {
        let x = r % sx;
        let out = &mut avg[x * nt..(x + 1) * nt];
        for (o, v) in out.iter_mut().zip(m.row(r)) {
            *o += v;
        }
    }
    let weight = (sy * sz) as f64;
    for v in &mut avg {
        *v /= weight;
    }
    avg
}

/// One-sided DFT magnitude of the (y, z)-averaged series at each x. No
/// normalization across x, so spatial decay stays visible.
pub fn spatial_spectrum(m: &SpaceTimeMatrix) -> Result<SpatialSpectrum, AnalysisError> {
    if m.cols < 2 {
        return Err(AnalysisError::DegenerateTime { cols: m.cols });
    }
    let (sx, _, _) = m.sel_shape;
    let nt = m.cols;
    let half = half_len(nt);
    let avg = average_cross_section(m);
    let (fft, mut scratch) = plan_forward(nt);
    let mut buf = vec![Complex64::new(0.0, 0.0); nt];
    let mut power = vec![0.0f64; sx * half];
    for x in 0..sx {
        for (slot, v) in buf.iter_mut().zip(&avg[x * nt..(x + 1) * nt]) {
            *slot = Complex64::new(*v, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (p, c) in power[x * half..(x + 1) * half].iter_mut().zip(&buf[..half]) {
            *p = c.norm();
        }
    }
    let x_positions = (0..sx).map(|i| m.x_origin + i as f64 * m.dx).collect();
    Ok(SpatialSpectrum { x_positions, freqs: freq_axis(nt, m.dt), power })
}

/// Dispersion map: (y, z)-average to an (x, t) array, optionally multiply by
/// a 2D window, transform forward in time and inverse in space, fftshift k,
/// keep f >= 0, take magnitudes.
pub fn dispersion(
    m: &SpaceTimeMatrix,
    window: Option<&Window2D>,
) -> Result<DispersionMap, AnalysisError> {
    let (sx, _, _) = m.sel_shape;
    if sx < 2 {
        return Err(AnalysisError::DegenerateSpace { sx });
    }
    if m.cols < 2 {
        return Err(AnalysisError::DegenerateTime { cols: m.cols });
    }
    let nt = m.cols;
    let half = half_len(nt);

    let mut avg = average_cross_section(m);
    if let Some(w) = window {
        if (w.rows, w.cols) != (sx, nt) {
            return Err(AnalysisError::ShapeMismatch {
                expected: (sx, nt),
                got: (w.rows, w.cols),
            });
        }
        for (v, wv) in avg.iter_mut().zip(&w.weights) {
            *v *= wv;
        }
    }

    // Time first: forward DFT per x row.
    let (tfft, mut tscratch) = plan_forward(nt);
    let mut spectra = vec![Complex64::new(0.0, 0.0); sx * nt];
    let mut buf = vec![Complex64::new(0.0, 0.0); nt];
    for x in 0..sx {
        for (slot, v) in buf.iter_mut().zip(&avg[x * nt..(x + 1) * nt]) {
            *slot = Complex64::new(*v, 0.0);
        }
        tfft.process_with_scratch(&mut buf, &mut tscratch);
        spectra[x * nt..(x + 1) * nt].copy_from_slice(&buf);
    }

    // Space second: inverse-sign DFT along x per positive-frequency column,
    // so a wave cos(2*pi*f0*t - k0*x) lands at (+k0, +f0).
    let xfft = FftPlanner::new().plan_fft_inverse(sx);
    let mut xscratch = vec![Complex64::new(0.0, 0.0); xfft.get_inplace_scratch_len()];
    let mut col = vec![Complex64::new(0.0, 0.0); sx];
    let mut magnitude = vec![0.0f64; half * sx];
    let shift = sx.div_ceil(2);
    for q in 0..half {
        for x in 0..sx {
            col[x] = spectra[x * nt + q];
        }
        xfft.process_with_scratch(&mut col, &mut xscratch);
        let out = &mut magnitude[q * sx..(q + 1) * sx];
        for (s, slot) in out.iter_mut().enumerate() {
            let p = (s + shift) % sx;
            *slot = col[p].norm();
        }
    }

    let dk = 2.0 * std::f64::consts::PI / (sx as f64 * m.dx);
    let k_axis = (0..sx).map(|s| (s as f64 - (sx / 2) as f64) * dk).collect();
    Ok(DispersionMap { k_axis, f_axis: freq_axis(nt, m.dt), magnitude })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ovf::Component;

    fn matrix(sel_shape: (usize, usize, usize), cols: usize, fill: impl Fn(usize, usize) -> f64) -> SpaceTimeMatrix {
        let rows = sel_shape.0 * sel_shape.1 * sel_shape.2;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(fill(r, c));
            }
        }
        SpaceTimeMatrix {
            rows,
            cols,
            data,
            dt: 1e-12,
            dx: 2e-9,
            x_origin: 1e-9,
            sel_shape,
            component: Component::Z,
        }
    }

    #[test]
    fn constant_signal_has_only_a_dc_line() {
        let m = matrix((2, 1, 1), 8, |_, _| 3.5);
        let s = fft_spectrum(&m).unwrap();
        assert_eq!(s.amplitude.len(), 5);
        assert_eq!(s.freqs[0], 0.0);
        assert!((s.amplitude[0] - 1.0).abs() < 1e-12);
        for a in &s.amplitude[1..] {
            assert!(a.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_input_yields_zero_amplitude_without_dividing() {
        let m = matrix((2, 1, 1), 8, |_, _| 0.0);
        let s = fft_spectrum(&m).unwrap();
        assert!(s.amplitude.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn one_sided_axis_has_floor_half_plus_one_bins() {
        for cols in [2usize, 3, 8, 9] {
            let m = matrix((1, 1, 1), cols, |_, c| c as f64);
            let s = fft_spectrum(&m).unwrap();
            assert_eq!(s.freqs.len(), cols / 2 + 1);
            assert_eq!(s.amplitude.len(), cols / 2 + 1);
            let df = 1.0 / (cols as f64 * 1e-12);
            for (i, f) in s.freqs.iter().enumerate() {
                assert!((f - i as f64 * df).abs() < df * 1e-12);
            }
        }
    }

    #[test]
    fn single_snapshot_is_degenerate() {
        let m = matrix((2, 1, 1), 1, |_, _| 1.0);
        assert_eq!(fft_spectrum(&m).unwrap_err(), AnalysisError::DegenerateTime { cols: 1 });
        assert_eq!(
            spatial_spectrum(&m).unwrap_err(),
            AnalysisError::DegenerateTime { cols: 1 }
        );
    }

    #[test]
    fn spatial_power_is_local_to_the_driven_cell() {
        let m = matrix((4, 2, 1), 8, |r, c| {
            if r % 4 == 0 {
                (2.0 * std::f64::consts::PI * c as f64 / 8.0).cos()
            } else {
                0.0
            }
        });
        let s = spatial_spectrum(&m).unwrap();
        for fi in 0..s.freqs.len() {
            for xi in 1..4 {
                assert_eq!(s.at(xi, fi), 0.0, "leak into x index {xi}");
            }
        }
        assert!(s.at(0, 1) > 0.0);
        for (got, want) in s.x_positions.iter().zip([1e-9, 3e-9, 5e-9, 7e-9]) {
            assert!((got - want).abs() < 1e-21, "{got} vs {want}");
        }
    }

    #[test]
    fn uniform_oscillation_gives_identical_rows() {
        let m = matrix((3, 2, 2), 16, |_, c| {
            (2.0 * std::f64::consts::PI * 2.0 * c as f64 / 16.0).cos()
        });
        let s = spatial_spectrum(&m).unwrap();
        let half = s.freqs.len();
        for xi in 1..3 {
            for fi in 0..half {
                assert!((s.at(xi, fi) - s.at(0, fi)).abs() < 1e-9);
            }
        }
        for xi in 0..3 {
            let best = (0..half).max_by(|a, b| s.at(xi, *a).total_cmp(&s.at(xi, *b))).unwrap();
            assert_eq!(best, 2);
        }
    }

    #[test]
    fn constant_field_concentrates_at_zero_zero() {
        let m = matrix((4, 1, 1), 8, |_, _| 2.0);
        let d = dispersion(&m, None).unwrap();
        let k0_index = 4 / 2; // fftshifted position of k = 0
        assert_eq!(d.k_axis[k0_index], 0.0);
        let total: f64 = d.magnitude.iter().map(|v| v * v).sum();
        let at_origin = d.at(0, k0_index);
        assert!((at_origin * at_origin / total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_axis_is_fftshifted_with_even_convention() {
        let m = matrix((4, 1, 1), 4, |_, _| 1.0);
        let d = dispersion(&m, None).unwrap();
        let dk = 2.0 * std::f64::consts::PI / (4.0 * 2e-9);
        let expect: Vec<f64> = [-2.0, -1.0, 0.0, 1.0].iter().map(|s| s * dk).collect();
        for (a, b) in d.k_axis.iter().zip(&expect) {
            assert!((a - b).abs() < dk * 1e-12);
        }

        let m = matrix((5, 1, 1), 4, |_, _| 1.0);
        let d = dispersion(&m, None).unwrap();
        let dk = 2.0 * std::f64::consts::PI / (5.0 * 2e-9);
        let expect: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|s| s * dk).collect();
        for (a, b) in d.k_axis.iter().zip(&expect) {
            assert!((a - b).abs() < dk * 1e-12);
        }
    }

    #[test]
    fn single_column_of_cells_is_degenerate_for_dispersion() {
        let m = matrix((1, 4, 1), 8, |_, _| 1.0);
        assert_eq!(dispersion(&m, None).unwrap_err(), AnalysisError::DegenerateSpace { sx: 1 });
    }

    #[test]
    fn window_shape_is_checked() {
        let m = matrix((4, 1, 1), 8, |_, _| 1.0);
        let w = Window2D { rows: 3, cols: 8, weights: vec![1.0; 24] };
        assert_eq!(
            dispersion(&m, Some(&w)).unwrap_err(),
            AnalysisError::ShapeMismatch { expected: (4, 8), got: (3, 8) }
        );
    }

    #[test]
    fn y_only_variation_stays_at_k_zero() {
        // Signal varies along y but has a constant x profile, so all spatial
        // energy must stay in the k = 0 column.
        let m = matrix((4, 3, 1), 8, |r, c| {
            let y = (r / 4) % 3;
            (1.0 + y as f64) * (2.0 * std::f64::consts::PI * c as f64 / 8.0).cos()
        });
        let d = dispersion(&m, None).unwrap();
        let k0 = 4 / 2;
        for fi in 0..d.f_axis.len() {
            for ki in 0..d.k_axis.len() {
                if ki != k0 {
                    assert!(
                        d.at(fi, ki) < 1e-9 * d.at(fi, k0).max(1.0),
                        "energy leaked to ki={ki}"
                    );
                }
            }
        }
    }

    #[test]
    fn detrend_removes_per_row_means() {
        let mut m = matrix((2, 1, 1), 4, |r, c| r as f64 * 10.0 + c as f64);
        detrend_mean(&mut m);
        for r in 0..2 {
            let sum: f64 = m.row(r).iter().sum();
            assert!(sum.abs() < 1e-12);
        }
    }

    #[test]
    fn pad_time_appends_zeros() {
        let m = matrix((2, 1, 1), 3, |r, c| (r * 3 + c) as f64 + 1.0);
        let p = pad_time(&m, 5).unwrap();
        assert_eq!(p.cols, 5);
        assert_eq!(p.row(0), [1.0, 2.0, 3.0, 0.0, 0.0]);
        assert_eq!(p.row(1), [4.0, 5.0, 6.0, 0.0, 0.0]);
        assert!(matches!(pad_time(&m, 2), Err(AnalysisError::BadPad { .. })));
    }
}
