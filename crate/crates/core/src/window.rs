//! Dolph-Chebyshev windows for spectral-leakage suppression in the
//! dispersion analysis.
//!
//! Construction follows the classical recipe: sample the Chebyshev
//! polynomial in the frequency domain, transform to the time domain, and
//! symmetrize. Even lengths use the half-sample-symmetric variant. The
//! result is equiripple: every sidelobe of the window's DFT sits at the
//! requested attenuation below the mainlobe.

use std::fmt;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// A normalized window: symmetric weights with peak 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Window1D {
    pub length: usize,
    pub attenuation_db: f64,
    pub weights: Vec<f64>,
}

/// Outer product of two 1D windows, row-major with rows = x and cols = t,
/// shaped to multiply an (x, t) array elementwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Window2D {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
}

impl Window2D {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.cols + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowError {
    BadLength(usize),
    BadAttenuation(f64),
}

impl fmt::Display for WindowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowError::BadLength(n) => {
                write!(f, "window length {n} is too short (need at least 2 points)")
            }
            WindowError::BadAttenuation(db) => {
                write!(f, "sidelobe attenuation {db} dB must be a positive number")
            }
        }
    }
}

impl std::error::Error for WindowError {}

/// Chebyshev polynomial of the given order, valid on the whole real line.
fn cheb_poly(order: f64, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (order * x.acos()).cos()
    } else if x > 1.0 {
        (order * x.acosh()).cosh()
    } else {
        let magnitude = (order * (-x).acosh()).cosh();
        if (order as u64) % 2 == 0 {
            magnitude
        } else {
            -magnitude
        }
    }
}

/// Builds a Dolph-Chebyshev window whose DFT sidelobes all sit
/// `attenuation_db` below the mainlobe peak.
pub fn chebyshev_window(length: usize, attenuation_db: f64) -> Result<Window1D, WindowError> {
    if length < 2 {
        return Err(WindowError::BadLength(length));
    }
    if !(attenuation_db.is_finite() && attenuation_db > 0.0) {
        return Err(WindowError::BadAttenuation(attenuation_db));
    }

    let m = length;
    let order = (m - 1) as f64;
    let beta = ((10f64.powf(attenuation_db / 20.0)).acosh() / order).cosh();

    // Frequency-domain samples of the Chebyshev polynomial.
    let mut freq = vec![Complex64::new(0.0, 0.0); m];
    for (k, slot) in freq.iter_mut().enumerate() {
        let x = beta * (std::f64::consts::PI * k as f64 / m as f64).cos();
        let p = cheb_poly(order, x);
        if m % 2 == 1 {
            *slot = Complex64::new(p, 0.0);
        } else {
            // Half-sample shift so the even-length window comes out
            // symmetric about the midpoint between the two center taps.
            let phase = std::f64::consts::PI * k as f64 / m as f64;
            *slot = Complex64::new(p * phase.cos(), p * phase.sin());
        }
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut freq);

    let mut weights = vec![0.0f64; m];
    if m % 2 == 1 {
        let n = (m + 1) / 2;
        for j in 0..n {
            let v = freq[j].re;
            weights[n - 1 + j] = v;
            weights[n - 1 - j] = v;
        }
    } else {
        let n = m / 2 + 1;
        for j in 1..n {
            let v = freq[j].re;
            weights[n - 1 + j - 1] = v;
            weights[n - 1 - j] = v;
        }
    }
    let peak = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for w in &mut weights {
        *w /= peak;
    }
    Ok(Window1D { length, attenuation_db, weights })
}

/// Outer product W[i][j] = wx[i] * wt[j], sized to the (x, t) array the
/// dispersion analysis multiplies it into.
pub fn window_2d(wt: &Window1D, wx: &Window1D) -> Window2D {
    let rows = wx.length;
    let cols = wt.length;
    let mut weights = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            weights.push(wx.weights[i] * wt.weights[j]);
        }
    }
    Window2D { rows, cols, weights }
}
