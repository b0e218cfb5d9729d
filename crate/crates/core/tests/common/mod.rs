//! Shared helpers for the integration suite: a naive DFT oracle that
//! shares no code with the library's FFT path, a sidelobe analyzer for
//! window verification, and small matrix constructors.

// Each test binary compiles this module and uses a different subset.
#![allow(dead_code)]

use std::f64::consts::TAU;

use swan_core::ingest::SpaceTimeMatrix;
use swan_core::ovf::Component;
use swan_core::window::Window2D;

/// Minimal complex arithmetic so the oracle stays independent of the FFT
/// library's types.
#[derive(Clone, Copy, Debug, Default)]
pub struct C {
    pub re: f64,
    pub im: f64,
}

impl C {
    pub fn new(re: f64, im: f64) -> C {
        C { re, im }
    }

    pub fn add(self, o: C) -> C {
        C::new(self.re + o.re, self.im + o.im)
    }

    pub fn mul(self, o: C) -> C {
        C::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }

    pub fn scale(self, s: f64) -> C {
        C::new(self.re * s, self.im * s)
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
}

pub fn cis(theta: f64) -> C {
    C::new(theta.cos(), theta.sin())
}

/// Plain O(N^2) forward DFT: X[q] = sum_n v[n] e^{-2pi i q n / N}.
pub fn dft_forward(v: &[f64]) -> Vec<C> {
    let n = v.len();
    (0..n)
        .map(|q| {
            let mut acc = C::default();
            for (k, &x) in v.iter().enumerate() {
                acc = acc.add(cis(-TAU * (q * k) as f64 / n as f64).scale(x));
            }
            acc
        })
        .collect()
}

pub fn half_len(n: usize) -> usize {
    n / 2 + 1
}

/// Mirror of the fft_spectrum contract computed with the naive DFT:
/// average one-sided magnitude over rows, then peak-normalize.
pub fn naive_fft_spectrum(m: &SpaceTimeMatrix) -> (Vec<f64>, Vec<f64>) {
    let half = half_len(m.cols);
    let mut acc = vec![0.0f64; half];
    for r in 0..m.rows {
        let spectrum = dft_forward(m.row(r));
        for (slot, value) in acc.iter_mut().zip(&spectrum[..half]) {
            *slot += value.abs();
        }
    }
    for slot in &mut acc {
        *slot /= m.rows as f64;
    }
    let peak = acc.iter().cloned().fold(0.0f64, f64::max);
    if peak > 0.0 {
        for slot in &mut acc {
            *slot /= peak;
        }
    }
    let freqs = (0..half).map(|q| q as f64 / (m.cols as f64 * m.dt)).collect();
    (freqs, acc)
}

/// Arithmetic mean over the (y, z) cross-section: A[x][t], x-major.
pub fn cross_section(m: &SpaceTimeMatrix) -> Vec<f64> {
    let (sx, sy, sz) = m.sel_shape;
    let mut a = vec![0.0f64; sx * m.cols];
    for zi in 0..sz {
        for yi in 0..sy {
            for xi in 0..sx {
                let row = m.row(xi + sx * (yi + sy * zi));
                for (t, &v) in row.iter().enumerate() {
                    a[xi * m.cols + t] += v;
                }
            }
        }
    }
    let cells = (sy * sz) as f64;
    for v in &mut a {
        *v /= cells;
    }
    a
}

/// Mirror of the spatial_spectrum contract: per-x one-sided magnitudes of
/// the cross-section average, no normalization.
pub fn naive_spatial_power(m: &SpaceTimeMatrix) -> Vec<f64> {
    let sx = m.sel_shape.0;
    let half = half_len(m.cols);
    let a = cross_section(m);
    let mut power = vec![0.0f64; sx * half];
    for xi in 0..sx {
        let spectrum = dft_forward(&a[xi * m.cols..(xi + 1) * m.cols]);
        for q in 0..half {
            power[xi * half + q] = spectrum[q].abs();
        }
    }
    power
}

/// Mirror of the dispersion contract as one O(N^4) double sum per output
/// bin: forward in time, inverse (unnormalized) in space, k axis shifted
/// so bin sx/2 is k = 0.
pub fn naive_dispersion(m: &SpaceTimeMatrix, window: Option<&Window2D>) -> Vec<f64> {
    let sx = m.sel_shape.0;
    let nt = m.cols;
    let mut a = cross_section(m);
    if let Some(w) = window {
        for xi in 0..sx {
            for t in 0..nt {
                a[xi * nt + t] *= w.get(xi, t);
            }
        }
    }
    let half = half_len(nt);
    let shift = sx.div_ceil(2);
    let mut magnitude = vec![0.0f64; half * sx];
    for q in 0..half {
        for s in 0..sx {
            let p = (s + shift) % sx;
            let mut acc = C::default();
            for xi in 0..sx {
                for t in 0..nt {
                    let angle = -TAU * (q * t) as f64 / nt as f64
                        + TAU * (p * xi) as f64 / sx as f64;
                    acc = acc.add(cis(angle).scale(a[xi * nt + t]));
                }
            }
            magnitude[q * sx + s] = acc.abs();
        }
    }
    magnitude
}

/// Largest absolute difference over the largest oracle magnitude.
pub fn rel_err_inf(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len(), "length mismatch");
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = got
        .iter()
        .zip(want)
        .fold(0.0f64, |m, (g, w)| m.max((g - w).abs()));
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// Magnitudes of the zero-padded DFT of a window, bins 0..=pad_to/2,
/// computed naively (only the window taps contribute).
pub fn padded_dft_magnitude(weights: &[f64], pad_to: usize) -> Vec<f64> {
    let half = pad_to / 2;
    (0..=half)
        .map(|q| {
            let mut acc = C::default();
            for (k, &w) in weights.iter().enumerate() {
                acc = acc.add(cis(-TAU * (q * k) as f64 / pad_to as f64).scale(w));
            }
            acc.abs()
        })
        .collect()
}

/// Sidelobe peak levels in dB relative to the mainlobe, from a one-sided
/// magnitude scan: walks past the mainlobe to its first null, then
/// collects every local maximum.
pub fn sidelobe_levels_db(mags: &[f64]) -> Vec<f64> {
    let peak = mags[0];
    assert!(peak > 0.0, "degenerate spectrum");
    let mut i = 1;
    while i < mags.len() && mags[i] <= mags[i - 1] {
        i += 1;
    }
    let last = mags.len() - 1;
    let mut levels = Vec::new();
    for j in i..=last {
        let rises = mags[j] > mags[j - 1];
        let falls = j == last || mags[j] >= mags[j + 1];
        if rises && falls {
            levels.push(20.0 * (mags[j] / peak).log10());
        }
    }
    levels
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn std_dev(values: &[f64]) -> f64 {
    let mu = mean(values);
    (values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Builds a matrix literal with the given selection shape and fill.
pub fn matrix(
    sel: (usize, usize, usize),
    cols: usize,
    dt: f64,
    dx: f64,
    mut fill: impl FnMut(usize, usize) -> f64,
) -> SpaceTimeMatrix {
    let rows = sel.0 * sel.1 * sel.2;
    let mut data = vec![0.0f64; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            data[r * cols + c] = fill(r, c);
        }
    }
    SpaceTimeMatrix {
        rows,
        cols,
        data,
        dt,
        dx,
        x_origin: dx / 2.0,
        sel_shape: sel,
        component: Component::Z,
    }
}
