//! Amplitude/phase spectra of fixed-length segments and empirical filter
//! frequency-response estimation.
//!
//! Each segment is detrended with a 2nd-order polynomial, Hann-windowed and
//! transformed; the single-sided amplitude is corrected for the window's
//! coherent gain so a unit bin-centered sine reads 1.0. Spectra of many
//! segments are averaged in the magnitude/phase domain, and the frequency
//! response of a filter is the per-bin ratio of filtered over unfiltered
//! averaged amplitude (the B/A ratio, which is invariant to the amplitude
//! scaling convention).

use rustfft::{num_complex::Complex, FftPlanner};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Hann coherent gain, sum(w)/n in the long-window limit.
pub const HANN_COHERENT_GAIN: f64 = 0.5;

/// Single-sided amplitude and phase on a fixed frequency grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub freqs_hz: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub phase_rad: Vec<f64>,
    pub n_segments_averaged: usize,
    pub segment_length: usize,
}

/// Per-bin gain of a filtered spectrum over its unfiltered counterpart.
#[derive(Debug, Clone)]
pub struct FrequencyResponse {
    pub freqs_hz: Vec<f64>,
    pub gain: Vec<f64>,
    pub gain_db: Vec<f64>,
    pub phase_diff_rad: Vec<f64>,
    /// Bins where the unfiltered amplitude was zero but the filtered one
    /// was not; the gain there is meaningless.
    pub undefined_bins: Vec<usize>,
}

/// Residuals of the least-squares quadratic fit over sample index.
pub fn detrend_poly2(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 3 {
        return Err(Error::TooShort { min: 3, got: n });
    }
    for (i, v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(i));
        }
    }
    // Centered index keeps the normal equations well conditioned and makes
    // the odd cross-moments vanish.
    let c = (n as f64 - 1.0) / 2.0;
    let (mut s2, mut s4) = (0.0, 0.0);
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (i, &v) in x.iter().enumerate() {
        let t = i as f64 - c;
        let t2 = t * t;
        s2 += t2;
        s4 += t2 * t2;
        m0 += v;
        m1 += v * t;
        m2 += v * t2;
    }
    let nf = n as f64;
    // [ n   0   s2 ] [a]   [m0]
    // [ 0   s2  0  ] [b] = [m1]
    // [ s2  0   s4 ] [c]   [m2]
    let det = nf * s4 - s2 * s2;
    let a = (s4 * m0 - s2 * m2) / det;
    let b = m1 / s2;
    let q = (nf * m2 - s2 * m0) / det;
    Ok(x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let t = i as f64 - c;
            v - (a + b * t + q * t * t)
        })
        .collect())
}

/// Hann window, w[k] = 0.5 * (1 - cos(2 pi k / (n - 1))).
pub fn hann_window(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::TooShort { min: 2, got: n });
    }
    Ok((0..n)
        .map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / (n as f64 - 1.0)).cos()))
        .collect())
}

/// Detrend, window and transform one fixed-length segment.
///
/// Amplitude scaling is 2*|X[k]| / (N * CG) with CG = 0.5, except the DC and
/// Nyquist bins which drop the factor 2 (they have no mirror bin).
pub fn segment_spectrum(x: &[f64], fs_hz: f64, n_expected: usize) -> Result<Spectrum> {
    let n = x.len();
    if n != n_expected {
        return Err(Error::SegmentLength {
            expected: n_expected,
            got: n,
        });
    }
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let detrended = detrend_poly2(x)?;
    let window = hann_window(n)?;

    let mut buf: Vec<Complex<f64>> = detrended
        .iter()
        .zip(&window)
        .map(|(&v, &w)| Complex::new(v * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let scale = 1.0 / (n as f64 * HANN_COHERENT_GAIN);
    let mut freqs = Vec::with_capacity(half + 1);
    let mut amplitude = Vec::with_capacity(half + 1);
    let mut phase = Vec::with_capacity(half + 1);
    for k in 0..=half {
        freqs.push(k as f64 * fs_hz / n as f64);
        let factor = if k == 0 || k == half { 1.0 } else { 2.0 };
        amplitude.push(factor * buf[k].norm() * scale);
        phase.push(buf[k].arg());
    }
    Ok(Spectrum {
        freqs_hz: freqs,
        amplitude,
        phase_rad: phase,
        n_segments_averaged: 1,
        segment_length: n,
    })
}

fn wrap_phase(p: f64) -> f64 {
    let mut p = p.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

fn grids_match(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9)
}

/// Per-bin arithmetic mean of amplitudes and of wrapped phases, weighted by
/// each input's segment count so partial averages combine associatively.
pub fn average_spectra(spectra: &[Spectrum]) -> Result<Spectrum> {
    let first = spectra.first().ok_or(Error::EmptySpectra)?;
    let bins = first.freqs_hz.len();
    let mut amplitude = vec![0.0; bins];
    let mut phase = vec![0.0; bins];
    let mut total = 0usize;
    for s in spectra {
        if !grids_match(&s.freqs_hz, &first.freqs_hz) {
            return Err(Error::GridMismatch);
        }
        let w = s.n_segments_averaged as f64;
        for k in 0..bins {
            amplitude[k] += w * s.amplitude[k];
            phase[k] += w * wrap_phase(s.phase_rad[k]);
        }
        total += s.n_segments_averaged;
    }
    let inv = 1.0 / total as f64;
    for k in 0..bins {
        amplitude[k] *= inv;
        phase[k] *= inv;
    }
    Ok(Spectrum {
        freqs_hz: first.freqs_hz.clone(),
        amplitude,
        phase_rad: phase,
        n_segments_averaged: total,
        segment_length: first.segment_length,
    })
}

/// Empirical frequency response: gain[k] = filtered amplitude over
/// unfiltered amplitude. Bins where both are zero report gain 0; bins where
/// only the unfiltered side is zero are flagged in `undefined_bins`.
pub fn estimate_frequency_response(
    unfiltered: &Spectrum,
    filtered: &Spectrum,
) -> Result<FrequencyResponse> {
    if !grids_match(&unfiltered.freqs_hz, &filtered.freqs_hz) {
        return Err(Error::GridMismatch);
    }
    if unfiltered.n_segments_averaged != filtered.n_segments_averaged {
        return Err(Error::Invalid(format!(
            "segment counts differ: {} unfiltered vs {} filtered",
            unfiltered.n_segments_averaged, filtered.n_segments_averaged
        )));
    }
    let bins = unfiltered.freqs_hz.len();
    let mut gain = Vec::with_capacity(bins);
    let mut gain_db = Vec::with_capacity(bins);
    let mut phase_diff = Vec::with_capacity(bins);
    let mut undefined = Vec::new();
    for k in 0..bins {
        let a = unfiltered.amplitude[k];
        let b = filtered.amplitude[k];
        let g = if a == 0.0 {
            if b != 0.0 {
                undefined.push(k);
            }
            0.0
        } else {
            b / a
        };
        gain.push(g);
        gain_db.push(if g > 0.0 {
            20.0 * g.log10()
        } else {
            f64::NEG_INFINITY
        });
        phase_diff.push(wrap_phase(
            filtered.phase_rad[k] - unfiltered.phase_rad[k],
        ));
    }
    Ok(FrequencyResponse {
        freqs_hz: unfiltered.freqs_hz.clone(),
        gain,
        gain_db,
        phase_diff_rad: phase_diff,
        undefined_bins: undefined,
    })
}
