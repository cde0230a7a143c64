//! Butterworth IIR design and zero-phase application.
//!
//! Filters are designed from the analog Butterworth prototype, frequency
//! pre-warped and mapped to discrete time with the bilinear transform, then
//! factored into second-order sections for numerical robustness at higher
//! orders. Zero-phase filtering runs the cascade forward, reverses the
//! result and runs it backward, squaring the magnitude response and
//! cancelling phase distortion.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// One second-order section; a0 is normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sos {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Sos {
    /// Transfer function value on the unit circle at normalized frequency w.
    fn eval(&self, z_inv: Complex64) -> Complex64 {
        let num = Complex64::new(self.b0, 0.0) + z_inv * (self.b1 + z_inv * self.b2);
        let den = Complex64::new(1.0, 0.0) + z_inv * (self.a1 + z_inv * self.a2);
        num / den
    }

    /// Pole magnitudes of this section.
    fn pole_magnitudes(&self) -> [f64; 2] {
        // roots of z^2 + a1 z + a2
        let disc = self.a1 * self.a1 - 4.0 * self.a2;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            [
                ((-self.a1 + sq) / 2.0).abs(),
                ((-self.a1 - sq) / 2.0).abs(),
            ]
        } else {
            let m = self.a2.sqrt(); // |pole|^2 = a2 for complex pair
            [m, m]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    Lowpass,
    Highpass,
    Bandpass,
}

/// Design provenance carried alongside the realized coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    pub kind: DesignKind,
    pub order: usize,
    pub edges_hz: Vec<f64>,
    pub sample_rate_hz: f64,
}

/// A designed filter realized as a cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct BiquadCascade {
    pub sections: Vec<Sos>,
    pub overall_gain: f64,
    pub design: FilterSpec,
}

/// One analysis band. `low_hz == 0` means low-pass, `high_hz == Nyquist`
/// means high-pass, anything else is band-pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    pub order: usize,
}

impl BandSpec {
    pub fn validate(&self, fs_hz: f64) -> Result<()> {
        let nyq = fs_hz / 2.0;
        if !(self.low_hz >= 0.0 && self.low_hz < self.high_hz && self.high_hz <= nyq) {
            return Err(Error::Design(format!(
                "band {}..{} Hz invalid for fs {} Hz",
                self.low_hz, self.high_hz, fs_hz
            )));
        }
        if self.order < 1 {
            return Err(Error::Design("band order must be >= 1".into()));
        }
        Ok(())
    }
}

/// The five analysis bands, given interior edges (e.g. 50, 75, 100, 300 Hz).
/// Adjacent bands start 1 Hz above the previous edge, mirroring the
/// 0-50 / 51-75 / 76-100 / 101-300 / 301-500 Hz scheme.
pub fn bands_from_edges(edges_hz: &[f64], fs_hz: f64, order: usize) -> Result<Vec<BandSpec>> {
    if edges_hz.is_empty() {
        return Err(Error::Design("need at least one band edge".into()));
    }
    let nyq = fs_hz / 2.0;
    let mut bands = Vec::with_capacity(edges_hz.len() + 1);
    let mut low = 0.0;
    for &edge in edges_hz {
        bands.push(BandSpec {
            low_hz: low,
            high_hz: edge,
            order,
        });
        low = edge + 1.0;
    }
    bands.push(BandSpec {
        low_hz: low,
        high_hz: nyq,
        order,
    });
    for b in &bands {
        b.validate(fs_hz)?;
    }
    Ok(bands)
}

/// Bilinear frequency pre-warp: digital f (Hz) to analog rad/s.
fn prewarp(f_hz: f64, fs_hz: f64) -> f64 {
    2.0 * fs_hz * (PI * f_hz / fs_hz).tan()
}

/// Analog Butterworth prototype poles for unit cutoff, left half-plane.
fn prototype_poles(order: usize) -> Vec<Complex64> {
    (0..order)
        .map(|k| {
            let theta = PI * (2.0 * k as f64 + order as f64 + 1.0) / (2.0 * order as f64);
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect()
}

/// Bilinear transform of an analog pole/zero to the z-plane.
fn bilinear(s: Complex64, fs_hz: f64) -> Complex64 {
    let two_fs = Complex64::new(2.0 * fs_hz, 0.0);
    (two_fs + s) / (two_fs - s)
}

/// Design a Butterworth filter as a biquad cascade.
///
/// `edges_hz` holds one frequency for lowpass/highpass and two for bandpass.
/// Single-pass magnitude at each design edge is the -3 dB point.
pub fn design_butterworth(
    kind: DesignKind,
    order: usize,
    edges_hz: &[f64],
    fs_hz: f64,
) -> Result<BiquadCascade> {
    if !(1..=12).contains(&order) {
        return Err(Error::Design(format!("order {order} outside [1, 12]")));
    }
    if !(fs_hz > 0.0) {
        return Err(Error::Design("sample rate must be positive".into()));
    }
    let nyq = fs_hz / 2.0;
    let expected_edges = match kind {
        DesignKind::Lowpass | DesignKind::Highpass => 1,
        DesignKind::Bandpass => 2,
    };
    if edges_hz.len() != expected_edges {
        return Err(Error::Design(format!(
            "{kind:?} needs {expected_edges} edge(s), got {}",
            edges_hz.len()
        )));
    }
    for &e in edges_hz {
        if !(e > 0.0 && e < nyq) {
            return Err(Error::Design(format!("edge {e} Hz outside (0, {nyq}) Hz")));
        }
    }

    let proto = prototype_poles(order);
    // Analog poles after the band transform, plus the digital zero locations
    // and the reference frequency where gain is normalized to 1.
    let (analog_poles, zeros, ref_hz): (Vec<Complex64>, Vec<f64>, f64) = match kind {
        DesignKind::Lowpass => {
            let wc = prewarp(edges_hz[0], fs_hz);
            let poles = proto.iter().map(|&p| p * wc).collect();
            (poles, vec![-1.0; order], 0.0)
        }
        DesignKind::Highpass => {
            let wc = prewarp(edges_hz[0], fs_hz);
            let poles = proto.iter().map(|&p| Complex64::new(wc, 0.0) / p).collect();
            (poles, vec![1.0; order], nyq)
        }
        DesignKind::Bandpass => {
            if edges_hz[0] >= edges_hz[1] {
                return Err(Error::Design("bandpass edges must be increasing".into()));
            }
            let w1 = prewarp(edges_hz[0], fs_hz);
            let w2 = prewarp(edges_hz[1], fs_hz);
            let bw = w2 - w1;
            let w0sq = w1 * w2;
            let mut poles = Vec::with_capacity(2 * order);
            for &p in &proto {
                // s_lp = p maps to roots of s^2 - p*bw*s + w0^2 = 0
                let half = p * (bw / 2.0);
                let root = (half * half - w0sq).sqrt();
                poles.push(half + root);
                poles.push(half - root);
            }
            // n zeros at z = 1 and n at z = -1
            let mut zeros = vec![1.0; order];
            zeros.extend(std::iter::repeat(-1.0).take(order));
            // warped geometric center mapped back to digital frequency
            let f0 = (fs_hz / PI) * (w0sq.sqrt() / (2.0 * fs_hz)).atan();
            (poles, zeros, f0)
        }
    };

    let digital_poles: Vec<Complex64> = analog_poles.iter().map(|&s| bilinear(s, fs_hz)).collect();
    for p in &digital_poles {
        if p.norm() >= 1.0 {
            return Err(Error::Unstable(p.norm()));
        }
    }

    let sections = pair_into_sections(&digital_poles, &zeros)?;
    let mut cascade = BiquadCascade {
        sections,
        overall_gain: 1.0,
        design: FilterSpec {
            kind,
            order,
            edges_hz: edges_hz.to_vec(),
            sample_rate_hz: fs_hz,
        },
    };

    // Normalize so the magnitude at the reference frequency is exactly 1.
    let (g, _) = cascade.magnitude_phase_one(ref_hz);
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::Design(format!(
            "degenerate gain {g} at reference {ref_hz} Hz"
        )));
    }
    cascade.overall_gain = 1.0 / g;
    Ok(cascade)
}

/// Group digital poles into conjugate pairs and realize each pair as one
/// section, distributing the real zeros two per section.
fn pair_into_sections(poles: &[Complex64], zeros: &[f64]) -> Result<Vec<Sos>> {
    let mut complex: Vec<Complex64> = Vec::new();
    let mut real: Vec<f64> = Vec::new();
    for &p in poles {
        if p.im.abs() < 1e-12 {
            real.push(p.re);
        } else if p.im > 0.0 {
            complex.push(p);
        }
        // negative-imag poles are the conjugates of the collected ones
    }
    if complex.len() * 2 + real.len() != poles.len() {
        return Err(Error::Design("conjugate pole pairing failed".into()));
    }

    // Sort for deterministic section order: slowest poles last so the most
    // selective section runs at the end of the cascade.
    complex.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    real.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());

    let mut zero_iter = zeros.iter().copied();
    let mut sections = Vec::new();
    for p in complex {
        let z1 = zero_iter.next();
        let z2 = zero_iter.next();
        sections.push(section_from(p.re * 2.0, p.norm_sqr(), z1, z2));
    }
    while real.len() >= 2 {
        let p2 = real.pop().unwrap();
        let p1 = real.pop().unwrap();
        let z1 = zero_iter.next();
        let z2 = zero_iter.next();
        sections.push(section_from(p1 + p2, p1 * p2, z1, z2));
    }
    if let Some(p) = real.pop() {
        // first-order remainder: one pole, one zero
        let z = zero_iter.next();
        let (b0, b1) = match z {
            Some(z) => (1.0, -z),
            None => (1.0, 0.0),
        };
        sections.push(Sos {
            b0,
            b1,
            b2: 0.0,
            a1: -p,
            a2: 0.0,
        });
    }
    Ok(sections)
}

/// Build a section from pole-pair sums/products and up to two real zeros.
fn section_from(pole_sum: f64, pole_prod: f64, z1: Option<f64>, z2: Option<f64>) -> Sos {
    let (b0, b1, b2) = match (z1, z2) {
        (Some(z1), Some(z2)) => (1.0, -(z1 + z2), z1 * z2),
        (Some(z1), None) => (1.0, -z1, 0.0),
        (None, _) => (1.0, 0.0, 0.0),
    };
    Sos {
        b0,
        b1,
        b2,
        a1: -pole_sum,
        a2: pole_prod,
    }
}

impl BiquadCascade {
    pub fn sample_rate_hz(&self) -> f64 {
        self.design.sample_rate_hz
    }

    /// True when every pole lies strictly inside the unit circle.
    pub fn is_stable(&self) -> bool {
        self.sections
            .iter()
            .flat_map(|s| s.pole_magnitudes())
            .all(|m| m < 1.0)
    }

    /// Single-pass complex response at one frequency.
    pub fn response_at(&self, f_hz: f64) -> Complex64 {
        let w = 2.0 * PI * f_hz / self.design.sample_rate_hz;
        let z_inv = Complex64::new(w.cos(), -w.sin());
        let mut h = Complex64::new(self.overall_gain, 0.0);
        for s in &self.sections {
            h *= s.eval(z_inv);
        }
        h
    }

    fn magnitude_phase_one(&self, f_hz: f64) -> (f64, f64) {
        let h = self.response_at(f_hz);
        (h.norm(), h.arg())
    }

    /// Single-pass gain and phase sampled at the given frequencies.
    pub fn magnitude_phase_at(&self, freqs_hz: &[f64]) -> (Vec<f64>, Vec<f64>) {
        freqs_hz
            .iter()
            .map(|&f| self.magnitude_phase_one(f))
            .unzip()
    }

    /// Padding length used by [`filtfilt`]: 3 * (2 * order + 1).
    pub fn pad_len(&self) -> usize {
        3 * (2 * self.design.order + 1)
    }
}

/// Steady-state unit-step section state for a transposed direct-form II
/// biquad, used to suppress startup transients in filtfilt.
fn section_step_state(s: &Sos) -> ([f64; 2], f64) {
    let dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    let z2 = s.b2 - s.a2 * dc;
    let z1 = s.b1 - s.a1 * dc + z2;
    ([z1, z2], dc)
}

/// Run the cascade once over `x` with initial conditions matched to the
/// first input sample, so constant inputs produce constant outputs.
fn sosfilt(cascade: &BiquadCascade, x: &[f64]) -> Vec<f64> {
    let mut y: Vec<f64> = x.iter().map(|&v| v * cascade.overall_gain).collect();
    let x0 = if x.is_empty() {
        0.0
    } else {
        x[0] * cascade.overall_gain
    };
    let mut level = x0;
    for s in &cascade.sections {
        let (zi, dc) = section_step_state(s);
        let mut z1 = zi[0] * level;
        let mut z2 = zi[1] * level;
        for v in y.iter_mut() {
            let input = *v;
            let out = s.b0 * input + z1;
            z1 = s.b1 * input - s.a1 * out + z2;
            z2 = s.b2 * input - s.a2 * out;
            *v = out;
        }
        level *= dc;
    }
    y
}

/// Zero-phase forward-backward filtering.
///
/// Both ends are extended by odd-symmetric reflection of length
/// 3 * (2 * order + 1); the extensions are removed before return. The
/// effective magnitude response is the square of the single-pass response
/// and the effective phase is zero.
pub fn filtfilt(cascade: &BiquadCascade, x: &[f64]) -> Result<Vec<f64>> {
    let pad = cascade.pad_len();
    if x.len() <= pad {
        return Err(Error::TooShort {
            min: pad + 1,
            got: x.len(),
        });
    }
    for (i, v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(i));
        }
    }

    let n = x.len();
    let mut ext = Vec::with_capacity(n + 2 * pad);
    // odd reflection about the first sample
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    // odd reflection about the last sample
    for i in 1..=pad {
        ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }

    let mut y = sosfilt(cascade, &ext);
    y.reverse();
    let mut y = sosfilt(cascade, &y);
    y.reverse();

    Ok(y[pad..pad + n].to_vec())
}

/// Design the zero-phase component filter for one band.
pub fn design_band_filter(band: &BandSpec, fs_hz: f64) -> Result<BiquadCascade> {
    band.validate(fs_hz)?;
    let nyq = fs_hz / 2.0;
    if band.low_hz == 0.0 {
        design_butterworth(DesignKind::Lowpass, band.order, &[band.high_hz], fs_hz)
    } else if band.high_hz >= nyq {
        design_butterworth(DesignKind::Highpass, band.order, &[band.low_hz], fs_hz)
    } else {
        design_butterworth(
            DesignKind::Bandpass,
            band.order,
            &[band.low_hz, band.high_hz],
            fs_hz,
        )
    }
}

/// Split a signal into per-band zero-phase filtered components.
pub fn band_decompose(x: &[f64], bands: &[BandSpec], fs_hz: f64) -> Result<Vec<Vec<f64>>> {
    bands
        .iter()
        .map(|band| {
            let filt = design_band_filter(band, fs_hz)?;
            filtfilt(&filt, x)
        })
        .collect()
}
