//! Deterministic synthetic-signal generators.
//!
//! Every generator is a pure function of its parameters and a seed; streams
//! are produced by the ChaCha8 generator so identical seeds give identical
//! samples on every platform. Generators also return the ground truth they
//! embedded (spike indices, saccade onsets and analytic peak velocities) so
//! tests can score detectors and filters against known answers.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::recording::Recording;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    WhiteGaussian,
    WhitePlusOneSampleSpikes,
    WhitePlusTwoSampleSpikes,
}

#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub sigma_deg: f64,
    pub spike_rate_per_s: f64,
    pub spike_amplitude_deg: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn white(sigma_deg: f64, seed: u64) -> NoiseModel {
        NoiseModel {
            kind: NoiseKind::WhiteGaussian,
            sigma_deg,
            spike_rate_per_s: 0.0,
            spike_amplitude_deg: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma_deg < 0.0 || self.spike_rate_per_s < 0.0 {
            return Err(Error::Invalid(
                "noise sigma and spike rate must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// A generated noise stream with the indices where spikes were injected.
/// For two-sample spikes each entry is the first index of the pair.
#[derive(Debug, Clone)]
pub struct NoiseRealization {
    pub samples: Vec<f64>,
    pub spike_starts: Vec<usize>,
}

/// Seeded noise stream with ground truth.
///
/// Spikes are placed by seeded draws with at least 3 clean samples between
/// spike sites and none within 3 samples of either end, so each injected
/// spike is isolated and scoreable on its own.
pub fn gen_noise_with_truth(model: &NoiseModel, n: usize, fs_hz: f64) -> Result<NoiseRealization> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let mut samples = vec![0.0; n];
    if model.sigma_deg > 0.0 {
        let normal = Normal::new(0.0, model.sigma_deg).map_err(|e| Error::Invalid(e.to_string()))?;
        for v in samples.iter_mut() {
            *v = normal.sample(&mut rng);
        }
    }

    let spike_width = match model.kind {
        NoiseKind::WhiteGaussian => 0usize,
        NoiseKind::WhitePlusOneSampleSpikes => 1,
        NoiseKind::WhitePlusTwoSampleSpikes => 2,
    };
    let mut spike_starts = Vec::new();
    if spike_width > 0 && model.spike_rate_per_s > 0.0 && n > 8 {
        let want = (model.spike_rate_per_s * n as f64 / fs_hz).round() as usize;
        let min_gap = spike_width + 3;
        let mut attempts = 0;
        while spike_starts.len() < want && attempts < want * 50 {
            attempts += 1;
            let idx = rng.gen_range(3..n - 3 - spike_width);
            if spike_starts
                .iter()
                .all(|&s: &usize| idx.abs_diff(s) >= min_gap)
            {
                spike_starts.push(idx);
            }
        }
        spike_starts.sort_unstable();
        for &s in &spike_starts {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            for k in 0..spike_width {
                samples[s + k] += sign * model.spike_amplitude_deg;
            }
        }
    }
    Ok(NoiseRealization {
        samples,
        spike_starts,
    })
}

/// Seeded noise stream without the ground-truth sidecar.
pub fn gen_noise(model: &NoiseModel, n: usize, fs_hz: f64) -> Result<Vec<f64>> {
    Ok(gen_noise_with_truth(model, n, fs_hz)?.samples)
}

/// x[i] = A * sin(2 pi f i / fs + phi).
pub fn gen_sine(
    freq_hz: f64,
    amplitude_deg: f64,
    phase_rad: f64,
    n: usize,
    fs_hz: f64,
) -> Result<Vec<f64>> {
    if !(freq_hz >= 0.0 && freq_hz < fs_hz / 2.0) {
        return Err(Error::AliasRange {
            freq_hz,
            nyquist_hz: fs_hz / 2.0,
        });
    }
    Ok((0..n)
        .map(|i| amplitude_deg * (2.0 * PI * freq_hz * i as f64 / fs_hz + phase_rad).sin())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileShape {
    RaisedCosine,
}

/// One synthetic saccade: a raised-cosine displacement step. The analytic
/// peak velocity of this profile is pi * A / (2 * D).
#[derive(Debug, Clone, Copy)]
pub struct SaccadeProfile {
    pub amplitude_deg: f64,
    pub duration_ms: f64,
    pub shape: ProfileShape,
    pub start_ms: f64,
}

impl SaccadeProfile {
    pub fn peak_velocity_deg_s(&self) -> f64 {
        PI * self.amplitude_deg.abs() / (2.0 * self.duration_ms / 1000.0)
    }

    fn displacement_at(&self, t_ms: f64) -> f64 {
        if t_ms <= self.start_ms {
            0.0
        } else if t_ms >= self.start_ms + self.duration_ms {
            self.amplitude_deg
        } else {
            let ph = PI * (t_ms - self.start_ms) / self.duration_ms;
            self.amplitude_deg * (1.0 - ph.cos()) / 2.0
        }
    }
}

/// Ground truth accompanying a generated recording.
#[derive(Debug, Clone, Copy)]
pub struct SaccadeTruth {
    pub onset_ms: f64,
    pub duration_ms: f64,
    pub amplitude_deg: f64,
    pub peak_velocity_deg_s: f64,
}

/// Sum of raised-cosine displacement steps on the horizontal channel plus
/// noise, packaged as a Recording with its ground-truth records.
pub fn gen_saccade_recording(
    profiles: &[SaccadeProfile],
    noise: &NoiseModel,
    n: usize,
    fs_hz: f64,
) -> Result<(Recording, Vec<SaccadeTruth>)> {
    let total_ms = n as f64 * 1000.0 / fs_hz;
    let mut sorted: Vec<&SaccadeProfile> = profiles.iter().collect();
    sorted.sort_by(|a, b| a.start_ms.partial_cmp(&b.start_ms).unwrap());
    let mut prev_end = f64::NEG_INFINITY;
    for p in &sorted {
        if p.amplitude_deg == 0.0 || p.duration_ms <= 0.0 {
            return Err(Error::Invalid(
                "profile amplitude must be nonzero and duration positive".into(),
            ));
        }
        if p.start_ms < 0.0 || p.start_ms + p.duration_ms > total_ms {
            return Err(Error::Invalid(format!(
                "profile at {} ms falls outside the {total_ms} ms recording",
                p.start_ms
            )));
        }
        if p.start_ms < prev_end {
            return Err(Error::OverlappingProfiles(p.start_ms));
        }
        prev_end = p.start_ms + p.duration_ms;
    }

    let noise = gen_noise(noise, n, fs_hz)?;
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let t_ms = i as f64 * 1000.0 / fs_hz;
            sorted.iter().map(|p| p.displacement_at(t_ms)).sum::<f64>() + noise[i]
        })
        .collect();
    let rec = Recording::from_xy(fs_hz, x, vec![0.0; n])?;
    let truth = sorted
        .iter()
        .map(|p| SaccadeTruth {
            onset_ms: p.start_ms,
            duration_ms: p.duration_ms,
            amplitude_deg: p.amplitude_deg.abs(),
            peak_velocity_deg_s: p.peak_velocity_deg_s(),
        })
        .collect();
    Ok((rec, truth))
}
