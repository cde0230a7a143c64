//! Velocity computation, fixation-segment selection and basic saccade
//! detection.
//!
//! Velocity uses a six-point central difference, v[i] = (p[i+3] - p[i-3]) *
//! fs / 6, masked within 3 samples of span edges. The saccade detector is
//! deliberately simple plumbing (velocity threshold with hysteresis); it is
//! not a reimplementation of any published event-detection algorithm, and
//! every threshold is configurable.

use crate::error::{Error, Result};
use crate::recording::{contiguous_valid_spans, Recording};

/// Component velocities and speed in deg/s with a defined-sample mask.
#[derive(Debug, Clone)]
pub struct VelocitySeries {
    pub vx: Vec<f64>,
    pub vy: Vec<f64>,
    pub speed: Vec<f64>,
    pub defined_mask: Vec<bool>,
    pub sample_rate_hz: f64,
}

/// One detected saccade with main-sequence metrics.
#[derive(Debug, Clone, Copy)]
pub struct SaccadeRecord {
    pub onset_index: usize,
    pub offset_index: usize,
    /// Euclidean start-to-end displacement, not path length.
    pub amplitude_deg: f64,
    pub peak_velocity_deg_s: f64,
    pub duration_ms: f64,
}

/// Six-point difference velocity over one contiguous span.
pub fn velocity_six_point(x: &[f64], y: &[f64], fs_hz: f64) -> Result<VelocitySeries> {
    let n = x.len();
    if n < 7 {
        return Err(Error::TooShort { min: 7, got: n });
    }
    if y.len() != n {
        return Err(Error::Invalid(format!(
            "x and y lengths differ: {n} vs {}",
            y.len()
        )));
    }
    let mut vx = vec![0.0; n];
    let mut vy = vec![0.0; n];
    let mut speed = vec![0.0; n];
    let mut mask = vec![false; n];
    let scale = fs_hz / 6.0;
    for i in 3..n - 3 {
        vx[i] = (x[i + 3] - x[i - 3]) * scale;
        vy[i] = (y[i + 3] - y[i - 3]) * scale;
        speed[i] = (vx[i] * vx[i] + vy[i] * vy[i]).sqrt();
        mask[i] = true;
    }
    Ok(VelocitySeries {
        vx,
        vy,
        speed,
        defined_mask: mask,
        sample_rate_hz: fs_hz,
    })
}

/// Parameters for fixation-segment selection.
#[derive(Debug, Clone, Copy)]
pub struct SegmentConfig {
    /// Block size tiled over each valid span.
    pub block: usize,
    /// Sub-segment size the surviving blocks are split into.
    pub sub: usize,
    /// Strict speed veto: a block containing any defined speed > vmax is
    /// dropped. Undefined speeds (span edges) never veto.
    pub vmax_deg_s: f64,
    /// Veto on 2-D speed when true, on |horizontal velocity| otherwise.
    pub two_dimensional_speed: bool,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            block: 2048,
            sub: 256,
            vmax_deg_s: 25.0,
            two_dimensional_speed: true,
        }
    }
}

/// Absolute index range of one selected sub-segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentRange {
    pub start: usize,
    pub length: usize,
}

/// Tile valid spans with non-overlapping blocks, veto blocks containing
/// above-threshold speeds, and split survivors into sub-segments. Returns
/// absolute index ranges so callers can slice any channel (or a filtered
/// copy of the recording) at the same positions.
pub fn select_fixation_segment_ranges(
    rec: &Recording,
    cfg: &SegmentConfig,
) -> Result<Vec<SegmentRange>> {
    if cfg.sub == 0 || cfg.block == 0 || cfg.block % cfg.sub != 0 {
        return Err(Error::Invalid(format!(
            "block {} must be a positive multiple of sub {}",
            cfg.block, cfg.sub
        )));
    }
    let mut ranges = Vec::new();
    for span in contiguous_valid_spans(rec, cfg.block) {
        let x = &rec.x_deg[span.range()];
        let y = &rec.y_deg[span.range()];
        let vel = velocity_six_point(x, y, rec.sample_rate_hz)?;
        let n_blocks = span.length / cfg.block;
        for b in 0..n_blocks {
            let start = b * cfg.block;
            let end = start + cfg.block;
            let vetoed = (start..end).any(|i| {
                vel.defined_mask[i]
                    && if cfg.two_dimensional_speed {
                        vel.speed[i] > cfg.vmax_deg_s
                    } else {
                        vel.vx[i].abs() > cfg.vmax_deg_s
                    }
            });
            if vetoed {
                continue;
            }
            for s in 0..cfg.block / cfg.sub {
                ranges.push(SegmentRange {
                    start: span.start_index + start + s * cfg.sub,
                    length: cfg.sub,
                });
            }
        }
    }
    Ok(ranges)
}

/// The selected sub-segments as arrays of the horizontal (or vertical)
/// channel.
pub fn select_fixation_segments(
    rec: &Recording,
    cfg: &SegmentConfig,
    vertical: bool,
) -> Result<Vec<Vec<f64>>> {
    let channel = if vertical { &rec.y_deg } else { &rec.x_deg };
    Ok(select_fixation_segment_ranges(rec, cfg)?
        .into_iter()
        .map(|r| channel[r.start..r.start + r.length].to_vec())
        .collect())
}

/// Detector thresholds. All invented plumbing, not a reproduction of any
/// published detector.
#[derive(Debug, Clone, Copy)]
pub struct DetectorConfig {
    pub onset_deg_s: f64,
    pub offset_deg_s: f64,
    pub min_duration_ms: f64,
    pub merge_gap_ms: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            onset_deg_s: 30.0,
            offset_deg_s: 20.0,
            min_duration_ms: 6.0,
            merge_gap_ms: 20.0,
        }
    }
}

/// Velocity-threshold saccade detection with hysteresis.
///
/// Intervals where speed exceeds the onset threshold are extended outward
/// while speed stays above the offset threshold, merged when separated by at
/// most `merge_gap_ms`, and dropped when shorter than `min_duration_ms`.
/// Metrics come from the velocity series and the endpoint positions.
pub fn detect_saccades(
    v: &VelocitySeries,
    x: &[f64],
    y: &[f64],
    cfg: &DetectorConfig,
) -> Vec<SaccadeRecord> {
    let n = v.speed.len();
    let fs = v.sample_rate_hz;
    let above_onset = |i: usize| v.defined_mask[i] && v.speed[i] > cfg.onset_deg_s;
    let above_offset = |i: usize| v.defined_mask[i] && v.speed[i] > cfg.offset_deg_s;

    // core intervals above the onset threshold
    let mut intervals: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        if above_onset(i) {
            let mut start = i;
            let mut end = i;
            while end + 1 < n && above_offset(end + 1) {
                end += 1;
            }
            while start > 0 && above_offset(start - 1) {
                start -= 1;
            }
            intervals.push((start, end));
            i = end + 1;
        } else {
            i += 1;
        }
    }

    // merge close intervals
    let merge_gap = (cfg.merge_gap_ms / 1000.0 * fs).round() as usize;
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (s, e) in intervals {
        match merged.last_mut() {
            Some((_, pe)) if s.saturating_sub(*pe) <= merge_gap => *pe = e,
            _ => merged.push((s, e)),
        }
    }

    let min_len = (cfg.min_duration_ms / 1000.0 * fs).round() as usize;
    merged
        .into_iter()
        .filter(|(s, e)| e - s + 1 >= min_len)
        .map(|(s, e)| {
            let dx = x[e] - x[s];
            let dy = y[e] - y[s];
            let peak = v.speed[s..=e]
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            SaccadeRecord {
                onset_index: s,
                offset_index: e,
                amplitude_deg: (dx * dx + dy * dy).sqrt(),
                peak_velocity_deg_s: peak,
                duration_ms: (e - s) as f64 * 1000.0 / fs,
            }
        })
        .collect()
}

/// Detect saccades across all valid spans of a recording, indices absolute.
pub fn detect_saccades_in_recording(
    rec: &Recording,
    cfg: &DetectorConfig,
) -> Result<Vec<SaccadeRecord>> {
    let mut all = Vec::new();
    for span in contiguous_valid_spans(rec, 7) {
        let x = &rec.x_deg[span.range()];
        let y = &rec.y_deg[span.range()];
        let v = velocity_six_point(x, y, rec.sample_rate_hz)?;
        for mut s in detect_saccades(&v, x, y, cfg) {
            s.onset_index += span.start_index;
            s.offset_index += span.start_index;
            all.push(s);
        }
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recording::Recording;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn linear_trajectory_exact() {
        let fs = 1000.0;
        let x: Vec<f64> = (0..100).map(|i| 10.0 * i as f64 / fs).collect();
        let y = vec![0.0; 100];
        let v = velocity_six_point(&x, &y, fs).unwrap();
        for i in 0..100 {
            if v.defined_mask[i] {
                assert_abs_diff_eq!(v.vx[i], 10.0, epsilon = 1e-9);
                assert_abs_diff_eq!(v.speed[i], 10.0, epsilon = 1e-9);
            } else {
                assert!(i < 3 || i >= 97);
            }
        }
    }

    #[test]
    fn quadratic_trajectory_exact() {
        let fs = 1000.0;
        let x: Vec<f64> = (0..200)
            .map(|i| {
                let t = i as f64 / fs;
                2.0 * t * t + 3.0 * t
            })
            .collect();
        let y = vec![0.0; 200];
        let v = velocity_six_point(&x, &y, fs).unwrap();
        for i in 3..197 {
            let t = i as f64 / fs;
            assert_abs_diff_eq!(v.vx[i], 4.0 * t + 3.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn sine_peak_speed_attenuation() {
        // 1 deg sine at 10 Hz: analytic peak 2*pi*10 = 62.83 deg/s,
        // six-point estimate attenuated by sin(w*h)/(w*h) with h = 3 ms.
        let fs = 1000.0;
        let n = 2000;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 10.0 * i as f64 / fs).sin()).collect();
        let y = vec![0.0; n];
        let v = velocity_six_point(&x, &y, fs).unwrap();
        let peak = v
            .speed
            .iter()
            .zip(&v.defined_mask)
            .filter(|(_, &m)| m)
            .map(|(s, _)| *s)
            .fold(0.0f64, f64::max);
        assert!((peak - 62.46).abs() < 0.1, "peak {peak}");
    }

    #[test]
    fn too_short_rejected() {
        assert!(velocity_six_point(&[0.0; 6], &[0.0; 6], 1000.0).is_err());
    }

    fn still_recording(n: usize) -> Recording {
        Recording::from_xy(1000.0, vec![0.0; n], vec![0.0; n]).unwrap()
    }

    #[test]
    fn clean_fixation_yields_14_blocks_112_subsegments() {
        let rec = still_recording(30_000);
        let ranges = select_fixation_segment_ranges(&rec, &SegmentConfig::default()).unwrap();
        assert_eq!(ranges.len(), 112); // floor(30000/2048) = 14 blocks of 8
        assert_eq!(ranges.len() % 8, 0);
        assert_eq!(ranges[0], SegmentRange { start: 0, length: 256 });
        assert_eq!(ranges[8].start, 2048);
    }

    #[test]
    fn spike_in_every_block_vetoes_all() {
        let mut x = vec![0.0; 30_000];
        // a step of 1 deg gives a six-point speed of ~167 deg/s
        let mut i = 1000;
        while i < 30_000 {
            x[i] = 1.0;
            i += 1500;
        }
        let rec = Recording::from_xy(1000.0, x, vec![0.0; 30_000]).unwrap();
        let ranges = select_fixation_segment_ranges(&rec, &SegmentConfig::default()).unwrap();
        assert!(ranges.is_empty());
    }

    #[test]
    fn veto_is_strict_inequality() {
        // a block whose maximum speed equals vmax exactly is kept; one
        // whose threshold sits just below that speed is dropped
        let fs = 1000.0;
        let x: Vec<f64> = (0..4096).map(|i| 25.0 * i as f64 / fs).collect();
        let rec = Recording::from_xy(fs, x.clone(), vec![0.0; 4096]).unwrap();
        let v = velocity_six_point(&x, &vec![0.0; 4096], fs).unwrap();
        let max_speed = v
            .speed
            .iter()
            .zip(&v.defined_mask)
            .filter(|(_, &m)| m)
            .map(|(s, _)| *s)
            .fold(0.0f64, f64::max);

        let mut cfg = SegmentConfig {
            vmax_deg_s: max_speed,
            ..SegmentConfig::default()
        };
        assert_eq!(select_fixation_segment_ranges(&rec, &cfg).unwrap().len(), 16);

        cfg.vmax_deg_s = max_speed * (1.0 - 1e-12);
        assert!(select_fixation_segment_ranges(&rec, &cfg).unwrap().is_empty());
    }

    #[test]
    fn subsegments_contain_only_slow_defined_speeds() {
        let mut x = vec![0.0; 10_000];
        for (i, v) in x.iter_mut().enumerate() {
            *v = 0.01 * (i as f64 * 0.13).sin();
        }
        x[5000] = 2.0; // vetoes the third block
        let rec = Recording::from_xy(1000.0, x.clone(), vec![0.0; 10_000]).unwrap();
        let cfg = SegmentConfig::default();
        let ranges = select_fixation_segment_ranges(&rec, &cfg).unwrap();
        assert_eq!(ranges.len() % 8, 0);
        let v = velocity_six_point(&x, &vec![0.0; 10_000], 1000.0).unwrap();
        for r in &ranges {
            for i in r.start..r.start + r.length {
                if v.defined_mask[i] {
                    assert!(v.speed[i] <= cfg.vmax_deg_s);
                }
            }
        }
    }

    #[test]
    fn no_saccade_below_threshold() {
        let x: Vec<f64> = (0..1000).map(|i| 0.001 * (i as f64 * 0.1).sin()).collect();
        let y = vec![0.0; 1000];
        let v = velocity_six_point(&x, &y, 1000.0).unwrap();
        assert!(detect_saccades(&v, &x, &y, &DetectorConfig::default()).is_empty());
    }

    #[test]
    fn close_saccades_merge() {
        // two raised-cosine steps 15 ms apart with a 20 ms merge gap
        let fs = 1000.0;
        let n = 1000;
        let step = |i: usize, start: usize, dur: usize, amp: f64| -> f64 {
            if i < start {
                0.0
            } else if i >= start + dur {
                amp
            } else {
                let ph = PI * (i - start) as f64 / dur as f64;
                amp * (1.0 - ph.cos()) / 2.0
            }
        };
        let x: Vec<f64> = (0..n)
            .map(|i| step(i, 200, 40, 5.0) + step(i, 255, 40, 5.0))
            .collect();
        let y = vec![0.0; n];
        let v = velocity_six_point(&x, &y, fs).unwrap();
        let found = detect_saccades(&v, &x, &y, &DetectorConfig::default());
        assert_eq!(found.len(), 1, "got {found:?}");
    }
}
