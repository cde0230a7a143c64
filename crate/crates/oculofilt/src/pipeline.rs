//! Whole-recording orchestration: apply a filter per valid span, build
//! segment-averaged spectra, and estimate a filter's empirical frequency
//! response from a fixation recording.

use crate::error::{Error, Result};
use crate::heuristic::{apply_heuristic, HeuristicLevel};
use crate::iir::{design_butterworth, filtfilt, BiquadCascade, DesignKind};
use crate::kinematics::{select_fixation_segment_ranges, SegmentConfig};
use crate::recording::{contiguous_valid_spans, FilterKind, Recording};
use crate::spectral::{
    average_spectra, estimate_frequency_response, segment_spectrum, FrequencyResponse, Spectrum,
};

/// Minimum span length a filter kind can process; shorter spans pass
/// through unchanged.
fn min_span_len(kind: &FilterKind, cascade: Option<&BiquadCascade>) -> usize {
    match kind {
        FilterKind::None => 1,
        FilterKind::Std => 3,
        FilterKind::Extra => 4,
        FilterKind::ZeroPhaseLowPass { .. } | FilterKind::Band { .. } => {
            cascade.map(|c| c.pad_len() + 1).unwrap_or(1)
        }
    }
}

fn design_for_kind(kind: &FilterKind, fs_hz: f64) -> Result<Option<BiquadCascade>> {
    match *kind {
        FilterKind::ZeroPhaseLowPass { cutoff_hz, order } => Ok(Some(design_butterworth(
            DesignKind::Lowpass,
            order,
            &[cutoff_hz],
            fs_hz,
        )?)),
        FilterKind::Band {
            low_hz,
            high_hz,
            order,
        } => {
            let nyq = fs_hz / 2.0;
            if low_hz <= 0.0 {
                Ok(Some(design_butterworth(
                    DesignKind::Lowpass,
                    order,
                    &[high_hz],
                    fs_hz,
                )?))
            } else if high_hz >= nyq {
                Ok(Some(design_butterworth(
                    DesignKind::Highpass,
                    order,
                    &[low_hz],
                    fs_hz,
                )?))
            } else {
                Ok(Some(design_butterworth(
                    DesignKind::Bandpass,
                    order,
                    &[low_hz, high_hz],
                    fs_hz,
                )?))
            }
        }
        _ => Ok(None),
    }
}

fn filter_channel(
    kind: &FilterKind,
    cascade: Option<&BiquadCascade>,
    x: &[f64],
) -> Result<Vec<f64>> {
    match kind {
        FilterKind::None => Ok(x.to_vec()),
        FilterKind::Std => apply_heuristic(HeuristicLevel::Std, x),
        FilterKind::Extra => apply_heuristic(HeuristicLevel::Extra, x),
        FilterKind::ZeroPhaseLowPass { .. } | FilterKind::Band { .. } => {
            filtfilt(cascade.expect("cascade designed for IIR kinds"), x)
        }
    }
}

/// Apply a filter to both channels of every valid span long enough to
/// process; everything else (invalid samples, too-short spans) is copied
/// through.
pub fn apply_filter(rec: &Recording, kind: &FilterKind) -> Result<Recording> {
    kind.validate(rec.sample_rate_hz)?;
    let cascade = design_for_kind(kind, rec.sample_rate_hz)?;
    let min_len = min_span_len(kind, cascade.as_ref());

    let mut out = rec.clone();
    for span in contiguous_valid_spans(rec, 1) {
        if span.length < min_len {
            continue;
        }
        let fx = filter_channel(kind, cascade.as_ref(), &rec.x_deg[span.range()])?;
        let fy = filter_channel(kind, cascade.as_ref(), &rec.y_deg[span.range()])?;
        out.x_deg[span.range()].copy_from_slice(&fx);
        out.y_deg[span.range()].copy_from_slice(&fy);
    }
    Ok(out)
}

/// Segment-averaged amplitude/phase spectrum of a fixation recording.
pub fn averaged_spectrum(
    rec: &Recording,
    seg_cfg: &SegmentConfig,
    vertical: bool,
) -> Result<Spectrum> {
    let ranges = select_fixation_segment_ranges(rec, seg_cfg)?;
    if ranges.is_empty() {
        return Err(Error::Invalid(
            "no fixation segments met the selection criteria".into(),
        ));
    }
    let channel = if vertical { &rec.y_deg } else { &rec.x_deg };
    let spectra: Vec<Spectrum> = ranges
        .iter()
        .map(|r| {
            segment_spectrum(
                &channel[r.start..r.start + r.length],
                rec.sample_rate_hz,
                seg_cfg.sub,
            )
        })
        .collect::<Result<_>>()?;
    average_spectra(&spectra)
}

/// Full empirical frequency-response procedure: segment positions are
/// selected once on the unfiltered recording, spectra of the unfiltered
/// and the filtered samples at those positions are averaged, and the
/// per-bin ratio of filtered over unfiltered amplitude is returned.
pub fn frequency_response(
    rec: &Recording,
    kind: &FilterKind,
    seg_cfg: &SegmentConfig,
    vertical: bool,
) -> Result<(FrequencyResponse, usize)> {
    let filtered = apply_filter(rec, kind)?;
    let ranges = select_fixation_segment_ranges(rec, seg_cfg)?;
    if ranges.is_empty() {
        return Err(Error::Invalid(
            "no fixation segments met the selection criteria".into(),
        ));
    }
    let spectra_of = |r: &Recording| -> Result<Spectrum> {
        let channel = if vertical { &r.y_deg } else { &r.x_deg };
        let spectra: Vec<Spectrum> = ranges
            .iter()
            .map(|seg| {
                segment_spectrum(
                    &channel[seg.start..seg.start + seg.length],
                    r.sample_rate_hz,
                    seg_cfg.sub,
                )
            })
            .collect::<Result<_>>()?;
        average_spectra(&spectra)
    };
    let unfiltered_spec = spectra_of(rec)?;
    let filtered_spec = spectra_of(&filtered)?;
    let resp = estimate_frequency_response(&unfiltered_spec, &filtered_spec)?;
    Ok((resp, ranges.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen_noise, NoiseModel};
    use approx::assert_abs_diff_eq;

    fn fixation_recording(n: usize, sigma: f64, seed: u64) -> Recording {
        let x = gen_noise(&NoiseModel::white(sigma, seed), n, 1000.0).unwrap();
        Recording::from_xy(1000.0, x, vec![0.0; n]).unwrap()
    }

    #[test]
    fn filter_none_is_identity() {
        let rec = fixation_recording(5000, 0.01, 1);
        let out = apply_filter(&rec, &FilterKind::None).unwrap();
        assert_eq!(out.x_deg, rec.x_deg);
    }

    #[test]
    fn filter_preserves_invalid_samples() {
        let mut rec = fixation_recording(1000, 0.01, 2);
        rec.valid[500] = false;
        rec.x_deg[500] = f64::NAN;
        let out = apply_filter(&rec, &FilterKind::Std).unwrap();
        assert!(!out.valid[500]);
        assert!(out.x_deg[500].is_nan());
        assert!(out.x_deg[499].is_finite());
    }

    #[test]
    fn short_spans_pass_through_zlp() {
        // a 10-sample span cannot feed an order-7 filtfilt; it must be
        // copied unchanged
        let mut rec = fixation_recording(1000, 0.01, 3);
        for i in 0..1000 {
            if !(100..110).contains(&i) && i < 500 {
                rec.valid[i] = false;
                rec.x_deg[i] = f64::NAN;
            }
        }
        let kind = FilterKind::ZeroPhaseLowPass {
            cutoff_hz: 100.0,
            order: 7,
        };
        let out = apply_filter(&rec, &kind).unwrap();
        assert_eq!(out.x_deg[100..110], rec.x_deg[100..110]);
        assert_ne!(out.x_deg[600..700], rec.x_deg[600..700]);
    }

    #[test]
    fn averaged_spectrum_counts_segments() {
        let rec = fixation_recording(30_000, 0.005, 4);
        let s = averaged_spectrum(&rec, &SegmentConfig::default(), false).unwrap();
        assert_eq!(s.n_segments_averaged, 112);
        assert_eq!(s.freqs_hz.len(), 129);
    }

    #[test]
    fn identity_frequency_response_is_unity() {
        let rec = fixation_recording(10_000, 0.005, 5);
        let (fr, nseg) =
            frequency_response(&rec, &FilterKind::None, &SegmentConfig::default(), false).unwrap();
        assert!(nseg > 0);
        for k in 0..fr.gain.len() {
            assert_abs_diff_eq!(fr.gain[k], 1.0, epsilon = 1e-12);
        }
    }
}
