//! Main-sequence analysis: amplitude clustering, robust log-log slope
//! fitting, and per-condition summaries.
//!
//! Saccades split at 4 degrees of amplitude (boundary inclusive into the
//! small cluster); slopes are fitted on natural-log axes, ln(peak velocity)
//! against ln(amplitude), with iteratively reweighted least squares using
//! bisquare weights.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kinematics::SaccadeRecord;

/// Amplitude boundary between the two clusters, inclusive into `Small`.
pub const CLUSTER_SPLIT_DEG: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cluster {
    Small,
    Large,
}

impl Cluster {
    pub fn as_str(&self) -> &'static str {
        match self {
            Cluster::Small => "small",
            Cluster::Large => "large",
        }
    }
}

/// Result of one robust regression.
#[derive(Debug, Clone, Copy)]
pub struct MainSequenceFit {
    pub cluster: Cluster,
    pub slope: f64,
    pub intercept: f64,
    pub n_points: usize,
    pub converged: bool,
    pub iterations: usize,
}

/// IRLS tuning parameters. Defaults are the standard bisquare constants.
#[derive(Debug, Clone, Copy)]
pub struct RobustConfig {
    pub tuning_constant: f64,
    pub mad_scale: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for RobustConfig {
    fn default() -> Self {
        RobustConfig {
            tuning_constant: 4.685,
            mad_scale: 1.4826,
            tolerance: 1e-6,
            max_iterations: 50,
        }
    }
}

/// Partition saccades by amplitude, boundary inclusive into the small
/// cluster.
pub fn split_clusters(
    saccades: &[SaccadeRecord],
) -> Result<(Vec<SaccadeRecord>, Vec<SaccadeRecord>)> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    for &s in saccades {
        if !(s.amplitude_deg > 0.0) {
            return Err(Error::NonPositiveAmplitude(s.amplitude_deg));
        }
        if s.amplitude_deg <= CLUSTER_SPLIT_DEG {
            small.push(s);
        } else {
            large.push(s);
        }
    }
    Ok((small, large))
}

fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..x.len() {
        let wi = w[i];
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
        sxx += wi * x[i] * x[i];
        sxy += wi * x[i] * y[i];
    }
    let det = sw * sxx - sx * sx;
    if !det.is_finite() || det.abs() < 1e-12 * sw.max(1.0) {
        return None;
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;
    Some((slope, intercept))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Robust line fit of y on x via IRLS with bisquare weights.
///
/// Residuals are scaled by `mad_scale * MAD`; iteration stops when the
/// largest coefficient change falls below `tolerance` or after
/// `max_iterations`, in which case the last iterate is returned with
/// `converged = false`.
pub fn robust_fit_with(
    x: &[f64],
    y: &[f64],
    cluster: Cluster,
    cfg: &RobustConfig,
) -> Result<MainSequenceFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return Err(Error::Regression(format!(
            "need at least 3 paired points, got {n} x and {} y",
            y.len()
        )));
    }
    for i in 0..n {
        if !(x[i].is_finite() && y[i].is_finite()) {
            return Err(Error::Regression(format!("non-finite point at index {i}")));
        }
    }

    let mut w = vec![1.0; n];
    let (mut slope, mut intercept) = weighted_line_fit(x, y, &w)
        .ok_or_else(|| Error::Regression("rank-deficient x (all values equal)".into()))?;

    let mut converged = false;
    let mut iterations = 1;
    for _ in 1..cfg.max_iterations {
        let resid: Vec<f64> = (0..n).map(|i| y[i] - (intercept + slope * x[i])).collect();
        let mut abs_resid: Vec<f64> = resid.iter().map(|r| r.abs()).collect();
        let scale = cfg.mad_scale * median(&mut abs_resid);
        if scale < 1e-12 {
            converged = true;
            break;
        }
        let cutoff = cfg.tuning_constant * scale;
        for i in 0..n {
            let u = resid[i] / cutoff;
            w[i] = if u.abs() < 1.0 {
                let t = 1.0 - u * u;
                t * t
            } else {
                0.0
            };
        }
        let (new_slope, new_intercept) = match weighted_line_fit(x, y, &w) {
            Some(fit) => fit,
            None => break, // all weights collapsed; keep the last iterate
        };
        iterations += 1;
        let delta = (new_slope - slope).abs().max((new_intercept - intercept).abs());
        slope = new_slope;
        intercept = new_intercept;
        if delta < cfg.tolerance {
            converged = true;
            break;
        }
    }

    Ok(MainSequenceFit {
        cluster,
        slope,
        intercept,
        n_points: n,
        converged,
        iterations,
    })
}

pub fn robust_fit(x: &[f64], y: &[f64], cluster: Cluster) -> Result<MainSequenceFit> {
    robust_fit_with(x, y, cluster, &RobustConfig::default())
}

/// Fit both clusters of a saccade list on natural-log axes.
pub fn fit_main_sequence(saccades: &[SaccadeRecord]) -> Result<Vec<MainSequenceFit>> {
    let (small, large) = split_clusters(saccades)?;
    let mut fits = Vec::new();
    for (cluster, group) in [(Cluster::Small, small), (Cluster::Large, large)] {
        if group.len() >= 3 {
            let x: Vec<f64> = group.iter().map(|s| s.amplitude_deg.ln()).collect();
            let y: Vec<f64> = group.iter().map(|s| s.peak_velocity_deg_s.ln()).collect();
            fits.push(robust_fit(&x, &y, cluster)?);
        }
    }
    Ok(fits)
}

/// Mean and sample SD of slopes per condition per cluster.
#[derive(Debug, Clone)]
pub struct ConditionSummary {
    pub condition: String,
    pub cluster: Cluster,
    pub mean_slope: f64,
    pub sd_slope: f64,
    pub n_fits: usize,
}

/// Summarize fits into a slope table, rows ordered by first appearance of
/// each condition in the input map iteration order.
pub fn summarize_by_condition(
    fits: &BTreeMap<String, Vec<MainSequenceFit>>,
) -> Vec<ConditionSummary> {
    let mut rows = Vec::new();
    for (condition, fits) in fits {
        for cluster in [Cluster::Small, Cluster::Large] {
            let slopes: Vec<f64> = fits
                .iter()
                .filter(|f| f.cluster == cluster)
                .map(|f| f.slope)
                .collect();
            if slopes.is_empty() {
                continue;
            }
            let n = slopes.len();
            let mean = slopes.iter().sum::<f64>() / n as f64;
            let sd = if n > 1 {
                (slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            rows.push(ConditionSummary {
                condition: condition.clone(),
                cluster,
                mean_slope: mean,
                sd_slope: sd,
                n_fits: n,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn rec(amplitude: f64) -> SaccadeRecord {
        SaccadeRecord {
            onset_index: 0,
            offset_index: 10,
            amplitude_deg: amplitude,
            peak_velocity_deg_s: 100.0,
            duration_ms: 10.0,
        }
    }

    #[test]
    fn split_is_boundary_inclusive() {
        let (small, large) = split_clusters(&[rec(1.0), rec(4.0), rec(4.01)]).unwrap();
        let amps = |v: &[SaccadeRecord]| v.iter().map(|s| s.amplitude_deg).collect::<Vec<_>>();
        assert_eq!(amps(&small), vec![1.0, 4.0]);
        assert_eq!(amps(&large), vec![4.01]);
    }

    #[test]
    fn split_empty_and_invalid() {
        let (s, l) = split_clusters(&[]).unwrap();
        assert!(s.is_empty() && l.is_empty());
        assert!(split_clusters(&[rec(0.0)]).is_err());
    }

    #[test]
    fn paper_scale_mix_populates_both_clusters() {
        let saccades: Vec<SaccadeRecord> =
            [0.38, 1.2, 3.9, 4.0, 5.5, 12.0, 33.1].map(rec).to_vec();
        let (small, large) = split_clusters(&saccades).unwrap();
        assert!(!small.is_empty() && !large.is_empty());
    }

    #[test]
    fn natural_log_threshold_matches() {
        assert!((CLUSTER_SPLIT_DEG.ln() - 1.386).abs() < 0.001);
    }

    #[test]
    fn collinear_points_exact() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 0.7 * v + 2.0).collect();
        let fit = robust_fit(&x, &y, Cluster::Small).unwrap();
        assert_abs_diff_eq!(fit.slope, 0.7, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.intercept, 2.0, epsilon = 1e-9);
        assert!(fit.converged);
        assert!(fit.iterations <= 2);
    }

    #[test]
    fn constant_y_gives_zero_slope() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [5.0; 4];
        let fit = robust_fit(&x, &y, Cluster::Small).unwrap();
        assert_abs_diff_eq!(fit.slope, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_deficient_x_rejected() {
        let x = [2.0; 5];
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(robust_fit(&x, &y, Cluster::Small).is_err());
    }

    fn synthetic_cluster(
        slope: f64,
        n: usize,
        outlier_fraction: f64,
        seed: u64,
    ) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let xi = 0.4f64.ln() + rng.gen::<f64>() * (4.0f64.ln() - 0.4f64.ln());
            let mut yi = slope * xi + 4.0 + noise.sample(&mut rng);
            if (i as f64) < outlier_fraction * n as f64 {
                yi += 3.0;
            }
            x.push(xi);
            y.push(yi);
        }
        (x, y)
    }

    #[test]
    fn recovers_slope_with_gross_outliers() {
        let (x, y) = synthetic_cluster(0.673, 400, 0.10, 42);
        let fit = robust_fit(&x, &y, Cluster::Small).unwrap();
        assert!((fit.slope - 0.673).abs() < 0.02, "slope {}", fit.slope);
        assert!(fit.converged);
    }

    #[test]
    fn outliers_shift_slope_less_than_0_03() {
        let (x, y) = synthetic_cluster(0.673, 400, 0.0, 7);
        let clean = robust_fit(&x, &y, Cluster::Small).unwrap();
        let (x2, y2) = synthetic_cluster(0.673, 400, 0.10, 7);
        let dirty = robust_fit(&x2, &y2, Cluster::Small).unwrap();
        assert!((clean.slope - dirty.slope).abs() < 0.03);
    }

    #[test]
    fn scale_equivariance_of_log_fit() {
        // scaling amplitudes by c shifts ln x by ln c: slope unchanged,
        // intercept shifts by -slope * ln c
        let (x, y) = synthetic_cluster(0.5, 200, 0.0, 3);
        let fit = robust_fit(&x, &y, Cluster::Small).unwrap();
        let c: f64 = 2.5;
        let x_shifted: Vec<f64> = x.iter().map(|v| v + c.ln()).collect();
        let fit2 = robust_fit(&x_shifted, &y, Cluster::Small).unwrap();
        assert_abs_diff_eq!(fit2.slope, fit.slope, epsilon = 1e-6);
        assert_abs_diff_eq!(
            fit2.intercept,
            fit.intercept - fit.slope * c.ln(),
            epsilon = 1e-5
        );
    }

    #[test]
    fn clusters_partition_input() {
        let saccades: Vec<SaccadeRecord> = (1..50).map(|i| rec(i as f64 * 0.3)).collect();
        let (small, large) = split_clusters(&saccades).unwrap();
        assert_eq!(small.len() + large.len(), saccades.len());
        assert!(small.iter().all(|s| s.amplitude_deg <= 4.0));
        assert!(large.iter().all(|s| s.amplitude_deg > 4.0));
    }

    #[test]
    fn summary_means_and_sd() {
        let fit = |slope: f64, cluster: Cluster| MainSequenceFit {
            cluster,
            slope,
            intercept: 0.0,
            n_points: 10,
            converged: true,
            iterations: 3,
        };
        let mut map = BTreeMap::new();
        map.insert("no_filter".to_string(), vec![
            fit(0.6, Cluster::Small),
            fit(0.8, Cluster::Small),
            fit(0.4, Cluster::Large),
        ]);
        let rows = summarize_by_condition(&map);
        assert_eq!(rows.len(), 2);
        assert_abs_diff_eq!(rows[0].mean_slope, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(rows[0].sd_slope, 0.1414, epsilon = 1e-3);
        assert_eq!(rows[1].n_fits, 1);
        assert_eq!(rows[1].sd_slope, 0.0);
    }
}
