//! Heuristic despike filters.
//!
//! Two causal, sequential in-place filters: the standard level removes
//! one-sample spikes, the extra level removes two-sample spikes and expects
//! standard-level output as its input. Replacements are visible to later
//! windows, matching a streaming hardware implementation.
//!
//! Both filters are nonlinear: filter(a + b) != filter(a) + filter(b) in
//! general, which is why their frequency response can only be estimated
//! empirically for a given input class.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicLevel {
    Std,
    Extra,
}

fn check_finite(x: &[f64]) -> Result<()> {
    for (i, v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(i));
        }
    }
    Ok(())
}

/// Remove one-sample spikes.
///
/// Sequential scan over i = 1..n-2: x[i] is a spike when it is a strict local
/// extremum, (x[i]-x[i-1])*(x[i]-x[i+1]) > 0. It is replaced in place by the
/// neighbor value closer in absolute difference; on a tie the preceding
/// neighbor wins. First and last samples pass through.
pub fn std_filter(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 3 {
        return Err(Error::TooShort {
            min: 3,
            got: x.len(),
        });
    }
    check_finite(x)?;
    let mut out = x.to_vec();
    for i in 1..out.len() - 1 {
        let (prev, curr, next) = (out[i - 1], out[i], out[i + 1]);
        if (curr - prev) * (curr - next) > 0.0 {
            out[i] = if (curr - prev).abs() <= (curr - next).abs() {
                prev
            } else {
                next
            };
        }
    }
    Ok(out)
}

/// Remove two-sample spikes from standard-filtered data.
///
/// Sequential scan over windows (x[i-1], x[i], x[i+1], x[i+2]): the pair
/// (x[i], x[i+1]) is a spike when both values lie strictly above
/// max(outer) or strictly below min(outer). Each member is replaced by the
/// nearer outer value; ties go to the preceding outer value x[i-1].
pub fn extra_filter(x_std: &[f64]) -> Result<Vec<f64>> {
    if x_std.len() < 4 {
        return Err(Error::TooShort {
            min: 4,
            got: x_std.len(),
        });
    }
    check_finite(x_std)?;
    let mut out = x_std.to_vec();
    for i in 1..out.len() - 2 {
        let before = out[i - 1];
        let after = out[i + 2];
        let (a, b) = (out[i], out[i + 1]);
        let hi = before.max(after);
        let lo = before.min(after);
        let spike = (a > hi && b > hi) || (a < lo && b < lo);
        if spike {
            out[i] = nearer_outer(a, before, after);
            out[i + 1] = nearer_outer(b, before, after);
        }
    }
    Ok(out)
}

fn nearer_outer(v: f64, before: f64, after: f64) -> f64 {
    if (v - before).abs() <= (v - after).abs() {
        before
    } else {
        after
    }
}

/// Chain the levels the way the hardware does: Std alone, or Std then Extra.
pub fn apply_heuristic(level: HeuristicLevel, x: &[f64]) -> Result<Vec<f64>> {
    match level {
        HeuristicLevel::Std => std_filter(x),
        HeuristicLevel::Extra => extra_filter(&std_filter(x)?),
    }
}
