//! Recording ingestion, validation and gap handling.
//!
//! A [`Recording`] is a timestamped 2-D gaze position series in degrees of
//! visual angle at a fixed sample rate. Dropouts (blinks, tracking loss) are
//! kept in place with `valid = false` so that index arithmetic stays aligned
//! with time; downstream DSP operates on contiguous valid spans.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};

/// Spacing tolerance in milliseconds for uniform-rate validation.
const SPACING_TOL_MS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eye {
    Left,
    Right,
    Unknown,
}

impl Eye {
    pub fn as_str(&self) -> &'static str {
        match self {
            Eye::Left => "left",
            Eye::Right => "right",
            Eye::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Eye> {
        match s {
            "left" => Some(Eye::Left),
            "right" => Some(Eye::Right),
            "unknown" => Some(Eye::Unknown),
            _ => None,
        }
    }
}

/// A gap-aware gaze position series. Immutable after load.
#[derive(Debug, Clone)]
pub struct Recording {
    pub subject_id: String,
    pub eye: Eye,
    pub sample_rate_hz: f64,
    pub t_ms: Vec<f64>,
    pub x_deg: Vec<f64>,
    pub y_deg: Vec<f64>,
    pub valid: Vec<bool>,
}

impl Recording {
    pub fn len(&self) -> usize {
        self.t_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_ms.is_empty()
    }

    /// Build a recording from raw arrays, checking every invariant.
    pub fn new(
        subject_id: String,
        eye: Eye,
        sample_rate_hz: f64,
        t_ms: Vec<f64>,
        x_deg: Vec<f64>,
        y_deg: Vec<f64>,
        valid: Vec<bool>,
    ) -> Result<Recording> {
        if !(sample_rate_hz > 0.0) {
            return Err(Error::Invalid(format!(
                "sample_rate_hz must be positive, got {sample_rate_hz}"
            )));
        }
        let n = t_ms.len();
        if n == 0 {
            return Err(Error::EmptyRecording);
        }
        if x_deg.len() != n || y_deg.len() != n || valid.len() != n {
            return Err(Error::Invalid(format!(
                "array length mismatch: t={}, x={}, y={}, valid={}",
                n,
                x_deg.len(),
                y_deg.len(),
                valid.len()
            )));
        }
        let dt = 1000.0 / sample_rate_hz;
        for i in 1..n {
            if t_ms[i] <= t_ms[i - 1] {
                return Err(Error::NonMonotoneTimestamps {
                    row: i,
                    prev: t_ms[i - 1],
                    curr: t_ms[i],
                });
            }
            // Uniform spacing is only required within a run of valid samples.
            if valid[i] && valid[i - 1] {
                let spacing = t_ms[i] - t_ms[i - 1];
                if (spacing - dt).abs() > SPACING_TOL_MS {
                    return Err(Error::InconsistentSpacing {
                        row: i,
                        spacing,
                        expected: dt,
                        rate: sample_rate_hz,
                    });
                }
            }
        }
        for i in 0..n {
            if valid[i] && !(x_deg[i].is_finite() && y_deg[i].is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Recording {
            subject_id,
            eye,
            sample_rate_hz,
            t_ms,
            x_deg,
            y_deg,
            valid,
        })
    }

    /// Convenience constructor for fully-valid synthetic data at a uniform rate.
    pub fn from_xy(sample_rate_hz: f64, x_deg: Vec<f64>, y_deg: Vec<f64>) -> Result<Recording> {
        let n = x_deg.len();
        let dt = 1000.0 / sample_rate_hz;
        let t_ms = (0..n).map(|i| i as f64 * dt).collect();
        Recording::new(
            String::new(),
            Eye::Unknown,
            sample_rate_hz,
            t_ms,
            x_deg,
            y_deg,
            vec![true; n],
        )
    }
}

/// A run of consecutive valid samples inside a [`Recording`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start_index: usize,
    pub length: usize,
}

impl Span {
    pub fn end(&self) -> usize {
        self.start_index + self.length
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start_index..self.end()
    }
}

/// Filter selection shared by the library API and the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    None,
    Std,
    Extra,
    ZeroPhaseLowPass { cutoff_hz: f64, order: usize },
    Band { low_hz: f64, high_hz: f64, order: usize },
}

impl FilterKind {
    /// Validate edge frequencies against the Nyquist limit.
    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        let nyq = sample_rate_hz / 2.0;
        match *self {
            FilterKind::None | FilterKind::Std | FilterKind::Extra => Ok(()),
            FilterKind::ZeroPhaseLowPass { cutoff_hz, order } => {
                if order < 1 {
                    return Err(Error::Design("order must be >= 1".into()));
                }
                if !(cutoff_hz > 0.0 && cutoff_hz < nyq) {
                    return Err(Error::Design(format!(
                        "cutoff {cutoff_hz} Hz outside (0, {nyq}) Hz"
                    )));
                }
                Ok(())
            }
            FilterKind::Band {
                low_hz,
                high_hz,
                order,
            } => {
                if order < 1 {
                    return Err(Error::Design("order must be >= 1".into()));
                }
                if !(low_hz >= 0.0 && low_hz < high_hz && high_hz <= nyq) {
                    return Err(Error::Design(format!(
                        "band edges {low_hz}..{high_hz} Hz invalid for Nyquist {nyq} Hz"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Parse a recording from the CSV contract: optional `# key=value` comment
/// lines, a `t_ms,x_deg,y_deg` header, one sample per row. Empty position
/// fields mark an invalid sample.
pub fn load_recording<R: Read>(source: R) -> Result<Recording> {
    let reader = BufReader::new(source);
    let mut subject_id = String::new();
    let mut eye = Eye::Unknown;
    let mut sample_rate_hz = 1000.0;
    let mut header_seen = false;

    let mut t_ms = Vec::new();
    let mut x_deg = Vec::new();
    let mut y_deg = Vec::new();
    let mut valid = Vec::new();
    let mut row = 0usize;

    for line in reader.lines() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some((key, value)) = rest.split_once('=') {
                    let (key, value) = (key.trim(), value.trim());
                    match key {
                        "subject_id" => subject_id = value.to_string(),
                        "eye" => {
                            eye = Eye::parse(value).ok_or_else(|| Error::InvalidMetadata {
                                key: key.into(),
                                value: value.into(),
                                msg: "expected left|right|unknown".into(),
                            })?
                        }
                        "sample_rate_hz" => {
                            sample_rate_hz =
                                value.parse::<f64>().map_err(|e| Error::InvalidMetadata {
                                    key: key.into(),
                                    value: value.into(),
                                    msg: e.to_string(),
                                })?
                        }
                        _ => {} // unknown keys are ignored
                    }
                }
                continue;
            }
            if line != "t_ms,x_deg,y_deg" {
                return Err(Error::MalformedHeader(line.to_string()));
            }
            header_seen = true;
            continue;
        }

        let mut fields = line.splitn(3, ',');
        let t_field = fields.next().unwrap_or("");
        let x_field = fields.next().ok_or_else(|| Error::MalformedRow {
            row,
            msg: "missing x_deg field".into(),
        })?;
        let y_field = fields.next().ok_or_else(|| Error::MalformedRow {
            row,
            msg: "missing y_deg field".into(),
        })?;

        let t: f64 = t_field.trim().parse().map_err(|e| Error::MalformedRow {
            row,
            msg: format!("bad t_ms `{t_field}`: {e}"),
        })?;
        let x = parse_position(x_field, row, "x_deg")?;
        let y = parse_position(y_field, row, "y_deg")?;
        let ok = x.is_finite() && y.is_finite();

        t_ms.push(t);
        x_deg.push(x);
        y_deg.push(y);
        valid.push(ok);
        row += 1;
    }

    if !header_seen {
        return Err(Error::MalformedHeader("<end of input>".into()));
    }
    Recording::new(subject_id, eye, sample_rate_hz, t_ms, x_deg, y_deg, valid)
}

fn parse_position(field: &str, row: usize, name: &str) -> Result<f64> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(f64::NAN);
    }
    field.parse::<f64>().map_err(|e| Error::MalformedRow {
        row,
        msg: format!("bad {name} `{field}`: {e}"),
    })
}

/// Write a recording in the same CSV format `load_recording` accepts.
pub fn serialize_recording<W: Write>(rec: &Recording, mut out: W) -> Result<()> {
    if !rec.subject_id.is_empty() {
        writeln!(out, "# subject_id={}", rec.subject_id)?;
    }
    writeln!(out, "# eye={}", rec.eye.as_str())?;
    writeln!(out, "# sample_rate_hz={}", rec.sample_rate_hz)?;
    writeln!(out, "t_ms,x_deg,y_deg")?;
    for i in 0..rec.len() {
        if rec.valid[i] {
            writeln!(out, "{},{},{}", rec.t_ms[i], rec.x_deg[i], rec.y_deg[i])?;
        } else {
            writeln!(out, "{},,", rec.t_ms[i])?;
        }
    }
    Ok(())
}

/// Maximal runs of valid samples with length >= `min_length`, in order.
pub fn contiguous_valid_spans(rec: &Recording, min_length: usize) -> Vec<Span> {
    assert!(min_length >= 1, "min_length must be >= 1");
    let mut spans = Vec::new();
    let mut start = None;
    for i in 0..=rec.len() {
        let ok = i < rec.len() && rec.valid[i];
        match (start, ok) {
            (None, true) => start = Some(i),
            (Some(s), false) => {
                if i - s >= min_length {
                    spans.push(Span {
                        start_index: s,
                        length: i - s,
                    });
                }
                start = None;
            }
            _ => {}
        }
    }
    spans
}
