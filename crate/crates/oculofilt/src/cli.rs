//! Batch command-line frontend.
//!
//! One process, no services: each command reads recording CSVs and writes
//! plot-ready CSV (or JSON) artifacts. Multiple input files are processed
//! concurrently (capped by `OCULOFILT_THREADS`), outputs are written
//! atomically via temp-then-rename, and results are deterministic for a
//! given input/flag/seed combination regardless of worker count.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::iir::bands_from_edges;
use crate::kinematics::{
    detect_saccades_in_recording, DetectorConfig, SaccadeRecord, SegmentConfig,
};
use crate::mainseq::{fit_main_sequence, summarize_by_condition, MainSequenceFit};
use crate::pipeline::{apply_filter, averaged_spectrum, frequency_response};
use crate::recording::{load_recording, serialize_recording, FilterKind, Recording};
use crate::spectral::{FrequencyResponse, Spectrum};
use crate::synth::{
    gen_noise_with_truth, gen_saccade_recording, NoiseKind, NoiseModel, ProfileShape,
    SaccadeProfile,
};

#[derive(Parser)]
#[command(name = "oculofilt", version, about = "Eye-movement signal filtering and analysis")]
struct Cli {
    /// Config file with key=value lines mirroring long flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter recordings and write them back in recording CSV format.
    Filter(FilterArgs),
    /// Segment-averaged amplitude/phase spectrum of fixation data.
    Spectrum(SpectrumArgs),
    /// Empirical frequency response of a filter (ratio of filtered over
    /// unfiltered spectra).
    Freqresp(FreqrespArgs),
    /// Zero-phase frequency-band decomposition, one output column per band.
    Bands(BandsArgs),
    /// Velocity-threshold saccade detection.
    Saccades(SaccadesArgs),
    /// Main-sequence slope table and scatter data from a saccade CSV.
    Mainseq(MainseqArgs),
    /// Write a deterministic synthetic recording plus a truth sidecar.
    Synth(SynthArgs),
}

#[derive(Args)]
struct FilterSelect {
    /// none | std | extra | zlp100 | zlp50 | custom
    #[arg(long)]
    filter: Option<String>,
    /// Cutoff for --filter custom (zero-phase low-pass).
    #[arg(long)]
    cutoff_hz: Option<f64>,
    /// Component filter order.
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Args)]
struct SegmentArgs {
    /// Block size tiled over valid spans.
    #[arg(long)]
    block: Option<usize>,
    /// FFT segment length blocks are split into (power of two).
    #[arg(long)]
    fft_len: Option<usize>,
    /// Velocity veto threshold in deg/s (strict inequality).
    #[arg(long)]
    vmax: Option<f64>,
    /// Veto on |horizontal velocity| instead of 2-D speed.
    #[arg(long)]
    horizontal_only: bool,
    /// Analyze the vertical channel instead of the horizontal one.
    #[arg(long)]
    vertical: bool,
}

#[derive(Args)]
struct FilterArgs {
    inputs: Vec<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    select: FilterSelect,
}

#[derive(Args)]
struct SpectrumArgs {
    inputs: Vec<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    seg: SegmentArgs,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FreqrespArgs {
    inputs: Vec<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    select: FilterSelect,
    #[command(flatten)]
    seg: SegmentArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BandsArgs {
    inputs: Vec<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
    /// Interior band edges in Hz, comma separated (e.g. 50,75,100,300).
    #[arg(long)]
    edges: Option<String>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    vertical: bool,
}

#[derive(Args)]
struct SaccadesArgs {
    inputs: Vec<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    onset: Option<f64>,
    #[arg(long)]
    offset: Option<f64>,
    #[arg(long)]
    min_duration_ms: Option<f64>,
    #[arg(long)]
    merge_gap_ms: Option<f64>,
}

#[derive(Args)]
struct MainseqArgs {
    /// Saccade CSV with a trailing `condition` (and optional `recording`)
    /// column.
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write a scatter CSV (ln_amp,ln_pkv,condition).
    #[arg(long)]
    scatter: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// fixation | spikes | saccades | mainseq
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of samples.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    spike_rate: Option<f64>,
    #[arg(long)]
    spike_amp: Option<f64>,
    #[arg(short, long)]
    output: PathBuf,
}

/// key=value config file; `#` lines and blanks ignored.
struct Config(HashMap<String, String>);

impl Config {
    fn load(path: Option<&Path>) -> Result<Config> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            for line in std::fs::read_to_string(path)?.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                if let Some((k, v)) = line.split_once('=') {
                    map.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
        }
        Ok(Config(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                Error::Invalid(format!("config key `{key}`: cannot parse `{v}`"))
            }),
        }
    }
}

fn resolve<T: std::str::FromStr + Clone>(
    flag: Option<T>,
    cfg: &Config,
    key: &str,
    default: T,
) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    Ok(cfg.get(key)?.unwrap_or(default))
}

fn resolve_opt<T: std::str::FromStr>(flag: Option<T>, cfg: &Config, key: &str) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    cfg.get(key)
}

fn filter_kind(select: &FilterSelect, cfg: &Config) -> Result<FilterKind> {
    let name = resolve(select.filter.clone(), cfg, "filter", "none".to_string())?;
    let order = resolve(select.order, cfg, "order", 7usize)?;
    match name.as_str() {
        "none" => Ok(FilterKind::None),
        "std" => Ok(FilterKind::Std),
        "extra" => Ok(FilterKind::Extra),
        "zlp100" => Ok(FilterKind::ZeroPhaseLowPass {
            cutoff_hz: 100.0,
            order,
        }),
        "zlp50" => Ok(FilterKind::ZeroPhaseLowPass {
            cutoff_hz: 50.0,
            order,
        }),
        "custom" => {
            let cutoff = resolve_opt(select.cutoff_hz, cfg, "cutoff-hz")?
                .ok_or_else(|| Error::Invalid("--filter custom requires --cutoff-hz".into()))?;
            Ok(FilterKind::ZeroPhaseLowPass {
                cutoff_hz: cutoff,
                order,
            })
        }
        other => Err(Error::Invalid(format!(
            "unknown filter `{other}` (expected none|std|extra|zlp100|zlp50|custom)"
        ))),
    }
}

fn segment_config(seg: &SegmentArgs, cfg: &Config) -> Result<SegmentConfig> {
    Ok(SegmentConfig {
        block: resolve(seg.block, cfg, "block", 2048)?,
        sub: resolve(seg.fft_len, cfg, "fft-len", 256)?,
        vmax_deg_s: resolve(seg.vmax, cfg, "vmax", 25.0)?,
        two_dimensional_speed: !(seg.horizontal_only
            || cfg.get::<bool>("horizontal-only")?.unwrap_or(false)),
    })
}

fn worker_cap() -> usize {
    std::env::var("OCULOFILT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Write via temp file then rename so readers never see partial output.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp-{}",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
            std::process::id()
        )),
        None => PathBuf::from(format!(".out.tmp-{}", std::process::id())),
    };
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Map inputs to output paths: a single input writes to `output` directly
/// (unless it is a directory); multiple inputs require a directory.
fn output_paths(inputs: &[PathBuf], output: &Path, suffix: &str) -> Result<Vec<PathBuf>> {
    if inputs.is_empty() {
        return Err(Error::Invalid("no input files given".into()));
    }
    let as_dir = output.is_dir();
    if inputs.len() == 1 && !as_dir {
        return Ok(vec![output.to_path_buf()]);
    }
    if !as_dir {
        return Err(Error::Invalid(format!(
            "multiple inputs need an output directory, `{}` is not one",
            output.display()
        )));
    }
    Ok(inputs
        .iter()
        .map(|input| {
            let stem = input
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("recording");
            output.join(format!("{stem}.{suffix}.csv"))
        })
        .collect())
}

/// Process inputs concurrently; each job loads one recording, produces the
/// output bytes, and the bytes are written atomically. Output content only
/// depends on the job's own input, so worker count cannot change results.
fn for_each_input<F>(inputs: &[PathBuf], outputs: &[PathBuf], job: F) -> Result<()>
where
    F: Fn(&Path, Recording) -> Result<Vec<u8>> + Sync,
{
    let next = AtomicUsize::new(0);
    let failures: Mutex<Vec<String>> = Mutex::new(Vec::new());
    let workers = worker_cap().min(inputs.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= inputs.len() {
                    break;
                }
                let result = (|| -> Result<()> {
                    let file = std::fs::File::open(&inputs[i])?;
                    let rec = load_recording(file)?;
                    let bytes = job(&inputs[i], rec)?;
                    write_atomic(&outputs[i], &bytes)
                })();
                if let Err(e) = result {
                    failures
                        .lock()
                        .unwrap()
                        .push(format!("{}: {e}", inputs[i].display()));
                }
            });
        }
    });
    let failures = failures.into_inner().unwrap();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(failures.join("\n")))
    }
}

fn spectrum_csv(s: &Spectrum) -> Vec<u8> {
    let mut out = String::from("freq_hz,amplitude,phase_rad\n");
    for k in 0..s.freqs_hz.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            s.freqs_hz[k], s.amplitude[k], s.phase_rad[k]
        ));
    }
    out.into_bytes()
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    freqs_hz: &'a [f64],
    amplitude: &'a [f64],
    phase_rad: &'a [f64],
    n_segments_averaged: usize,
    segment_length: usize,
}

fn fmt_db(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

fn freqresp_csv(fr: &FrequencyResponse) -> Vec<u8> {
    let mut out = String::from("freq_hz,gain,gain_db,phase_diff_rad\n");
    for k in 0..fr.freqs_hz.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fr.freqs_hz[k],
            fr.gain[k],
            fmt_db(fr.gain_db[k]),
            fr.phase_diff_rad[k]
        ));
    }
    out.into_bytes()
}

#[derive(Serialize)]
struct FreqrespJson<'a> {
    freqs_hz: &'a [f64],
    gain: &'a [f64],
    gain_db: &'a [f64],
    phase_diff_rad: &'a [f64],
    n_segments: usize,
    undefined_bins: &'a [usize],
}

fn saccades_csv(rec: &Recording, saccades: &[SaccadeRecord]) -> Vec<u8> {
    let mut out = String::from("onset_ms,offset_ms,amplitude_deg,peak_velocity_deg_s,duration_ms\n");
    for s in saccades {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            rec.t_ms[s.onset_index],
            rec.t_ms[s.offset_index],
            s.amplitude_deg,
            s.peak_velocity_deg_s,
            s.duration_ms
        ));
    }
    out.into_bytes()
}

fn run_filter(args: &FilterArgs, cfg: &Config) -> Result<()> {
    let kind = filter_kind(&args.select, cfg)?;
    let outputs = output_paths(&args.inputs, &args.output, "filtered")?;
    for_each_input(&args.inputs, &outputs, |_, rec| {
        let filtered = apply_filter(&rec, &kind)?;
        let mut buf = Vec::new();
        serialize_recording(&filtered, &mut buf)?;
        Ok(buf)
    })
}

fn run_spectrum(args: &SpectrumArgs, cfg: &Config) -> Result<()> {
    let seg_cfg = segment_config(&args.seg, cfg)?;
    let vertical = args.seg.vertical || cfg.get::<bool>("vertical")?.unwrap_or(false);
    let json = args.json || cfg.get::<bool>("json")?.unwrap_or(false);
    let suffix = if json { "spectrum.json" } else { "spectrum" };
    let outputs = output_paths(&args.inputs, &args.output, suffix)?;
    for_each_input(&args.inputs, &outputs, |_, rec| {
        let s = averaged_spectrum(&rec, &seg_cfg, vertical)?;
        if json {
            let doc = SpectrumJson {
                freqs_hz: &s.freqs_hz,
                amplitude: &s.amplitude,
                phase_rad: &s.phase_rad,
                n_segments_averaged: s.n_segments_averaged,
                segment_length: s.segment_length,
            };
            Ok(serde_json::to_vec_pretty(&doc).map_err(|e| Error::Invalid(e.to_string()))?)
        } else {
            Ok(spectrum_csv(&s))
        }
    })
}

fn run_freqresp(args: &FreqrespArgs, cfg: &Config) -> Result<()> {
    let kind = filter_kind(&args.select, cfg)?;
    let seg_cfg = segment_config(&args.seg, cfg)?;
    let vertical = args.seg.vertical || cfg.get::<bool>("vertical")?.unwrap_or(false);
    let json = args.json || cfg.get::<bool>("json")?.unwrap_or(false);
    let suffix = if json { "freqresp.json" } else { "freqresp" };
    let outputs = output_paths(&args.inputs, &args.output, suffix)?;
    for_each_input(&args.inputs, &outputs, |_, rec| {
        let (fr, nseg) = frequency_response(&rec, &kind, &seg_cfg, vertical)?;
        if json {
            let doc = FreqrespJson {
                freqs_hz: &fr.freqs_hz,
                gain: &fr.gain,
                gain_db: &fr.gain_db,
                phase_diff_rad: &fr.phase_diff_rad,
                n_segments: nseg,
                undefined_bins: &fr.undefined_bins,
            };
            Ok(serde_json::to_vec_pretty(&doc).map_err(|e| Error::Invalid(e.to_string()))?)
        } else {
            Ok(freqresp_csv(&fr))
        }
    })
}

fn run_bands(args: &BandsArgs, cfg: &Config) -> Result<()> {
    let edges_str = resolve(args.edges.clone(), cfg, "edges", "50,75,100,300".to_string())?;
    let edges: Vec<f64> = edges_str
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("bad band edge `{p}`")))
        })
        .collect::<Result<_>>()?;
    let order = resolve(args.order, cfg, "order", 7usize)?;
    let vertical = args.vertical || cfg.get::<bool>("vertical")?.unwrap_or(false);
    let outputs = output_paths(&args.inputs, &args.output, "bands")?;
    for_each_input(&args.inputs, &outputs, |_, rec| {
        let bands = bands_from_edges(&edges, rec.sample_rate_hz, order)?;
        let channel: &[f64] = if vertical { &rec.y_deg } else { &rec.x_deg };
        // decompose per valid span; invalid samples stay empty
        let mut columns = vec![vec![f64::NAN; rec.len()]; bands.len()];
        for span in crate::recording::contiguous_valid_spans(&rec, 1) {
            let parts =
                crate::iir::band_decompose(&channel[span.range()], &bands, rec.sample_rate_hz);
            match parts {
                Ok(parts) => {
                    for (b, part) in parts.into_iter().enumerate() {
                        columns[b][span.range()].copy_from_slice(&part);
                    }
                }
                Err(Error::TooShort { .. }) => {} // span too short to filter
                Err(e) => return Err(e),
            }
        }
        let mut out = String::from("t_ms");
        for b in &bands {
            out.push_str(&format!(",band_{}_{}", b.low_hz, b.high_hz));
        }
        out.push('\n');
        for i in 0..rec.len() {
            out.push_str(&format!("{}", rec.t_ms[i]));
            for col in &columns {
                if col[i].is_finite() {
                    out.push_str(&format!(",{}", col[i]));
                } else {
                    out.push(',');
                }
            }
            out.push('\n');
        }
        Ok(out.into_bytes())
    })
}

fn run_saccades(args: &SaccadesArgs, cfg: &Config) -> Result<()> {
    let det_cfg = DetectorConfig {
        onset_deg_s: resolve(args.onset, cfg, "onset", 30.0)?,
        offset_deg_s: resolve(args.offset, cfg, "offset", 20.0)?,
        min_duration_ms: resolve(args.min_duration_ms, cfg, "min-duration-ms", 6.0)?,
        merge_gap_ms: resolve(args.merge_gap_ms, cfg, "merge-gap-ms", 20.0)?,
    };
    let outputs = output_paths(&args.inputs, &args.output, "saccades")?;
    for_each_input(&args.inputs, &outputs, |_, rec| {
        let saccades = detect_saccades_in_recording(&rec, &det_cfg)?;
        Ok(saccades_csv(&rec, &saccades))
    })
}

/// Saccade CSV row with its condition and optional recording label.
struct LabeledSaccade {
    record: SaccadeRecord,
    condition: String,
    recording: String,
}

fn parse_saccade_table(path: &Path) -> Result<Vec<LabeledSaccade>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::EmptyRecording)?.trim_end_matches('\r');
    let cols: Vec<&str> = header.split(',').collect();
    let expected = [
        "onset_ms",
        "offset_ms",
        "amplitude_deg",
        "peak_velocity_deg_s",
        "duration_ms",
        "condition",
    ];
    if cols.len() < 6 || cols[..6] != expected {
        return Err(Error::MalformedHeader(header.to_string()));
    }
    let has_recording = cols.len() > 6 && cols[6] == "recording";
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 6 {
            return Err(Error::MalformedRow {
                row: i,
                msg: "expected at least 6 fields".into(),
            });
        }
        let num = |j: usize| -> Result<f64> {
            fields[j].trim().parse().map_err(|_| Error::MalformedRow {
                row: i,
                msg: format!("bad number `{}` in column {}", fields[j], cols[j]),
            })
        };
        let onset_ms = num(0)?;
        let offset_ms = num(1)?;
        rows.push(LabeledSaccade {
            record: SaccadeRecord {
                onset_index: onset_ms.max(0.0) as usize,
                offset_index: offset_ms.max(0.0) as usize,
                amplitude_deg: num(2)?,
                peak_velocity_deg_s: num(3)?,
                duration_ms: num(4)?,
            },
            condition: fields[5].trim().to_string(),
            recording: if has_recording {
                fields[6].trim().to_string()
            } else {
                String::new()
            },
        });
    }
    Ok(rows)
}

fn run_mainseq(args: &MainseqArgs, _cfg: &Config) -> Result<()> {
    let rows = parse_saccade_table(&args.input)?;

    // one fit pair per (condition, recording), summarized per condition
    let mut groups: BTreeMap<(String, String), Vec<SaccadeRecord>> = BTreeMap::new();
    for row in &rows {
        groups
            .entry((row.condition.clone(), row.recording.clone()))
            .or_default()
            .push(row.record);
    }
    let mut fits: BTreeMap<String, Vec<MainSequenceFit>> = BTreeMap::new();
    for ((condition, _recording), saccades) in &groups {
        let group_fits = fit_main_sequence(saccades)?;
        fits.entry(condition.clone()).or_default().extend(group_fits);
    }

    let mut table = String::from("condition,cluster,mean_slope,sd_slope,n_fits\n");
    for row in summarize_by_condition(&fits) {
        table.push_str(&format!(
            "{},{},{},{},{}\n",
            row.condition,
            row.cluster.as_str(),
            row.mean_slope,
            row.sd_slope,
            row.n_fits
        ));
    }
    write_atomic(&args.output, table.as_bytes())?;

    if let Some(scatter_path) = &args.scatter {
        let mut scatter = String::from("ln_amp,ln_pkv,condition\n");
        for row in &rows {
            scatter.push_str(&format!(
                "{},{},{}\n",
                row.record.amplitude_deg.ln(),
                row.record.peak_velocity_deg_s.ln(),
                row.condition
            ));
        }
        write_atomic(scatter_path, scatter.as_bytes())?;
    }
    Ok(())
}

/// Main-sequence shaped saccade parameters: peak velocity from the
/// amplitude power law, duration from the raised-cosine closed form.
fn profile_for_amplitude(amplitude_deg: f64, start_ms: f64) -> SaccadeProfile {
    let peak = 54.6 * amplitude_deg.powf(0.673);
    let duration_ms = std::f64::consts::PI * amplitude_deg / (2.0 * peak) * 1000.0;
    SaccadeProfile {
        amplitude_deg,
        duration_ms,
        shape: ProfileShape::RaisedCosine,
        start_ms,
    }
}

fn run_synth(args: &SynthArgs, cfg: &Config) -> Result<()> {
    let scenario = resolve(args.scenario.clone(), cfg, "scenario", "fixation".to_string())?;
    let seed = resolve(args.seed, cfg, "seed", 0u64)?;
    let fs = 1000.0;

    let mut truth = String::new();
    let rec = match scenario.as_str() {
        "fixation" | "spikes" => {
            let n = resolve(args.n, cfg, "n", if scenario == "spikes" { 27 * 2048 } else { 30_000 })?;
            let model = NoiseModel {
                kind: if scenario == "spikes" {
                    NoiseKind::WhitePlusOneSampleSpikes
                } else {
                    NoiseKind::WhiteGaussian
                },
                sigma_deg: resolve(args.sigma, cfg, "sigma", 0.005)?,
                spike_rate_per_s: resolve(args.spike_rate, cfg, "spike-rate", 20.0)?,
                spike_amplitude_deg: resolve(args.spike_amp, cfg, "spike-amp", 0.1)?,
                seed,
            };
            let real = gen_noise_with_truth(&model, n, fs)?;
            truth.push_str("spike_index\n");
            for s in &real.spike_starts {
                truth.push_str(&format!("{s}\n"));
            }
            Recording::from_xy(fs, real.samples, vec![0.0; n])?
        }
        "saccades" | "mainseq" => {
            let count = if scenario == "saccades" { 16 } else { 48 };
            let spacing_ms = 1200.0;
            let n = resolve(args.n, cfg, "n", (count as f64 * spacing_ms) as usize + 1000)?;
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5acc);
            let mut profiles = Vec::new();
            for k in 0..count {
                let amplitude = if scenario == "saccades" {
                    5.0 + 25.0 * (k as f64 / (count - 1) as f64)
                } else {
                    // log-uniform over 0.5..30 deg
                    (0.5f64.ln() + rng.gen::<f64>() * (30.0f64 / 0.5).ln()).exp()
                };
                // alternate direction so position stays bounded
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let mut profile =
                    profile_for_amplitude(amplitude, 500.0 + k as f64 * spacing_ms);
                profile.amplitude_deg *= sign;
                profiles.push(profile);
            }
            let sigma = resolve(args.sigma, cfg, "sigma", 0.005)?;
            let (rec, records) =
                gen_saccade_recording(&profiles, &NoiseModel::white(sigma, seed), n, fs)?;
            truth.push_str("onset_ms,duration_ms,amplitude_deg,peak_velocity_deg_s\n");
            for r in &records {
                truth.push_str(&format!(
                    "{},{},{},{}\n",
                    r.onset_ms, r.duration_ms, r.amplitude_deg, r.peak_velocity_deg_s
                ));
            }
            rec
        }
        other => {
            return Err(Error::Invalid(format!(
                "unknown scenario `{other}` (expected fixation|spikes|saccades|mainseq)"
            )))
        }
    };

    let mut buf = Vec::new();
    serialize_recording(&rec, &mut buf)?;
    write_atomic(&args.output, &buf)?;
    let truth_path = args.output.with_extension("truth.csv");
    write_atomic(&truth_path, truth.as_bytes())?;
    Ok(())
}

/// Parse argv and execute. Exit codes: 0 success, 1 data/processing error,
/// 2 bad usage.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version as "errors" with exit code 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = (|| -> Result<()> {
        let cfg = Config::load(cli.config.as_deref())?;
        match &cli.command {
            Command::Filter(args) => run_filter(args, &cfg),
            Command::Spectrum(args) => run_spectrum(args, &cfg),
            Command::Freqresp(args) => run_freqresp(args, &cfg),
            Command::Bands(args) => run_bands(args, &cfg),
            Command::Saccades(args) => run_saccades(args, &cfg),
            Command::Mainseq(args) => run_mainseq(args, &cfg),
            Command::Synth(args) => run_synth(args, &cfg),
        }
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
