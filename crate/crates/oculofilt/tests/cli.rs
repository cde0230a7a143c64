//! End-to-end tests of the `oculofilt` binary: argument handling, config
//! precedence, output formats and the saccades-to-mainseq chain.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn oculofilt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oculofilt"))
        .args(args)
        .current_dir(dir)
        .env("OCULOFILT_THREADS", "2")
        .output()
        .expect("spawn oculofilt")
}

fn expect_ok(dir: &Path, args: &[&str]) {
    let out = oculofilt(dir, args);
    assert!(
        out.status.success(),
        "oculofilt {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("read {name}: {e}"))
}

/// A short fixation recording: 4 blocks of 2048 so spectrum commands have
/// segments to average without taking long.
fn small_fixation(dir: &Path) -> PathBuf {
    expect_ok(
        dir,
        &[
            "synth", "--scenario", "fixation", "--seed", "9", "--n", "8192", "--output", "rec.csv",
        ],
    );
    dir.join("rec.csv")
}

#[test]
fn filter_none_is_identity_on_serialized_form() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    small_fixation(dir);
    expect_ok(dir, &["filter", "rec.csv", "--filter", "none", "--output", "same.csv"]);
    assert_eq!(read(dir, "rec.csv"), read(dir, "same.csv"));

    expect_ok(dir, &["filter", "rec.csv", "--filter", "zlp100", "--output", "filt.csv"]);
    assert_ne!(read(dir, "rec.csv"), read(dir, "filt.csv"));
    // filtered output is still a loadable recording with the same grid
    let rec = oculofilt::load_recording(read(dir, "filt.csv").as_bytes()).unwrap();
    assert_eq!(rec.len(), 8192);
    assert_eq!(rec.sample_rate_hz, 1000.0);
}

#[test]
fn multiple_inputs_write_into_directory_by_stem() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    small_fixation(dir);
    std::fs::copy(dir.join("rec.csv"), dir.join("other.csv")).unwrap();
    std::fs::create_dir(dir.join("out")).unwrap();
    expect_ok(
        dir,
        &["filter", "rec.csv", "other.csv", "--filter", "std", "--output", "out"],
    );
    assert!(dir.join("out/rec.filtered.csv").exists());
    assert!(dir.join("out/other.filtered.csv").exists());
    assert_eq!(read(dir, "out/rec.filtered.csv"), read(dir, "out/other.filtered.csv"));

    // multiple inputs without a directory is a usage-level failure
    let out = oculofilt(dir, &["filter", "rec.csv", "other.csv", "--output", "flat.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    small_fixation(dir);
    std::fs::write(
        dir.join("oculofilt.conf"),
        "# analysis defaults\nfilter = zlp50\norder = 7\n",
    )
    .unwrap();

    expect_ok(
        dir,
        &["freqresp", "rec.csv", "--filter", "zlp50", "--output", "direct.csv"],
    );
    expect_ok(
        dir,
        &["--config", "oculofilt.conf", "freqresp", "rec.csv", "--output", "from_config.csv"],
    );
    assert_eq!(read(dir, "direct.csv"), read(dir, "from_config.csv"));

    // an explicit flag overrides the config value
    expect_ok(
        dir,
        &["freqresp", "rec.csv", "--filter", "zlp100", "--output", "zlp100.csv"],
    );
    expect_ok(
        dir,
        &[
            "--config", "oculofilt.conf", "freqresp", "rec.csv", "--filter", "zlp100",
            "--output", "flag_wins.csv",
        ],
    );
    assert_eq!(read(dir, "zlp100.csv"), read(dir, "flag_wins.csv"));
    assert_ne!(read(dir, "zlp100.csv"), read(dir, "direct.csv"));
}

#[test]
fn json_and_csv_spectra_carry_identical_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    small_fixation(dir);
    expect_ok(dir, &["spectrum", "rec.csv", "--output", "s.csv"]);
    expect_ok(dir, &["spectrum", "rec.csv", "--json", "--output", "s.json"]);

    let doc: serde_json::Value = serde_json::from_str(&read(dir, "s.json")).unwrap();
    let json_amp: Vec<f64> = doc["amplitude"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();

    let csv = read(dir, "s.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("freq_hz,amplitude,phase_rad"));
    let csv_amp: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();

    assert_eq!(json_amp.len(), 129);
    // both formats round-trip f64 exactly, so the values must be bit-equal
    for (a, b) in json_amp.iter().zip(&csv_amp) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn saccades_feed_mainseq_slope_table() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    expect_ok(
        dir,
        &["synth", "--scenario", "mainseq", "--seed", "3", "--output", "ms.csv"],
    );
    expect_ok(dir, &["saccades", "ms.csv", "--output", "sacc.csv"]);

    // label every detected saccade with one condition and refit
    let detected = read(dir, "sacc.csv");
    let mut labeled = String::new();
    for (i, line) in detected.lines().enumerate() {
        labeled.push_str(line);
        labeled.push_str(if i == 0 { ",condition" } else { ",none" });
        labeled.push('\n');
    }
    assert!(labeled.lines().count() > 20, "too few saccades detected");
    std::fs::write(dir.join("labeled.csv"), labeled).unwrap();
    expect_ok(
        dir,
        &["mainseq", "labeled.csv", "--output", "table.csv", "--scatter", "scatter.csv"],
    );

    let table = read(dir, "table.csv");
    let mut lines = table.lines();
    assert_eq!(
        lines.next(),
        Some("condition,cluster,mean_slope,sd_slope,n_fits")
    );
    let mut slopes = std::collections::HashMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], "none");
        slopes.insert(f[1].to_string(), f[2].parse::<f64>().unwrap());
    }
    // the generator embeds a 0.673 power law across all amplitudes;
    // detection noise and the six-point attenuation leave a small bias
    for cluster in ["small", "large"] {
        let slope = slopes[cluster];
        assert!(
            (slope - 0.673).abs() < 0.08,
            "{cluster} cluster slope {slope}"
        );
    }

    let scatter = read(dir, "scatter.csv");
    assert_eq!(scatter.lines().next(), Some("ln_amp,ln_pkv,condition"));
    assert_eq!(scatter.lines().count(), detected.lines().count());
}

#[test]
fn exit_codes_distinguish_usage_and_data_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    let out = oculofilt(dir, &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("filter"));

    let out = oculofilt(dir, &["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));

    let out = oculofilt(dir, &["spectrum", "missing.csv", "--output", "x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));

    let out = oculofilt(dir, &["filter", "a.csv", "--filter", "bogus", "--output", "b.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}
