use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mwr_sim::experiments::{parse_config, ExperimentKind, ExperimentSpec, RESULT_HEADER};

fn mwr_sim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwr-sim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL_FIG1: &str = "k_values = 4, 6\nratios = 5\ntrials = 100\n";
const SMALL_FIG2: &str = "drops = 6\nusers = 4\nantennas = 20\ntrials = 100\n";

#[test]
fn fig1_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "f1.cfg", SMALL_FIG1);
    let out = mwr_sim(dir.path(), &["fig1", "--config", &cfg, "--out", "f1.csv"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("f1.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], RESULT_HEADER);
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert!(lines[1].starts_with("fig1,20,4,zf,closed_form,,,"));
    assert!(lines[3].starts_with("fig1,20,4,mr,monte_carlo,,,"));
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "f1.cfg",
        &format!("{SMALL_FIG1}seed = 5\nmode = both\n"),
    );
    let out = mwr_sim(
        dir.path(),
        &[
            "fig1", "--config", &cfg, "--seed", "9", "--mode", "mr", "--out", "-",
        ],
    );
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert!(row.contains(",mr,monte_carlo,"));
        assert!(row.ends_with(",9,100"));
    }
}

#[test]
fn invalid_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for text in [
        "unknown_key = 1\n",
        "trials = 10\n",
        "k_values = 250\n",
        "no equals sign\n",
    ] {
        let cfg = write_config(dir.path(), "bad.cfg", text);
        let out = mwr_sim(dir.path(), &["fig1", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{text:?}");
    }
    let out = mwr_sim(dir.path(), &["fig1", "--config", "missing.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mwr_sim(dir.path(), &["fig3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_passes_exact_identities_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "v.cfg",
        "wishart_trials = 20000\ntrials = 300\n",
    );
    let a = mwr_sim(
        dir.path(),
        &["validate", "--config", &cfg, "--out", "a.csv"],
    );
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    let b = mwr_sim(
        dir.path(),
        &[
            "validate",
            "--config",
            &cfg,
            "--out",
            "b.csv",
            "--threads",
            "2",
        ],
    );
    assert_eq!(b.status.code(), Some(0));
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    for name in [
        "inverse_wishart_trace M=6 K=2",
        "quadratic_form M=6",
        "Q1",
        "V1",
        "V2",
    ] {
        let line = text
            .lines()
            .find(|l| l.starts_with(&format!("{name},")))
            .unwrap_or_else(|| panic!("{name} missing"));
        assert!(
            line.starts_with(&format!("{name},exact,")) && line.ends_with(",pass"),
            "{line}"
        );
    }
}

#[test]
fn fig2_rows_replay_through_single() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "f2.cfg", SMALL_FIG2);
    let out = mwr_sim(
        dir.path(),
        &["fig2", "--config", &cfg, "--out", "f2.csv", "--seed", "3"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("f2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6 * 2 * 2);
    let cdf = fs::read_to_string(dir.path().join("f2_cdf.csv")).unwrap();
    assert_eq!(cdf.lines().count(), 1 + 6 * 2 * 2);

    for row in csv.lines().skip(1).step_by(5) {
        let f: Vec<&str> = row.split(',').collect();
        let replay = format!(
            "experiment = fig2\nantennas = {}\nusers = {}\nmode = {}\nmethod = {}\ncase = {}\ndrop = {}\nseed = {}\ntrials = {}\n",
            f[1], f[2], f[3], f[4], f[5], f[6], f[11], f[12]
        );
        let rcfg = write_config(dir.path(), "replay.cfg", &replay);
        let out = mwr_sim(dir.path(), &["single", "--config", &rcfg]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert_eq!(stdout.lines().nth(1), Some(row));
    }
}

#[test]
fn center_placement_matches_unit_gain_fig1_point() {
    let entries =
        parse_config("placement = center\ndrops = 1\ntrials = 200\ncase1 = 1e-12, 1e-12, 1e-11\n")
            .unwrap();
    let spec = ExperimentSpec::from_entries(ExperimentKind::Fig2, &entries).unwrap();
    let rows =
        mwr_sim::experiments::fig2_rows(&spec, 0, 1, &[mwr_sim::Processing::ZeroForcing]).unwrap();
    // 1e-12 W over -120 dB noise is unit SNR, so the drop is the fig1 setting
    let cfg = mwr_sim::SystemConfig {
        antennas: 100,
        users: 20,
        coherence: 200,
        training: 20,
        uplink_snr: 1.0,
        pilot_snr: 1.0,
        relay_snr: 10.0,
    };
    let profile = mwr_sim::estimation_stats(&[1.0; 20], 20, 1.0).unwrap();
    let cf = mwr_sim::se_closed_form(&cfg, &profile).unwrap();
    let rel = (rows[0].sum_se - cf.sum).abs() / cf.sum;
    assert!(
        rel < 0.03,
        "center drop {} vs closed form {}",
        rows[0].sum_se,
        cf.sum
    );
}
