//! End-to-end acceptance checks. Each test prints one `[PASS]`/`[FAIL]`
//! line with the measured numbers, then asserts.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mwr_sim::channel::sample_realization;
use mwr_sim::experiments::{
    quantile, run_fig1, run_fig2, sorted_sum_se, ExperimentKind, ExperimentSpec, ResultRow,
};
use mwr_sim::oracles::{
    inverse_wishart_trace_check, q_asymptotic_check, quadratic_form_check, variance_terms_check,
    OracleResult,
};
use mwr_sim::processing::{permutation, q_terms_mc, relay_transmit};
use mwr_sim::{
    alpha_mc, estimation_stats, se_closed_form, se_monte_carlo, ComplexMatrix, FadingProfile,
    Method, Processing, ProcessingSet, RngStream, SystemConfig, C64,
};

const SE_REL_TOL: f64 = 0.03;
const SE_TRIALS: usize = 2000;
const SE_TIME_LIMIT: Duration = Duration::from_secs(60);
const POWER_REL_TOL: f64 = 0.03;
const IDENTITY_TOL: f64 = 1e-9;
const IDENTITY_DRAWS: u64 = 100;
const WISHART_TRIALS: usize = 100_000;
const WISHART_TIME_LIMIT: Duration = Duration::from_secs(30);
const STD_ERRORS: f64 = 4.0;
const Q1_REL_TOL: f64 = 0.03;
const ASYMPTOTIC_REL_TOL: f64 = 0.05;
const NOISE_TERM_TRIALS: usize = 2000;
const FIG1_TRIALS: usize = 1000;
const FIG1_TIME_LIMIT: Duration = Duration::from_secs(15 * 60);
const FIG2_DROPS: usize = 500;

fn report(label: &str, pass: bool, detail: &str) {
    println!("[{}] {label}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn reference() -> (SystemConfig, FadingProfile) {
    let cfg = SystemConfig {
        antennas: 100,
        users: 20,
        coherence: 200,
        training: 20,
        uplink_snr: 1.0,
        pilot_snr: 1.0,
        relay_snr: 10.0,
    };
    (cfg, estimation_stats(&[1.0; 20], 20, 1.0).unwrap())
}

#[test]
fn closed_form_matches_monte_carlo_sum_rate() {
    let (cfg, profile) = reference();
    let start = Instant::now();
    let cf = se_closed_form(&cfg, &profile).unwrap();
    let mc = se_monte_carlo(&cfg, &profile, Processing::ZeroForcing, SE_TRIALS, 1).unwrap();
    let elapsed = start.elapsed();
    let rel = (mc.sum - cf.sum).abs() / cf.sum;
    let pass = rel <= SE_REL_TOL && (cf.sum - 68.93).abs() < 0.01 && elapsed < SE_TIME_LIMIT;
    report(
        "closed-form vs Monte Carlo sum SE (ZF, M=100, K=20)",
        pass,
        &format!(
            "closed form {:.3}, Monte Carlo {:.3} +/- {:.3}, rel {:.2}% (tol {}%), {} trials in {:.1} s",
            cf.sum,
            mc.sum,
            mc.sum_ci_halfwidth.unwrap(),
            100.0 * rel,
            100.0 * SE_REL_TOL,
            SE_TRIALS,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn relay_transmit_power_meets_budget() {
    let (cfg, profile) = reference();
    let q = q_terms_mc(&cfg, &profile, Processing::ZeroForcing, SE_TRIALS, 10);
    let alpha = alpha_mc(&cfg, &q);
    let mut total = 0.0;
    for t in 0..SE_TRIALS as u64 {
        let mut rng = RngStream::new(11, t);
        let real = sample_realization(&cfg, &profile, &mut rng);
        let set = loop {
            if let Ok(set) = ProcessingSet::new(Processing::ZeroForcing, &real.ghat, 1, alpha) {
                break set;
            }
        };
        let x: Vec<C64> = (0..cfg.users).map(|_| rng.complex_gaussian()).collect();
        let noise: Vec<C64> = (0..cfg.antennas).map(|_| rng.complex_gaussian()).collect();
        let s = relay_transmit(&real, &set, cfg.uplink_snr, &x, &noise).unwrap();
        total += s.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    let mean = total / SE_TRIALS as f64;
    let rel = (mean - cfg.relay_snr).abs() / cfg.relay_snr;
    let pass = rel <= POWER_REL_TOL;
    report(
        "mean relay transmit power equals Pr",
        pass,
        &format!(
            "mean {:.4} vs Pr {}, rel {:.2}% (tol {}%), alpha {:.3} from independent draws",
            mean,
            cfg.relay_snr,
            100.0 * rel,
            100.0 * POWER_REL_TOL,
            alpha
        ),
    );
    assert!(pass);
}

#[test]
fn zero_forcing_end_to_end_is_the_permutation() {
    let (cfg, profile) = reference();
    let pi = permutation(cfg.users, 1).unwrap();
    let mut worst = 0.0_f64;
    for t in 0..IDENTITY_DRAWS {
        let real = sample_realization(&cfg, &profile, &mut RngStream::new(21, t));
        let set = ProcessingSet::new(Processing::ZeroForcing, &real.ghat, 1, 1.0).unwrap();
        let gains = real
            .ghat
            .transpose()
            .matmul(&set.relay_matrix().matmul(&real.ghat).unwrap())
            .unwrap();
        worst = worst.max(gains.max_abs_diff(&pi));
    }
    let pass = worst <= IDENTITY_TOL;
    report(
        "Ghat^T A Pi W^T Ghat equals Pi",
        pass,
        &format!("max entry error {worst:.2e} over {IDENTITY_DRAWS} draws (tol {IDENTITY_TOL:e})"),
    );
    assert!(pass);
}

fn within_std_errors(r: &OracleResult) -> bool {
    (r.empirical - r.analytic).abs() <= STD_ERRORS * r.mc_std_error
}

#[test]
fn wishart_moments_hold() {
    let start = Instant::now();
    let l1 =
        inverse_wishart_trace_check(6, 2, &[1.0, 2.0], &[2.0, 2.0], WISHART_TRIALS, 31).unwrap();
    let t1 = start.elapsed();
    let start = Instant::now();
    let l2 = quadratic_form_check(&ComplexMatrix::identity(6), WISHART_TRIALS, 32).unwrap();
    let t2 = start.elapsed();
    let p1 =
        within_std_errors(&l1) && (l1.analytic - 0.75).abs() < 1e-15 && t1 < WISHART_TIME_LIMIT;
    let p2 = within_std_errors(&l2) && l2.analytic == 12.0 && t2 < WISHART_TIME_LIMIT;
    for (name, r, t, pass) in [
        ("inverse Wishart trace (M=6, K=2)", &l1, t1, p1),
        ("quadratic form second moment (A=I_6)", &l2, t2, p2),
    ] {
        report(
            name,
            pass,
            &format!(
                "empirical {:.5} analytic {:.5}, {:.2} std errors, {} trials in {:.2} s",
                r.empirical,
                r.analytic,
                r.z_score(),
                r.trials,
                t.as_secs_f64()
            ),
        );
    }
    assert!(p1 && p2);
}

#[test]
fn noise_terms_match_closed_forms() {
    let (cfg, profile) = reference();
    let mut results: Vec<OracleResult> = q_asymptotic_check(&cfg, &profile, NOISE_TERM_TRIALS, 41)
        .unwrap()
        .into();
    results.extend(variance_terms_check(&cfg, &profile, 0, NOISE_TERM_TRIALS, 42).unwrap());
    let mut all = true;
    for r in &results {
        let (pass, rule) = match r.name.as_str() {
            "Q1" => (
                r.rel_error <= Q1_REL_TOL,
                format!("within {}%", 100.0 * Q1_REL_TOL),
            ),
            "Q2" | "Q3" | "V3" | "I3" | "J" => (
                r.rel_error <= ASYMPTOTIC_REL_TOL,
                format!("within {}%", 100.0 * ASYMPTOTIC_REL_TOL),
            ),
            "V1" | "V2" => (
                within_std_errors(r),
                format!("within {STD_ERRORS} std errors"),
            ),
            _ => continue,
        };
        all &= pass;
        report(
            &format!("noise term {} (M/K=5)", r.name),
            pass,
            &format!(
                "empirical {:.4e} analytic {:.4e}, rel {:.2}%, {:.1} std errors ({rule})",
                r.empirical,
                r.analytic,
                100.0 * r.rel_error,
                r.z_score()
            ),
        );
    }
    report("noise term suite", all, "all terms above");
    assert!(all);
}

fn curve(rows: &[ResultRow], ratio: usize, mode: Processing, method: Method) -> Vec<(usize, f64)> {
    rows.iter()
        .filter(|r| r.antennas == ratio * r.users && r.mode == mode && r.method == method)
        .map(|r| (r.users, r.sum_se))
        .collect()
}

#[test]
fn figure1_shape() {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::Fig1);
    spec.trials = FIG1_TRIALS;
    let start = Instant::now();
    let rows = run_fig1(&spec).unwrap();
    let elapsed = start.elapsed();

    let mut ok_order = true;
    let mut ok_peak = true;
    let mut lines = Vec::new();
    let zf = |ratio| curve(&rows, ratio, Processing::ZeroForcing, Method::MonteCarlo);
    for &ratio in &spec.fig1.ratios {
        let z = zf(ratio);
        let m = curve(&rows, ratio, Processing::MaximumRatio, Method::MonteCarlo);
        for ((k, a), (_, b)) in z.iter().zip(&m) {
            if (20..=180).contains(k) && a <= b {
                ok_order = false;
            }
        }
        let peak = z.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
        ok_peak &= [80, 100, 120].contains(&peak);
        lines.push(format!("ratio {ratio}: ZF peak at K={peak}"));
    }
    let ok_ratio = zf(5).iter().zip(zf(10)).all(|(a, b)| b.1 > a.1);
    let ok_time = elapsed < FIG1_TIME_LIMIT;
    let pass = ok_order && ok_peak && ok_ratio && ok_time;
    report(
        "figure 1: ZF above MR for K in [20, 180]",
        ok_order,
        &lines.join(", "),
    );
    report(
        "figure 1: ZF peak in K in {80, 100, 120}",
        ok_peak,
        &lines.join(", "),
    );
    report(
        "figure 1: ratio 10 above ratio 5 at every K",
        ok_ratio,
        "ZF Monte Carlo curves",
    );
    report(
        "figure 1: runtime",
        ok_time,
        &format!(
            "{:.0} s at {FIG1_TRIALS} trials per point",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn figure2_shape() {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::Fig2);
    spec.fig2.drops = FIG2_DROPS;
    let rows = run_fig2(&spec).unwrap();
    let stats = |case, mode| {
        let v = sorted_sum_se(&rows, case, mode);
        (quantile(&v, 0.5), quantile(&v, 0.75) - quantile(&v, 0.25))
    };
    let (zf1, zf1_iqr) = stats(1, Processing::ZeroForcing);
    let (mr1, mr1_iqr) = stats(1, Processing::MaximumRatio);
    let (zf2, _) = stats(2, Processing::ZeroForcing);
    let (mr2, _) = stats(2, Processing::MaximumRatio);
    let p_median = zf1 > mr1;
    let p_iqr = zf1_iqr > mr1_iqr;
    let p_reversal = mr2 >= zf2;
    report(
        "figure 2: case 1 median ZF above MR",
        p_median,
        &format!("median ZF {zf1:.2}, MR {mr1:.2} over {FIG2_DROPS} drops"),
    );
    report(
        "figure 2: case 1 ZF IQR above MR IQR",
        p_iqr,
        &format!("IQR ZF {zf1_iqr:.2}, MR {mr1_iqr:.2}"),
    );
    report(
        "figure 2: case 2 median MR at or above ZF",
        p_reversal,
        &format!("median ZF {zf2:.2}, MR {mr2:.2}"),
    );
    assert!(p_median && p_iqr && p_reversal);
}

fn run_cli(dir: &Path, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_mwr-sim"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("fig1.cfg"),
        "k_values = 10, 20\nratios = 5, 10\ntrials = 200\n",
    )
    .unwrap();
    fs::write(d.join("fig2.cfg"), "drops = 8\ntrials = 100\n").unwrap();
    fs::write(d.join("val.cfg"), "wishart_trials = 5000\ntrials = 200\n").unwrap();
    fs::write(
        d.join("single.cfg"),
        "experiment = fig2\ncase = 2\ndrop = 3\nmode = mr\ntrials = 100\n",
    )
    .unwrap();

    let mut identical = true;
    let mut checked = Vec::new();
    for (cmd, cfg, files) in [
        ("fig1", "fig1.cfg", vec!["out.csv"]),
        ("fig2", "fig2.cfg", vec!["out.csv", "out_cdf.csv"]),
        ("validate", "val.cfg", vec!["out.csv"]),
        ("single", "single.cfg", vec!["out.csv"]),
    ] {
        let mut outputs = Vec::new();
        for (run, threads) in ["1", "4", "4"].iter().enumerate() {
            let sub = d.join(format!("{cmd}-{run}"));
            fs::create_dir_all(&sub).unwrap();
            let cfg_path = d.join(cfg);
            run_cli(
                &sub,
                &[
                    cmd,
                    "--config",
                    cfg_path.to_str().unwrap(),
                    "--seed",
                    "77",
                    "--threads",
                    threads,
                    "--out",
                    "out.csv",
                ],
            );
            outputs.push(
                files
                    .iter()
                    .map(|f| fs::read(sub.join(f)).unwrap())
                    .collect::<Vec<_>>(),
            );
        }
        let same = outputs.iter().all(|o| o == &outputs[0]);
        identical &= same;
        checked.push(format!(
            "{cmd} {}",
            if same { "identical" } else { "differs" }
        ));
    }
    report(
        "same seed and config give byte-identical CSV at 1 and 4 threads",
        identical,
        &checked.join(", "),
    );
    assert!(identical);
}
