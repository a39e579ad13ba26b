//! Spectral efficiency of the first broadcast slot: the large-antenna closed
//! form for zero-forcing and a Monte Carlo estimator of the use-and-forget
//! bound for either processing mode.
//!
//! The Monte Carlo estimator follows the bound's structure: every expectation
//! (mean gain, gain powers, amplified noise, relay power traces) is averaged
//! over channel draws first, and only then combined into one SINR per user.

use std::fmt;

use crate::channel::{next_user, prev_user, FadingProfile, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::moments::{
    collect_moments, collect_moments_modes, MomentEstimates, GLOBAL_RECORD, USER_RECORD,
};
use crate::processing::{alpha_analytic, alpha_mc, Processing, QTriple};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// How a spectral-efficiency figure was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    MonteCarlo,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Per-user and sum spectral efficiency in bit/s/Hz.
#[derive(Clone, Debug, PartialEq)]
pub struct SeReport {
    pub mode: Processing,
    pub method: Method,
    pub per_user: Vec<f64>,
    pub sum: f64,
    /// Channel draws behind the estimate; zero for the closed form.
    pub trials: usize,
    /// Relay normalization used.
    pub alpha: f64,
    /// Per-user 95% half-widths (Monte Carlo only, empty otherwise).
    pub ci_halfwidth: Vec<f64>,
    /// 95% half-width of the sum (Monte Carlo only).
    pub sum_ci_halfwidth: Option<f64>,
}

impl SeReport {
    pub fn min(&self) -> f64 {
        self.per_user.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.per_user
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sum spectral efficiency over all users.
pub fn sum_se(report: &SeReport) -> f64 {
    report.per_user.iter().sum()
}

/// Accepts `τ = T` (no data phase, zero rate); otherwise the usual checks.
fn validate_for_rate(cfg: &SystemConfig) -> Result<()> {
    if cfg.training == cfg.coherence {
        SystemConfig {
            coherence: cfg.coherence + 1,
            ..*cfg
        }
        .validate()
    } else {
        cfg.validate()
    }
}

fn check_profile(cfg: &SystemConfig, profile: &FadingProfile) -> Result<()> {
    if profile.users() != cfg.users {
        return Err(Error::InvalidConfig(format!(
            "profile has {} users, config has {}",
            profile.users(),
            cfg.users
        )));
    }
    Ok(())
}

/// Interference coefficient `I_{k,i}` of the closed form. `I_{k,k+1}` is the
/// variance of the desired gain, `I_{k,k}` the self-interference power and
/// the rest cross interference.
pub fn interference_term(cfg: &SystemConfig, profile: &FadingProfile, k: usize, i: usize) -> f64 {
    let users = cfg.users;
    let m = cfg.antennas as f64;
    let mk = m * (m - users as f64);
    let s_prev_i = profile.estimate_var[prev_user(i, users)];
    let s_next_k = profile.estimate_var[next_user(k, users)];
    let (e_k, e_i) = (profile.error_var[k], profile.error_var[i]);
    (m * s_prev_i * e_i + m * s_next_k * e_k + s_next_k * s_prev_i * e_k * e_i * profile.rho)
        / (mk * s_prev_i * s_next_k)
}

/// Amplified-noise coefficient `J_k` of the closed form.
pub fn amplified_noise_term(cfg: &SystemConfig, profile: &FadingProfile, k: usize) -> f64 {
    let m = cfg.antennas as f64;
    let mk = m * (m - cfg.users as f64);
    let s_next_k = profile.estimate_var[next_user(k, cfg.users)];
    (m + s_next_k * profile.error_var[k] * profile.rho) / (mk * s_next_k)
}

/// Closed-form SINR of user `k` for normalization `alpha`.
pub fn closed_form_sinr(cfg: &SystemConfig, profile: &FadingProfile, k: usize, alpha: f64) -> f64 {
    let interference: f64 = (0..cfg.users)
        .map(|i| interference_term(cfg, profile, k, i))
        .sum();
    let signal = alpha * cfg.uplink_snr;
    signal / (signal * interference + alpha * amplified_noise_term(cfg, profile, k) + 1.0)
}

/// Large-antenna closed-form spectral efficiency of zero-forcing relaying.
pub fn se_closed_form(cfg: &SystemConfig, profile: &FadingProfile) -> Result<SeReport> {
    validate_for_rate(cfg)?;
    check_profile(cfg, profile)?;
    let alpha = alpha_analytic(cfg, profile);
    let pre = cfg.prefactor();
    let per_user: Vec<f64> = (0..cfg.users)
        .map(|k| pre * (1.0 + closed_form_sinr(cfg, profile, k, alpha)).log2())
        .collect();
    Ok(SeReport {
        mode: Processing::ZeroForcing,
        method: Method::ClosedForm,
        sum: per_user.iter().sum(),
        per_user,
        trials: 0,
        alpha,
        ci_halfwidth: Vec::new(),
        sum_ci_halfwidth: None,
    })
}

/// Terms of the effective noise variance seen by one user.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseDecomposition {
    pub user: usize,
    /// `E{g_kᵀ b_{k+1}}`.
    pub desired_mean: C64,
    /// `Var(g_kᵀ b_{k+1})`.
    pub var_desired: f64,
    /// `E{|g_kᵀ b_k|²}`.
    pub self_interf: f64,
    /// `(i, E{|g_kᵀ b_i|²})` for every `i ∉ {k, k+1}`.
    pub cross_interf: Vec<(usize, f64)>,
    /// `E{‖g_kᵀ C⁽¹⁾‖²}`.
    pub amplified_noise: f64,
    /// `Var(Ñ_k) = αP_u(var + self + cross) + α·amplified + 1`.
    pub effective_noise_var: f64,
}

impl NoiseDecomposition {
    pub fn cross_total(&self) -> f64 {
        self.cross_interf.iter().map(|(_, v)| v).sum()
    }
}

/// Splits the Monte Carlo moments into the effective-noise terms of each user.
pub fn decompose(
    cfg: &SystemConfig,
    moments: &MomentEstimates,
    alpha: f64,
) -> Vec<NoiseDecomposition> {
    let users = moments.users();
    (0..users)
        .map(|k| {
            let next = next_user(k, users);
            let mean = moments.desired_mean[k];
            let var_desired = (moments.gain_power(k, next) - mean.norm_sqr()).max(0.0);
            let self_interf = moments.gain_power(k, k);
            let cross_interf: Vec<(usize, f64)> = (0..users)
                .filter(|&i| i != k && i != next)
                .map(|i| (i, moments.gain_power(k, i)))
                .collect();
            let cross: f64 = cross_interf.iter().map(|(_, v)| v).sum();
            let amplified_noise = moments.amplified_noise[k];
            NoiseDecomposition {
                user: k,
                desired_mean: mean,
                var_desired,
                self_interf,
                cross_interf,
                amplified_noise,
                effective_noise_var: alpha * cfg.uplink_snr * (var_desired + self_interf + cross)
                    + alpha * amplified_noise
                    + 1.0,
            }
        })
        .collect()
}

/// Monte Carlo estimate of every effective-noise term for the first slot.
pub fn noise_decomposition_mc(
    cfg: &SystemConfig,
    profile: &FadingProfile,
    mode: Processing,
    alpha: f64,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<NoiseDecomposition>> {
    cfg.validate()?;
    check_profile(cfg, profile)?;
    check_trials(n_trials)?;
    let moments = collect_moments(cfg.antennas, profile, mode, n_trials, seed);
    Ok(decompose(cfg, &moments, alpha))
}

fn check_trials(n_trials: usize) -> Result<()> {
    if n_trials < 100 {
        return Err(Error::InvalidConfig(format!(
            "Monte Carlo estimates need at least 100 trials, got {n_trials}"
        )));
    }
    Ok(())
}

/// Monte Carlo spectral efficiency of the use-and-forget bound.
pub fn se_monte_carlo(
    cfg: &SystemConfig,
    profile: &FadingProfile,
    mode: Processing,
    n_trials: usize,
    seed: u64,
) -> Result<SeReport> {
    validate_for_rate(cfg)?;
    check_profile(cfg, profile)?;
    check_trials(n_trials)?;
    let moments = collect_moments(cfg.antennas, profile, mode, n_trials, seed);
    Ok(se_from_moments(cfg, &moments))
}

/// [`se_monte_carlo`] for several modes on common channel draws; entry `i`
/// equals the single-mode run for `modes[i]` with the same seed.
pub fn se_monte_carlo_modes(
    cfg: &SystemConfig,
    profile: &FadingProfile,
    modes: &[Processing],
    n_trials: usize,
    seed: u64,
) -> Result<Vec<SeReport>> {
    validate_for_rate(cfg)?;
    check_profile(cfg, profile)?;
    check_trials(n_trials)?;
    Ok(
        collect_moments_modes(cfg.antennas, profile, modes, n_trials, seed)
            .iter()
            .map(|m| se_from_moments(cfg, m))
            .collect(),
    )
}

/// Moments of one user that enter its rate, in record order after the
/// power traces.
#[derive(Clone, Copy)]
struct UserMoments {
    q: [f64; 3],
    mean: C64,
    desired_power: f64,
    other_power: f64,
    amplified: f64,
}

impl UserMoments {
    fn from_slice(v: &[f64; GLOBAL_RECORD + USER_RECORD]) -> Self {
        Self {
            q: [v[0], v[1], v[2]],
            mean: C64::new(v[3], v[4]),
            desired_power: v[5],
            other_power: v[6],
            amplified: v[7],
        }
    }

    fn rate(&self, cfg: &SystemConfig) -> f64 {
        let q = QTriple {
            q1: self.q[0],
            q2: self.q[1],
            q3: self.q[2],
        };
        let alpha = alpha_mc(cfg, &q);
        let gain = self.mean.norm_sqr();
        let var = alpha * cfg.uplink_snr * (self.desired_power - gain + self.other_power)
            + alpha * self.amplified
            + 1.0;
        cfg.prefactor() * (1.0 + alpha * cfg.uplink_snr * gain / var).log2()
    }
}

/// Assembles the per-user rates from Monte Carlo moments, with 95%
/// confidence half-widths from a first-order (delta method) propagation of
/// the per-trial spread of every moment.
pub fn se_from_moments(cfg: &SystemConfig, moments: &MomentEstimates) -> SeReport {
    let users = moments.users();
    let n = moments.trials;
    let alpha = alpha_mc(cfg, &moments.q);
    let width = moments.record_len();

    // Means and spreads of the 8 record fields each user's rate depends on.
    let mut per_user = Vec::with_capacity(users);
    let mut gradients = Vec::with_capacity(users);
    let mut centers = Vec::with_capacity(users);
    for k in 0..users {
        let fields = user_fields(k);
        let mut mean = [0.0; GLOBAL_RECORD + USER_RECORD];
        let mut sq = [0.0; GLOBAL_RECORD + USER_RECORD];
        for t in 0..n {
            let rec = &moments.records[t * width..(t + 1) * width];
            for (j, &f) in fields.iter().enumerate() {
                mean[j] += rec[f];
                sq[j] += rec[f] * rec[f];
            }
        }
        for j in 0..mean.len() {
            mean[j] /= n as f64;
            sq[j] = (sq[j] / n as f64 - mean[j] * mean[j]).max(0.0).sqrt();
        }
        // Running means can differ from the accumulator means in the last
        // bits; report the rate from the accumulators and use these only for
        // the gradient.
        let k1 = next_user(k, users);
        let other: f64 = (0..users)
            .filter(|&i| i != k1)
            .map(|i| moments.gain_power(k, i))
            .sum();
        let exact = UserMoments {
            q: [moments.q.q1, moments.q.q2, moments.q.q3],
            mean: moments.desired_mean[k],
            desired_power: moments.gain_power(k, k1),
            other_power: other,
            amplified: moments.amplified_noise[k],
        };
        per_user.push(exact.rate(cfg));

        let mut grad = [0.0; GLOBAL_RECORD + USER_RECORD];
        for j in 0..grad.len() {
            let h = 1e-4 * sq[j].max(mean[j].abs() * 1e-8).max(1e-300);
            let mut hi = mean;
            let mut lo = mean;
            hi[j] += h;
            lo[j] -= h;
            let d = UserMoments::from_slice(&hi).rate(cfg) - UserMoments::from_slice(&lo).rate(cfg);
            grad[j] = if d.is_finite() { d / (2.0 * h) } else { 0.0 };
        }
        gradients.push(grad);
        centers.push(mean);
    }

    let mut var_user = vec![0.0; users];
    let mut var_sum = 0.0;
    for t in 0..n {
        let rec = &moments.records[t * width..(t + 1) * width];
        let mut total = 0.0;
        for k in 0..users {
            let fields = user_fields(k);
            let infl: f64 = fields
                .iter()
                .enumerate()
                .map(|(j, &f)| gradients[k][j] * (rec[f] - centers[k][j]))
                .sum();
            var_user[k] += infl * infl;
            total += infl;
        }
        var_sum += total * total;
    }
    let denom = (n.max(2) - 1) as f64 * n as f64;
    let ci_halfwidth = var_user.iter().map(|v| Z95 * (v / denom).sqrt()).collect();

    SeReport {
        mode: moments.mode,
        method: Method::MonteCarlo,
        sum: per_user.iter().sum(),
        per_user,
        trials: n,
        alpha,
        ci_halfwidth,
        sum_ci_halfwidth: Some(Z95 * (var_sum / denom).sqrt()),
    }
}

/// Record offsets of user `k`'s rate inputs.
fn user_fields(k: usize) -> [usize; GLOBAL_RECORD + USER_RECORD] {
    let base = GLOBAL_RECORD + USER_RECORD * k;
    [0, 1, 2, base, base + 1, base + 2, base + 3, base + 4]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::estimation_stats;

    fn fig1(m: usize, k: usize) -> (SystemConfig, FadingProfile) {
        let cfg = SystemConfig {
            antennas: m,
            users: k,
            coherence: 200,
            training: k,
            uplink_snr: 1.0,
            pilot_snr: 1.0,
            relay_snr: 10.0,
        };
        (cfg, estimation_stats(&vec![1.0; k], k, 1.0).unwrap())
    }

    /// Independent arithmetic for the equal-user case: every σ² is
    /// `τ/(τ+1)` and ϱ = K/σ⁴.
    fn equal_users_reference(m: f64, k: f64, tau: f64, pu: f64, pr: f64, t: f64) -> (f64, f64) {
        let s = tau / (tau + 1.0);
        let e = 1.0 - s;
        let rho = k / (s * s);
        let alpha = m * (m - k) * pr / (m * pu * k / s + pu * k * e * rho + rho);
        let i = (2.0 * m * s * e + s * s * e * e * rho) / (m * (m - k) * s * s);
        let j = (m + s * e * rho) / (m * (m - k) * s);
        let sinr = alpha * pu / (alpha * pu * k * i + alpha * j + 1.0);
        let per_user = (t - tau) / t * (k - 1.0) / k * (1.0 + sinr).log2();
        (per_user, sinr)
    }

    #[test]
    fn closed_form_reference_point() {
        let (cfg, p) = fig1(100, 20);
        let r = se_closed_form(&cfg, &p).unwrap();
        let (per_user, sinr) = equal_users_reference(100.0, 20.0, 20.0, 1.0, 10.0, 200.0);
        assert!((sinr - 15.344).abs() < 1e-3, "sinr {sinr}");
        assert!((r.per_user[0] - per_user).abs() < 1e-12);
        assert!((r.per_user[0] - 3.447).abs() < 1e-3);
        assert!((r.sum - 68.93).abs() < 5e-3, "sum {}", r.sum);
        assert!((r.alpha - 37.330).abs() < 1e-3);
        let total_i: f64 = (0..20).map(|i| interference_term(&cfg, &p, 0, i)).sum();
        assert!((total_i - 0.025125).abs() < 1e-6, "{total_i}");
        assert!((amplified_noise_term(&cfg, &p, 0) - 0.0132563).abs() < 1e-7);
        assert_eq!(sum_se(&r), r.sum);
    }

    #[test]
    fn equal_users_are_symmetric() {
        let (cfg, p) = fig1(60, 7);
        let r = se_closed_form(&cfg, &p).unwrap();
        assert!(r.per_user.iter().all(|&v| v == r.per_user[0]));
        assert!((sum_se(&r) - 7.0 * r.per_user[0]).abs() < 1e-12);
    }

    #[test]
    fn empty_data_phase_and_vanishing_power() {
        let (mut cfg, p) = fig1(100, 20);
        cfg.coherence = 20;
        let r = se_closed_form(&cfg, &p).unwrap();
        assert!(r.per_user.iter().all(|&v| v == 0.0));
        assert_eq!(sum_se(&r), 0.0);

        let (mut cfg, p) = fig1(100, 20);
        cfg.uplink_snr = 1e-15;
        assert!(se_closed_form(&cfg, &p).unwrap().sum < 1e-9);
    }

    #[test]
    fn invalid_training_lengths() {
        let (mut cfg, p) = fig1(100, 20);
        cfg.training = 19;
        assert!(matches!(
            se_closed_form(&cfg, &p),
            Err(Error::InvalidConfig(_))
        ));
        cfg.training = 201;
        assert!(matches!(
            se_closed_form(&cfg, &p),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn closed_form_grows_with_antennas() {
        let mut last = 0.0;
        for m in [25, 50, 100, 200, 400] {
            let (cfg, p) = fig1(m, 20);
            let s = se_closed_form(&cfg, &p).unwrap().sum;
            assert!(s >= last, "M={m}: {s} < {last}");
            last = s;
        }
    }

    #[test]
    fn prefactor_is_linear_in_data_fraction() {
        let (cfg, p) = fig1(100, 20);
        let base = se_closed_form(&cfg, &p).unwrap().sum;
        // α and the SINR do not depend on T
        for t in [40, 100, 400, 1000] {
            let c = SystemConfig {
                coherence: t,
                ..cfg
            };
            let s = se_closed_form(&c, &p).unwrap().sum;
            let expect = base * ((t - 20) as f64 / t as f64) / (180.0 / 200.0);
            assert!((s - expect).abs() < 1e-12 * expect, "T={t}");
        }
    }

    #[test]
    fn monte_carlo_matches_closed_form() {
        let (cfg, p) = fig1(100, 20);
        let cf = se_closed_form(&cfg, &p).unwrap();
        let mc = se_monte_carlo(&cfg, &p, Processing::ZeroForcing, 2000, 9).unwrap();
        assert!(
            (mc.sum / cf.sum - 1.0).abs() < 0.03,
            "{} vs {}",
            mc.sum,
            cf.sum
        );
        assert!((mc.sum - sum_se(&mc)).abs() < 1e-9);
        let ci = mc.sum_ci_halfwidth.unwrap();
        assert!(ci > 0.0 && ci < 0.05 * mc.sum, "ci {ci}");
        assert!(mc.ci_halfwidth.iter().all(|&h| h > 0.0));
    }

    #[test]
    fn noise_terms_against_closed_form() {
        let (cfg, p) = fig1(100, 20);
        let alpha = alpha_analytic(&cfg, &p);
        let d = noise_decomposition_mc(&cfg, &p, Processing::ZeroForcing, alpha, 2000, 10).unwrap();
        for k in [0, 7, 19] {
            let mean = d[k].desired_mean;
            assert!((mean - C64::new(1.0, 0.0)).norm() < 0.02, "mean {mean}");
            let var_cf = interference_term(&cfg, &p, k, next_user(k, 20));
            let self_cf = interference_term(&cfg, &p, k, k);
            assert!(
                (d[k].var_desired / var_cf - 1.0).abs() < 0.05,
                "var {}",
                d[k].var_desired
            );
            assert!(
                (d[k].self_interf / self_cf - 1.0).abs() < 0.05,
                "self {}",
                d[k].self_interf
            );
            assert_eq!(d[k].cross_interf.len(), 18);
        }
    }

    #[test]
    fn perfect_csi_interference_vanishes() {
        let (cfg, _) = fig1(60, 6);
        let p = FadingProfile::perfect_csi(&[1.0; 6]).unwrap();
        let d = noise_decomposition_mc(&cfg, &p, Processing::ZeroForcing, 1.0, 200, 4).unwrap();
        for u in &d {
            assert!(u.var_desired < 1e-20 && u.self_interf < 1e-20 && u.cross_total() < 1e-20);
            // only the ĝ part of the amplified noise remains: 1/((M−K)σ²)
            let expect = 1.0 / (60.0 - 6.0);
            assert!(
                (u.amplified_noise / expect - 1.0).abs() < 0.1,
                "{}",
                u.amplified_noise
            );
        }
    }

    #[test]
    fn too_few_trials_rejected() {
        let (cfg, p) = fig1(30, 5);
        assert!(se_monte_carlo(&cfg, &p, Processing::ZeroForcing, 99, 1).is_err());
    }
}
