//! System configuration, MMSE estimation statistics and channel sampling.
//!
//! The relay never simulates pilot reception explicitly. The estimate `Ĝ`
//! and the error `E` are drawn directly from their distributions,
//! `Ĝ ~ CN(0, diag(σ²_k))` and `E ~ CN(0, diag(β_k − σ²_k))`, which is
//! statistically the same as MMSE filtering of orthogonal pilots.

use crate::error::{Error, Result};
use crate::linalg::{sample_circular_gaussian, ComplexMatrix, RngStream};

/// User index after `k`, wrapping `K - 1` to `0`.
#[inline]
pub fn next_user(k: usize, users: usize) -> usize {
    (k + 1) % users
}

/// User index before `k`, wrapping `0` to `K - 1`.
#[inline]
pub fn prev_user(k: usize, users: usize) -> usize {
    (k + users - 1) % users
}

/// Power ratio from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Scalar system parameters. SNRs are linear and already normalized by the
/// noise power.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemConfig {
    /// Relay antennas `M`.
    pub antennas: usize,
    /// Single-antenna users `K`.
    pub users: usize,
    /// Coherence interval `T` in symbols.
    pub coherence: usize,
    /// Pilot length `τ` in symbols.
    pub training: usize,
    pub uplink_snr: f64,
    pub pilot_snr: f64,
    pub relay_snr: f64,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.users < 2 {
            return bad(format!("need at least 2 users, got {}", self.users));
        }
        if self.antennas <= self.users {
            return bad(format!(
                "relay antennas ({}) must exceed users ({})",
                self.antennas, self.users
            ));
        }
        if self.training < self.users {
            return bad(format!(
                "orthogonal pilots need training >= users ({} < {})",
                self.training, self.users
            ));
        }
        if self.training >= self.coherence {
            return bad(format!(
                "training ({}) must be shorter than the coherence interval ({})",
                self.training, self.coherence
            ));
        }
        for (name, v) in [
            ("uplink_snr", self.uplink_snr),
            ("pilot_snr", self.pilot_snr),
            ("relay_snr", self.relay_snr),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(())
    }

    /// Fraction of the coherence interval left for data, `(T − τ)/T`.
    /// Zero (not an error) when training fills the interval.
    pub fn data_fraction(&self) -> f64 {
        self.coherence.saturating_sub(self.training) as f64 / self.coherence as f64
    }

    /// Rate prefactor `((T − τ)/T)·((K − 1)/K)`.
    pub fn prefactor(&self) -> f64 {
        self.data_fraction() * (self.users - 1) as f64 / self.users as f64
    }
}

/// Per-user large-scale fading and the derived MMSE statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct FadingProfile {
    /// `β_k`.
    pub betas: Vec<f64>,
    /// Estimate variance `σ²_k = τ P_p β_k² / (τ P_p β_k + 1)`.
    pub estimate_var: Vec<f64>,
    /// Error variance `σ²_{e,k} = β_k − σ²_k`.
    pub error_var: Vec<f64>,
    /// `ϱ = Σ_k 1/(σ²_k σ²_{k+1})`, cyclic.
    pub rho: f64,
}

impl FadingProfile {
    pub fn users(&self) -> usize {
        self.betas.len()
    }

    /// Profile with perfect CSI: `σ²_k = β_k`, no estimation error.
    pub fn perfect_csi(betas: &[f64]) -> Result<Self> {
        check_betas(betas)?;
        Ok(Self::from_parts(betas.to_vec(), betas.to_vec()))
    }

    fn from_parts(betas: Vec<f64>, estimate_var: Vec<f64>) -> Self {
        let error_var = betas
            .iter()
            .zip(&estimate_var)
            .map(|(b, s)| (b - s).max(0.0))
            .collect();
        let rho = rho(&estimate_var);
        Self {
            betas,
            estimate_var,
            error_var,
            rho,
        }
    }
}

fn check_betas(betas: &[f64]) -> Result<()> {
    if let Some((user, &value)) = betas
        .iter()
        .enumerate()
        .find(|(_, b)| !(b.is_finite() && **b > 0.0))
    {
        return Err(Error::NonPositiveBeta { user, value });
    }
    Ok(())
}

/// `Σ_k 1/(σ²_k σ²_{k+1})` with cyclic wraparound.
pub fn rho(estimate_var: &[f64]) -> f64 {
    let k = estimate_var.len();
    (0..k)
        .map(|i| 1.0 / (estimate_var[i] * estimate_var[next_user(i, k)]))
        .sum()
}

/// MMSE estimation statistics for orthogonal pilots of length `training`.
pub fn estimation_stats(betas: &[f64], training: usize, pilot_snr: f64) -> Result<FadingProfile> {
    check_betas(betas)?;
    if training == 0 {
        return Err(Error::InvalidConfig("training length must be >= 1".into()));
    }
    if !(pilot_snr.is_finite() && pilot_snr > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "pilot SNR must be positive, got {pilot_snr}"
        )));
    }
    let tp = training as f64 * pilot_snr;
    let estimate_var = betas
        .iter()
        .map(|&b| b * (tp * b / (tp * b + 1.0)))
        .collect();
    Ok(FadingProfile::from_parts(betas.to_vec(), estimate_var))
}

/// One draw of the true channel, its estimate and the estimation error.
#[derive(Clone, Debug)]
pub struct ChannelRealization {
    /// True channel `G = Ĝ + E`, `M × K`.
    pub g: ComplexMatrix,
    /// MMSE estimate `Ĝ`.
    pub ghat: ComplexMatrix,
    /// Estimation error `E`, independent of `Ĝ`.
    pub e: ComplexMatrix,
}

/// Draws `Ĝ` then `E` from `rng` (each row-major) and assembles `G`.
pub fn sample_realization(
    cfg: &SystemConfig,
    profile: &FadingProfile,
    rng: &mut RngStream,
) -> ChannelRealization {
    let (ghat, e) = sample_estimate_and_error(cfg.antennas, profile, rng);
    let g = &ghat + &e;
    ChannelRealization { g, ghat, e }
}

pub(crate) fn sample_estimate_and_error(
    antennas: usize,
    profile: &FadingProfile,
    rng: &mut RngStream,
) -> (ComplexMatrix, ComplexMatrix) {
    let k = profile.users();
    let sd = |v: &[f64]| v.iter().map(|x| x.sqrt()).collect::<Vec<_>>();
    let mut ghat = sample_circular_gaussian(antennas, k, rng);
    ghat.scale_columns(&sd(&profile.estimate_var));
    let mut e = sample_circular_gaussian(antennas, k, rng);
    e.scale_columns(&sd(&profile.error_var));
    (ghat, e)
}

/// Geometry of a cell drop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DropGeometry {
    pub disk_diameter_m: f64,
    pub shadow_std_db: f64,
    pub pathloss_exp: f64,
}

impl Default for DropGeometry {
    fn default() -> Self {
        Self {
            disk_diameter_m: 1000.0,
            shadow_std_db: 8.0,
            pathloss_exp: 4.0,
        }
    }
}

/// A user placed in the cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UserPlacement {
    /// Distance to the relay at the disk center, in meters.
    pub distance_m: f64,
    pub shadow_db: f64,
    pub beta: f64,
}

/// Path-loss model `β = z / (1 + d^ν)` with `z = 10^(shadow_db/10)`.
pub fn large_scale_gain(distance_m: f64, shadow_db: f64, pathloss_exp: f64) -> f64 {
    db_to_linear(shadow_db) / (1.0 + distance_m.powf(pathloss_exp))
}

/// Places `count` users uniformly (by area) on the disk and draws their
/// log-normal shadowing.
pub fn drop_user_placements(
    count: usize,
    geometry: &DropGeometry,
    rng: &mut RngStream,
) -> Vec<UserPlacement> {
    let radius = geometry.disk_diameter_m / 2.0;
    (0..count)
        .map(|_| {
            let distance_m = radius * rng.uniform().sqrt();
            let shadow_db = geometry.shadow_std_db * rng.standard_normal();
            UserPlacement {
                distance_m,
                shadow_db,
                beta: large_scale_gain(distance_m, shadow_db, geometry.pathloss_exp),
            }
        })
        .collect()
}

/// Large-scale coefficients of `count` users dropped on the disk.
pub fn drop_users(
    count: usize,
    disk_diameter_m: f64,
    shadow_std_db: f64,
    pathloss_exp: f64,
    rng: &mut RngStream,
) -> Vec<f64> {
    let geometry = DropGeometry {
        disk_diameter_m,
        shadow_std_db,
        pathloss_exp,
    };
    drop_user_placements(count, &geometry, rng)
        .into_iter()
        .map(|u| u.beta)
        .collect()
}
