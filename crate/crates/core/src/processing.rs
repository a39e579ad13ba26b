//! Relay receive combiners, precoders, the broadcast permutation schedule and
//! the relay power normalization.

use std::fmt;
use std::str::FromStr;

use crate::channel::{next_user, ChannelRealization, FadingProfile, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, ComplexMatrix, C64};
use crate::moments::collect_moments;

/// Linear processing applied at the relay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Processing {
    ZeroForcing,
    MaximumRatio,
}

impl Processing {
    pub fn label(self) -> &'static str {
        match self {
            Processing::ZeroForcing => "zf",
            Processing::MaximumRatio => "mr",
        }
    }
}

impl fmt::Display for Processing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Processing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zf" => Ok(Processing::ZeroForcing),
            "mr" => Ok(Processing::MaximumRatio),
            other => Err(Error::InvalidConfig(format!(
                "unknown processing mode `{other}`"
            ))),
        }
    }
}

/// ZF combiner `Wᵀ = (ĜᴴĜ)⁻¹Ĝᴴ`, `K × M`.
pub fn zf_receiver(ghat: &ComplexMatrix) -> Result<ComplexMatrix> {
    Cholesky::factor(&ghat.gram())?.solve(&ghat.hermitian())
}

/// ZF precoder `A = Ĝ*(ĜᵀĜ*)⁻¹`, `M × K`.
pub fn zf_precoder(ghat: &ComplexMatrix) -> Result<ComplexMatrix> {
    let conj = ghat.conj();
    // ĜᵀĜ* = conj(ĜᴴĜ) is Hermitian; A = Ĝ*·X with X solving (ĜᵀĜ*)·X = I.
    let gram = conj.gram();
    let x = Cholesky::factor(&gram)?.inverse();
    conj.matmul(&x)
}

/// MR combiner `Wᵀ = Ĝᴴ`.
pub fn mr_receiver(ghat: &ComplexMatrix) -> ComplexMatrix {
    ghat.hermitian()
}

/// MR precoder `A = Ĝ*`.
pub fn mr_precoder(ghat: &ComplexMatrix) -> ComplexMatrix {
    ghat.conj()
}

/// Broadcast permutation for slot `t` (1-based, `1 ≤ t ≤ K − 1`): row `k`
/// has its single one in column `k + t` (cyclic), so user `k` is served the
/// stream of user `k + t`.
pub fn permutation(users: usize, slot: usize) -> Result<ComplexMatrix> {
    if slot == 0 || slot >= users {
        return Err(Error::InvalidSlot { slot, users });
    }
    Ok(cyclic_shift(users, slot))
}

/// `[Π]_{k, k+shift} = 1`. A shift of `K` wraps back to the identity.
pub fn cyclic_shift(users: usize, shift: usize) -> ComplexMatrix {
    let mut pi = ComplexMatrix::zeros(users, users);
    for k in 0..users {
        pi[(k, (k + shift) % users)] = C64::new(1.0, 0.0);
    }
    pi
}

/// Everything the relay applies in one broadcast slot.
#[derive(Clone, Debug)]
pub struct ProcessingSet {
    pub mode: Processing,
    /// Combiner `Wᵀ`, `K × M`.
    pub receiver: ComplexMatrix,
    /// Precoder `A`, `M × K`.
    pub precoder: ComplexMatrix,
    /// `Π⁽ᵗ⁾`.
    pub permutation: ComplexMatrix,
    pub slot: usize,
    /// Power normalization `α⁽ᵗ⁾`.
    pub alpha: f64,
}

impl ProcessingSet {
    pub fn new(mode: Processing, ghat: &ComplexMatrix, slot: usize, alpha: f64) -> Result<Self> {
        let permutation = permutation(ghat.cols(), slot)?;
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        let (receiver, precoder) = match mode {
            Processing::ZeroForcing => (zf_receiver(ghat)?, zf_precoder(ghat)?),
            Processing::MaximumRatio => (mr_receiver(ghat), mr_precoder(ghat)),
        };
        Ok(Self {
            mode,
            receiver,
            precoder,
            permutation,
            slot,
            alpha,
        })
    }

    /// `C⁽ᵗ⁾ = A·Π⁽ᵗ⁾·Wᵀ`, `M × M`.
    pub fn relay_matrix(&self) -> ComplexMatrix {
        let a_pi = &self.precoder * &self.permutation;
        &a_pi * &self.receiver
    }
}

/// Expected power traces `Q1`, `Q2`, `Q3` of the relay transmit signal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QTriple {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

/// Monte Carlo estimate of `Q1..Q3` for the first slot from exact matrices.
pub fn q_terms_mc(
    cfg: &SystemConfig,
    profile: &FadingProfile,
    mode: Processing,
    n_trials: usize,
    seed: u64,
) -> QTriple {
    collect_moments(cfg.antennas, profile, mode, n_trials, seed).q
}

/// `α = P_r / (P_u Q1 + P_u Q2 + Q3)`.
pub fn alpha_mc(cfg: &SystemConfig, q: &QTriple) -> f64 {
    cfg.relay_snr / (cfg.uplink_snr * (q.q1 + q.q2) + q.q3)
}

/// Large-antenna closed form of `α⁽¹⁾` for zero-forcing.
pub fn alpha_analytic(cfg: &SystemConfig, profile: &FadingProfile) -> f64 {
    let m = cfg.antennas as f64;
    let k = cfg.users as f64;
    let inv_sum: f64 = profile.estimate_var.iter().map(|s| 1.0 / s).sum();
    let err_sum: f64 = profile.error_var.iter().sum();
    m * (m - k) * cfg.relay_snr
        / (m * cfg.uplink_snr * inv_sum + cfg.uplink_snr * err_sum * profile.rho + profile.rho)
}

/// Signal at the relay antennas in the multiple-access phase,
/// `y_R = √P_u·G·x + n_r`.
pub fn relay_receive(
    real: &ChannelRealization,
    uplink_snr: f64,
    x: &[C64],
    noise: &[C64],
) -> Result<Vec<C64>> {
    if noise.len() != real.g.rows() {
        return Err(Error::DimensionMismatch {
            op: "relay_receive",
            lhs: real.g.shape(),
            rhs: (noise.len(), 1),
        });
    }
    let gx = real.g.mul_vec(x)?;
    let s = uplink_snr.sqrt();
    Ok(gx.iter().zip(noise).map(|(a, n)| a * s + n).collect())
}

/// Relay transmit vector `s_R = √α·A·Π·Wᵀ·y_R`.
pub fn relay_transmit(
    real: &ChannelRealization,
    proc: &ProcessingSet,
    uplink_snr: f64,
    x: &[C64],
    noise: &[C64],
) -> Result<Vec<C64>> {
    let y = relay_receive(real, uplink_snr, x, noise)?;
    let combined = proc.receiver.mul_vec(&y)?;
    let permuted = proc.permutation.mul_vec(&combined)?;
    let s = proc.alpha.sqrt();
    Ok(proc
        .precoder
        .mul_vec(&permuted)?
        .into_iter()
        .map(|z| z * s)
        .collect())
}

/// Index of the stream user `k` decodes in slot `t`.
pub fn served_stream(k: usize, users: usize, slot: usize) -> usize {
    (0..slot).fold(k, |u, _| next_user(u, users))
}
