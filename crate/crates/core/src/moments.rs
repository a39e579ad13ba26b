//! Per-trial statistics for the first broadcast slot and their Monte Carlo
//! averages.
//!
//! Every quantity the relay power constraint and the spectral-efficiency
//! bound need reduces to `K × K` algebra. With `R = Wᵀ·G`, `Γ = Wᵀ·(Wᵀ)ᴴ` and
//! `A = (Wᵀ)ᵀ` (true for both ZF and MR):
//!
//! * `Gᵀ·B⁽¹⁾ = Rᵀ·Π·R`, entry `(k, i)` is `g_kᵀ b_i`;
//! * `‖g_kᵀ C⁽¹⁾‖² = p_k Γ p_kᴴ` with `p_k` row `k` of `Rᵀ·Π`;
//! * `Aᴴ·A = conj(Γ)`, so each power trace is `Tr[conj(Γ) Π X Πᵀ]`.
//!
//! This avoids the `M × M` products of the literal formulation; the
//! equivalence is checked against the literal matrices in the tests.

use rayon::prelude::*;

use crate::channel::{next_user, prev_user, sample_estimate_and_error, FadingProfile};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, ComplexMatrix, RngStream, C64};
use crate::processing::{Processing, QTriple};

/// Trials evaluated in parallel before a sequential, ordered reduction.
const BLOCK: usize = 64;

/// Statistics of one channel draw.
#[derive(Clone, Debug)]
pub struct TrialStats {
    /// Power traces `[Q1, Q2, Q3]` of this draw.
    pub q: [f64; 3],
    /// `Gᵀ·B⁽¹⁾`; entry `(k, i)` is the gain of stream `i` at user `k`.
    pub gains: ComplexMatrix,
    /// `‖g_kᵀ C⁽¹⁾‖²` per user.
    pub amplified_noise: Vec<f64>,
}

impl TrialStats {
    /// Computes the statistics of one draw `(Ĝ, E)`.
    pub fn compute(mode: Processing, ghat: &ComplexMatrix, e: &ComplexMatrix) -> Result<Self> {
        Ok(Self::compute_modes(&[mode], ghat, e)?.remove(0))
    }

    /// Statistics of one draw for each mode in `modes`, sharing the Gram
    /// factorization. Fails with `SingularGram` for every mode alike.
    pub fn compute_modes(
        modes: &[Processing],
        ghat: &ComplexMatrix,
        e: &ComplexMatrix,
    ) -> Result<Vec<Self>> {
        let gram = ghat.gram();
        let cross = ghat.adjoint_mul(e)?;
        let chol = Cholesky::factor(&gram)?;
        modes
            .iter()
            .map(|&mode| match mode {
                Processing::ZeroForcing => {
                    Self::from_parts(chol.inverse(), None, chol.solve(&cross)?)
                }
                Processing::MaximumRatio => {
                    Self::from_parts(gram.clone(), Some(&gram), cross.clone())
                }
            })
            .collect()
    }

    /// `gamma = Wᵀ(Wᵀ)ᴴ`, `y_est = WᵀĜ` (None means identity), `y_err = WᵀE`.
    fn from_parts(
        gamma: ComplexMatrix,
        y_est: Option<&ComplexMatrix>,
        y_err: ComplexMatrix,
    ) -> Result<Self> {
        let k = gamma.rows();
        let mut r = y_err.clone();
        match y_est {
            None => (0..k).for_each(|i| r[(i, i)] += 1.0),
            Some(y) => r = &r + y,
        }

        let q1 = match y_est {
            None => gamma.trace()?.re,
            Some(y) => permuted_trace(&gamma, &y.matmul(&y.hermitian())?),
        };
        let q2 = permuted_trace(&gamma, &y_err.matmul(&y_err.hermitian())?);
        let q3 = permuted_trace(&gamma, &gamma);

        // Π·R: row j is row j+1 of R
        let shifted = ComplexMatrix::from_fn(k, k, |j, i| r[(next_user(j, k), i)]);
        let gains = r.conj().adjoint_mul(&shifted)?;

        // Rᵀ·Π: entry (k, j) is R[j-1, k]
        let p = ComplexMatrix::from_fn(k, k, |u, j| r[(prev_user(j, k), u)]);
        let pg = p.matmul(&gamma)?;
        let amplified_noise = (0..k)
            .map(|u| {
                pg.row(u)
                    .iter()
                    .zip(p.row(u))
                    .map(|(a, b)| (a * b.conj()).re)
                    .sum()
            })
            .collect();

        Ok(Self {
            q: [q1, q2, q3],
            gains,
            amplified_noise,
        })
    }
}

/// `Re Tr[conj(Γ)·Π·X·Πᵀ] = Re Σ_{a,b} conj(Γ[a,b]) X[b+1, a+1]`.
fn permuted_trace(gamma: &ComplexMatrix, x: &ComplexMatrix) -> f64 {
    let k = gamma.rows();
    let mut acc = 0.0;
    for a in 0..k {
        let pa = next_user(a, k);
        for b in 0..k {
            acc += (gamma[(a, b)].conj() * x[(next_user(b, k), pa)]).re;
        }
    }
    acc
}

/// Draws trial `trial` of the stream rooted at `seed`, resampling the draw
/// until its Gram matrix is accepted.
pub fn trial_stats(
    antennas: usize,
    profile: &FadingProfile,
    mode: Processing,
    seed: u64,
    trial: u64,
) -> TrialStats {
    trial_stats_modes(antennas, profile, &[mode], seed, trial).remove(0)
}

/// As [`trial_stats`], evaluating every mode on the same draw.
pub fn trial_stats_modes(
    antennas: usize,
    profile: &FadingProfile,
    modes: &[Processing],
    seed: u64,
    trial: u64,
) -> Vec<TrialStats> {
    let mut rng = RngStream::new(seed, trial);
    loop {
        let (ghat, e) = sample_estimate_and_error(antennas, profile, &mut rng);
        match TrialStats::compute_modes(modes, &ghat, &e) {
            Ok(s) => return s,
            Err(Error::SingularGram { .. }) => continue,
            Err(err) => panic!("trial statistics on conforming draws: {err}"),
        }
    }
}

/// Per-user values recorded for every trial, used for confidence intervals.
pub const USER_RECORD: usize = 5;
/// Global values recorded for every trial (the three power traces).
pub const GLOBAL_RECORD: usize = 3;

/// Monte Carlo averages of the trial statistics.
#[derive(Clone, Debug)]
pub struct MomentEstimates {
    pub mode: Processing,
    pub trials: usize,
    pub q: QTriple,
    /// `Ê{g_kᵀ b_{k+1}}` per user.
    pub desired_mean: Vec<C64>,
    /// `Ê{|g_kᵀ b_i|²}`, `K × K` row-major.
    pub gain_power: Vec<f64>,
    /// `Ê{‖g_kᵀ C⁽¹⁾‖²}` per user.
    pub amplified_noise: Vec<f64>,
    /// Per-trial records, `GLOBAL_RECORD + USER_RECORD·K` values each:
    /// `q1, q2, q3`, then per user `Re z, Im z, |z|², Σ_{i≠k+1}|g_kᵀb_i|², ‖g_kᵀC‖²`
    /// with `z = g_kᵀ b_{k+1}`.
    pub records: Vec<f64>,
}

impl MomentEstimates {
    pub fn users(&self) -> usize {
        self.desired_mean.len()
    }

    pub fn record_len(&self) -> usize {
        GLOBAL_RECORD + USER_RECORD * self.users()
    }

    /// Record of trial `t`.
    pub fn record(&self, t: usize) -> &[f64] {
        let w = self.record_len();
        &self.records[t * w..(t + 1) * w]
    }

    /// `Ê{|g_k b_i|²}`.
    pub fn gain_power(&self, k: usize, i: usize) -> f64 {
        self.gain_power[k * self.users() + i]
    }
}

/// Runs `n_trials` independent draws (trial `t` uses stream `t` of `seed`)
/// and averages their statistics. The reduction runs in trial order, so the
/// result is bit-identical for any number of worker threads.
pub fn collect_moments(
    antennas: usize,
    profile: &FadingProfile,
    mode: Processing,
    n_trials: usize,
    seed: u64,
) -> MomentEstimates {
    collect_moments_modes(antennas, profile, &[mode], n_trials, seed).remove(0)
}

/// As [`collect_moments`] for several modes evaluated on common draws. Each
/// output equals the single-mode run with the same seed.
pub fn collect_moments_modes(
    antennas: usize,
    profile: &FadingProfile,
    modes: &[Processing],
    n_trials: usize,
    seed: u64,
) -> Vec<MomentEstimates> {
    assert!(n_trials >= 1, "need at least one trial");
    let mut acc: Vec<Accumulator> = modes
        .iter()
        .map(|&m| Accumulator::new(m, profile.users(), n_trials))
        .collect();
    for start in (0..n_trials).step_by(BLOCK) {
        let end = (start + BLOCK).min(n_trials);
        let block: Vec<Vec<TrialStats>> = (start..end)
            .into_par_iter()
            .map(|t| trial_stats_modes(antennas, profile, modes, seed, t as u64))
            .collect();
        for stats in &block {
            for (a, s) in acc.iter_mut().zip(stats) {
                a.push(s);
            }
        }
    }
    acc.into_iter().map(Accumulator::finish).collect()
}

struct Accumulator {
    mode: Processing,
    users: usize,
    trials: usize,
    q_sum: [f64; 3],
    mean_sum: Vec<C64>,
    power_sum: Vec<f64>,
    amp_sum: Vec<f64>,
    records: Vec<f64>,
}

impl Accumulator {
    fn new(mode: Processing, k: usize, n_trials: usize) -> Self {
        Self {
            mode,
            users: k,
            trials: 0,
            q_sum: [0.0; 3],
            mean_sum: vec![C64::new(0.0, 0.0); k],
            power_sum: vec![0.0; k * k],
            amp_sum: vec![0.0; k],
            records: Vec::with_capacity(n_trials * (GLOBAL_RECORD + USER_RECORD * k)),
        }
    }

    fn push(&mut self, s: &TrialStats) {
        let k = self.users;
        self.trials += 1;
        for (acc, v) in self.q_sum.iter_mut().zip(s.q) {
            *acc += v;
        }
        self.records.extend_from_slice(&s.q);
        for u in 0..k {
            let row = s.gains.row(u);
            let z = row[next_user(u, k)];
            let mut total = 0.0;
            for (i, g) in row.iter().enumerate() {
                let p = g.norm_sqr();
                self.power_sum[u * k + i] += p;
                total += p;
            }
            self.mean_sum[u] += z;
            self.amp_sum[u] += s.amplified_noise[u];
            let z2 = z.norm_sqr();
            self.records
                .extend_from_slice(&[z.re, z.im, z2, total - z2, s.amplified_noise[u]]);
        }
    }

    fn finish(self) -> MomentEstimates {
        let n = self.trials as f64;
        MomentEstimates {
            mode: self.mode,
            trials: self.trials,
            q: QTriple {
                q1: self.q_sum[0] / n,
                q2: self.q_sum[1] / n,
                q3: self.q_sum[2] / n,
            },
            desired_mean: self.mean_sum.into_iter().map(|z| z / n).collect(),
            gain_power: self.power_sum.into_iter().map(|v| v / n).collect(),
            amplified_noise: self.amp_sum.into_iter().map(|v| v / n).collect(),
            records: self.records,
        }
    }
}
