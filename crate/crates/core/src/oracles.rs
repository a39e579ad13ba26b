//! Statistical checks of the random-matrix identities behind the closed form.
//!
//! Each check draws channels, evaluates the quantity from the literal `M × M`
//! relay matrix `Ψ = A·Π⁽¹⁾·Wᵀ` (not the reduced kernel in [`crate::moments`])
//! and compares the sample mean with its analytic value.
//!
//! Two tolerance classes exist. Exact identities hold at every `M > K` and
//! pass when the error is within four Monte Carlo standard errors.
//! Asymptotic ones only hold as `M → ∞` and get a relative allowance on top.

use std::fmt;

use rayon::prelude::*;

use crate::channel::{
    next_user, prev_user, sample_realization, ChannelRealization, FadingProfile, SystemConfig,
};
use crate::error::{Error, Result};
use crate::linalg::{sample_circular_gaussian, Cholesky, ComplexMatrix, RngStream, C64};
use crate::processing::{Processing, ProcessingSet};
use crate::se::{amplified_noise_term, interference_term};

/// Relative allowance for identities that only hold as `M → ∞`.
pub const ASYMPTOTIC_TOLERANCE: f64 = 0.05;
/// Relative allowance for the inverse-Wishart trace at `M = K + 1`, where the inverse-Wishart
/// variance is unbounded.
pub const EDGE_TOLERANCE: f64 = 0.10;
/// Width of the statistical band in standard errors.
pub const STD_ERRORS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToleranceClass {
    Exact,
    Asymptotic,
}

impl ToleranceClass {
    pub fn label(self) -> &'static str {
        match self {
            ToleranceClass::Exact => "exact",
            ToleranceClass::Asymptotic => "asymptotic",
        }
    }
}

/// Outcome of one oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub name: String,
    pub class: ToleranceClass,
    pub empirical: f64,
    pub analytic: f64,
    pub rel_error: f64,
    pub mc_std_error: f64,
    pub trials: usize,
    /// Relative tolerance; the pass band is
    /// `max(tolerance·|analytic|, 4·mc_std_error)`.
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleResult {
    pub fn from_samples(
        name: impl Into<String>,
        class: ToleranceClass,
        tolerance: f64,
        samples: &[f64],
        analytic: f64,
    ) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self::new(
            name,
            class,
            tolerance,
            mean,
            analytic,
            (var / n as f64).sqrt(),
            n,
        )
    }

    pub fn new(
        name: impl Into<String>,
        class: ToleranceClass,
        tolerance: f64,
        empirical: f64,
        analytic: f64,
        mc_std_error: f64,
        trials: usize,
    ) -> Self {
        let diff = (empirical - analytic).abs();
        let rel_error = if analytic != 0.0 {
            diff / analytic.abs()
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let band = (tolerance * analytic.abs()).max(STD_ERRORS * mc_std_error);
        Self {
            name: name.into(),
            class,
            empirical,
            analytic,
            rel_error,
            mc_std_error,
            trials,
            tolerance,
            pass: diff <= band,
        }
    }

    /// Error measured in Monte Carlo standard errors.
    pub fn z_score(&self) -> f64 {
        (self.empirical - self.analytic).abs() / self.mc_std_error
    }
}

impl fmt::Display for OracleResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<24} empirical {:.6e} analytic {:.6e} rel {:.3}% ({} trials, {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.empirical,
            self.analytic,
            100.0 * self.rel_error,
            self.trials,
            self.class.label()
        )
    }
}

fn ordered<T: Send>(n_trials: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..n_trials as u64).into_par_iter().map(f).collect()
}

/// `E{Tr[D̂ (XᴴX)⁻¹]} = (1/(M−K)) Σ_k D̂_kk / D_kk` for `X` with i.i.d.
/// rows `CN(0, D)`.
pub fn inverse_wishart_trace_check(
    antennas: usize,
    users: usize,
    d: &[f64],
    dhat: &[f64],
    n_trials: usize,
    seed: u64,
) -> Result<OracleResult> {
    if antennas <= users || d.len() != users || dhat.len() != users {
        return Err(Error::InvalidConfig(format!(
            "inverse-Wishart trace needs M > K and K diagonal entries (M={antennas}, K={users})"
        )));
    }
    let sd: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    let samples = ordered(n_trials, |t| {
        let mut rng = RngStream::new(seed, t);
        loop {
            let mut x = sample_circular_gaussian(antennas, users, &mut rng);
            x.scale_columns(&sd);
            if let Ok(chol) = Cholesky::factor(&x.gram()) {
                let inv = chol.inverse();
                break (0..users).map(|k| dhat[k] * inv[(k, k)].re).sum::<f64>();
            }
        }
    });
    let analytic = d.iter().zip(dhat).map(|(a, b)| b / a).sum::<f64>() / (antennas - users) as f64;
    let tolerance = if antennas == users + 1 {
        EDGE_TOLERANCE
    } else {
        0.0
    };
    Ok(OracleResult::from_samples(
        format!("inverse_wishart_trace M={antennas} K={users}"),
        ToleranceClass::Exact,
        tolerance,
        &samples,
        analytic,
    ))
}

/// `E{|xᵀAx|²} = Tr(AAᴴ) + Tr(AA*)` for `x ~ CN(0, I)`.
pub fn quadratic_form_check(a: &ComplexMatrix, n_trials: usize, seed: u64) -> Result<OracleResult> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            op: "quadratic_form",
            lhs: a.shape(),
            rhs: a.shape(),
        });
    }
    let m = a.rows();
    let samples = ordered(n_trials, |t| {
        let mut rng = RngStream::new(seed, t);
        let x: Vec<C64> = (0..m).map(|_| rng.complex_gaussian()).collect();
        let ax = a.mul_vec(&x).expect("square");
        x.iter()
            .zip(&ax)
            .map(|(u, v)| u * v)
            .sum::<C64>()
            .norm_sqr()
    });
    let analytic = quadratic_form_analytic(a);
    Ok(OracleResult::from_samples(
        format!("quadratic_form M={m}"),
        ToleranceClass::Exact,
        0.0,
        &samples,
        analytic,
    ))
}

/// `Tr(AAᴴ) + Tr(AA*)`, real part.
pub fn quadratic_form_analytic(a: &ComplexMatrix) -> f64 {
    let aah = a.matmul(&a.hermitian()).expect("square");
    let aac = a.matmul(&a.conj()).expect("square");
    (aah.trace().expect("square") + aac.trace().expect("square")).re
}

/// Draws realization `t` with an accepted ZF processing set for slot 1.
fn zf_draw(
    cfg: &SystemConfig,
    profile: &FadingProfile,
    seed: u64,
    t: u64,
) -> (ChannelRealization, ComplexMatrix) {
    let mut rng = RngStream::new(seed, t);
    loop {
        let real = sample_realization(cfg, profile, &mut rng);
        if let Ok(set) = ProcessingSet::new(Processing::ZeroForcing, &real.ghat, 1, 1.0) {
            let psi = set.relay_matrix();
            return (real, psi);
        }
    }
}

/// Exact-matrix `Q1`, `Q2`, `Q3` against their closed forms.
pub fn q_asymptotic_check(
    cfg: &SystemConfig,
    profile: &FadingProfile,
    n_trials: usize,
    seed: u64,
) -> Result<[OracleResult; 3]> {
    q_asymptotic_check_with(cfg, profile, profile, n_trials, seed)
}

/// As [`q_asymptotic_check`], sampling channels from `sampled` but
/// evaluating the closed forms with `assumed` statistics.
pub fn q_asymptotic_check_with(
    cfg: &SystemConfig,
    sampled: &FadingProfile,
    assumed: &FadingProfile,
    n_trials: usize,
    seed: u64,
) -> Result<[OracleResult; 3]> {
    cfg.validate()?;
    let samples = ordered(n_trials, |t| {
        let (real, psi) = zf_draw(cfg, sampled, seed, t);
        [
            psi.matmul(&real.ghat)
                .expect("conformable")
                .frobenius_norm_sq(),
            psi.matmul(&real.e)
                .expect("conformable")
                .frobenius_norm_sq(),
            psi.frobenius_norm_sq(),
        ]
    });
    let column = |i: usize| samples.iter().map(|s| s[i]).collect::<Vec<_>>();
    let m = cfg.antennas as f64;
    let mk = m * (m - cfg.users as f64);
    let inv_sum: f64 = assumed.estimate_var.iter().map(|s| 1.0 / s).sum();
    let err_sum: f64 = assumed.error_var.iter().sum();
    Ok([
        OracleResult::from_samples(
            "Q1",
            ToleranceClass::Exact,
            0.03,
            &column(0),
            inv_sum / (m - cfg.users as f64),
        ),
        OracleResult::from_samples(
            "Q2",
            ToleranceClass::Asymptotic,
            ASYMPTOTIC_TOLERANCE,
            &column(1),
            assumed.rho * err_sum / mk,
        ),
        OracleResult::from_samples(
            "Q3",
            ToleranceClass::Asymptotic,
            ASYMPTOTIC_TOLERANCE,
            &column(2),
            assumed.rho / mk,
        ),
    ])
}

fn bilinear(u: &[C64], psi: &ComplexMatrix, v: &[C64]) -> C64 {
    let pv = psi.mul_vec(v).expect("conformable");
    u.iter().zip(&pv).map(|(a, b)| a * b).sum()
}

/// Exact-matrix estimates of the effective-noise building blocks of user
/// `user` against their closed forms: `V1..V3`, `|I1|²..|I3|²`, the desired
/// gain variance, self and cross interference, and the amplified noise.
pub fn variance_terms_check(
    cfg: &SystemConfig,
    profile: &FadingProfile,
    user: usize,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<OracleResult>> {
    cfg.validate()?;
    let users = cfg.users;
    if user >= users || users < 3 {
        return Err(Error::InvalidConfig(format!(
            "user {user} out of range for K={users} (need K >= 3)"
        )));
    }
    let k = user;
    let k1 = next_user(k, users);
    let km = prev_user(k, users);
    let other = next_user(k1, users);

    const V1: usize = 0;
    const V2: usize = 1;
    const V3: usize = 2;
    const I1: usize = 3;
    const I2: usize = 4;
    const I3: usize = 5;
    const SELF: usize = 6;
    const CROSS: usize = 7;
    const AMP: usize = 8;
    const DESIRED_RE: usize = 9;
    const DESIRED_IM: usize = 10;

    let samples = ordered(n_trials, |t| {
        let (real, psi) = zf_draw(cfg, profile, seed, t);
        let col = |m: &ComplexMatrix, j: usize| m.column(j);
        let (gk, gk1, gi) = (col(&real.g, k), col(&real.g, k1), col(&real.g, other));
        let (hk, hk1) = (col(&real.ghat, k), col(&real.ghat, k1));
        let (ek, ek1) = (col(&real.e, k), col(&real.e, k1));
        let mut s = [0.0; 11];
        s[V1] = bilinear(&hk, &psi, &ek1).norm_sqr();
        s[V2] = bilinear(&ek, &psi, &hk1).norm_sqr();
        s[V3] = bilinear(&ek, &psi, &ek1).norm_sqr();
        s[I1] = bilinear(&hk, &psi, &ek).norm_sqr();
        s[I2] = bilinear(&ek, &psi, &hk).norm_sqr();
        s[I3] = bilinear(&ek, &psi, &ek).norm_sqr();
        s[SELF] = bilinear(&gk, &psi, &gk).norm_sqr();
        s[CROSS] = bilinear(&gk, &psi, &gi).norm_sqr();
        let gc = psi.transpose().mul_vec(&gk).expect("conformable");
        s[AMP] = gc.iter().map(|z| z.norm_sqr()).sum();
        let z = bilinear(&gk, &psi, &gk1);
        s[DESIRED_RE] = z.re;
        s[DESIRED_IM] = z.im;
        s
    });
    let column = |i: usize| samples.iter().map(|s| s[i]).collect::<Vec<_>>();

    let m = cfg.antennas as f64;
    let mk_lin = m - users as f64;
    let mk = m * mk_lin;
    let sv = &profile.estimate_var;
    let ev = &profile.error_var;
    let rho = profile.rho;

    let mean_re = column(DESIRED_RE).iter().sum::<f64>() / n_trials as f64;
    let mean_im = column(DESIRED_IM).iter().sum::<f64>() / n_trials as f64;
    let centered: Vec<f64> = samples
        .iter()
        .map(|s| (s[DESIRED_RE] - mean_re).powi(2) + (s[DESIRED_IM] - mean_im).powi(2))
        .collect();

    use ToleranceClass::{Asymptotic, Exact};
    let asym = ASYMPTOTIC_TOLERANCE;
    Ok(vec![
        OracleResult::from_samples("V1", Exact, 0.0, &column(V1), ev[k1] / (mk_lin * sv[k1])),
        OracleResult::from_samples("V2", Exact, 0.0, &column(V2), ev[k] / (mk_lin * sv[k])),
        OracleResult::from_samples(
            "V3",
            Asymptotic,
            asym,
            &column(V3),
            ev[k] * ev[k1] * rho / mk,
        ),
        OracleResult::from_samples("I1", Exact, 0.0, &column(I1), ev[k] / (mk_lin * sv[k1])),
        OracleResult::from_samples("I2", Exact, 0.0, &column(I2), ev[k] / (mk_lin * sv[km])),
        OracleResult::from_samples(
            "I3",
            Asymptotic,
            asym,
            &column(I3),
            ev[k] * ev[k] * rho / mk,
        ),
        OracleResult::from_samples("desired_gain_mean", Exact, 0.0, &column(DESIRED_RE), 1.0),
        OracleResult::from_samples(
            "desired_gain_var",
            Asymptotic,
            asym,
            &centered,
            interference_term(cfg, profile, k, k1),
        ),
        OracleResult::from_samples(
            "self_interference",
            Asymptotic,
            asym,
            &column(SELF),
            interference_term(cfg, profile, k, k),
        ),
        OracleResult::from_samples(
            "cross_interference",
            Asymptotic,
            asym,
            &column(CROSS),
            interference_term(cfg, profile, k, other),
        ),
        OracleResult::from_samples(
            "J",
            Asymptotic,
            asym,
            &column(AMP),
            amplified_noise_term(cfg, profile, k),
        ),
    ])
}
